mod oracle;

use kan_imbalance::spline::{combine, KnotVector};
use kan_imbalance::Error;
use oracle::{bspline, bspline_derivative, exact, exact_gap, q};
use proptest::prelude::*;

#[test]
fn knot_layout() {
    let kv = KnotVector::new(3, 5, (0.0, 1.0)).unwrap();
    assert_eq!(kv.knots().len(), 12);
    assert_eq!(kv.basis_count(), 8);
    assert!((kv.knots()[0] + 0.6).abs() < 1e-15);
    assert!((kv.knots()[11] - 1.6).abs() < 1e-15);
    assert!(kv.knots().windows(2).all(|w| w[0] < w[1]));
    assert_eq!(KnotVector::new(1, 1, (0.0, 1.0)).unwrap().knots(), &[-1.0, 0.0, 1.0, 2.0]);
    assert!(matches!(KnotVector::new(2, 3, (1.0, 1.0)), Err(Error::Domain(_))));
}

/// Interval midpoints of a 1000-cell grid (never a knot for G in 3..=5,
/// even after rounding) plus both domain ends.
fn sample_points() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..1000).map(|i| (2 * i + 1) as f64 / 2000.0).collect();
    xs.extend([0.0, 1.0]);
    xs
}

#[test]
fn matches_rational_oracle_on_a_grid() {
    for k in 1..=3 {
        for g in 3..=5 {
            let kv = KnotVector::new(k, g, (0.0, 1.0)).unwrap();
            for x in sample_points() {
                let got = kv.eval_basis(x);
                let xq = exact(x);
                let want = bspline(k, g, &q(0, 1), &q(1, 1), &xq);
                let dwant = bspline_derivative(k, g, &q(0, 1), &q(1, 1), &xq);
                for m in 0..kv.basis_count() {
                    assert!(exact_gap(&want[m], got.values[m]) < 1e-14, "k={k} G={g} x={x} m={m}");
                    assert!(exact_gap(&dwant[m], got.derivatives[m]) < 1e-11, "derivative k={k} G={g} x={x} m={m}");
                }
            }
        }
    }
}

#[test]
fn rational_midpoint_example() {
    // k = 3, G = 5, x = 1/2: middle of the third interval
    let kv = KnotVector::new(3, 5, (0.0, 1.0)).unwrap();
    let got = kv.eval_basis(0.5);
    let want = bspline(3, 5, &q(0, 1), &q(1, 1), &q(1, 2));
    let nonzero: Vec<_> = want.iter().enumerate().filter(|(_, v)| **v != q(0, 1)).collect();
    assert_eq!(nonzero.len(), 3);
    assert_eq!(*nonzero[0].1, q(1, 8));
    assert_eq!(*nonzero[1].1, q(3, 4));
    assert_eq!(*nonzero[2].1, q(1, 8));
    for (m, v) in want.iter().enumerate() {
        assert!(exact_gap(v, got.values[m]) < 1e-14);
    }
}

#[test]
fn spline_value_and_slope() {
    let kv = KnotVector::new(3, 4, (-1.0, 2.0)).unwrap();
    let coeffs: Vec<f64> = (0..kv.basis_count()).map(|i| (i as f64 * 0.7).sin()).collect();
    for step in 1..100 {
        let x = -1.0 + 3.0 * step as f64 / 100.0;
        let (v, dv) = kv.eval_spline(&coeffs, x).unwrap();
        let (v2, dv2) = combine(&kv.eval_active(x), &coeffs);
        assert_eq!((v, dv), (v2, dv2));
        let h = 1e-6;
        let fd = (kv.eval_spline(&coeffs, x + h).unwrap().0 - kv.eval_spline(&coeffs, x - h).unwrap().0) / (2.0 * h);
        assert!((fd - dv).abs() < 1e-6, "x={x}: {fd} vs {dv}");
    }
    assert!(matches!(kv.eval_spline(&[1.0], 0.0), Err(Error::Shape(_))));
}

proptest! {
    #[test]
    fn basis_properties(k in 1usize..=5, g in 1usize..=8, a in -3.0f64..3.0, width in 0.1f64..5.0, u in 0.0f64..=1.0) {
        let b = a + width;
        let kv = KnotVector::new(k, g, (a, b)).unwrap();
        let x = a + u * width;
        let e = kv.eval_basis(x);
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(e.values.iter().all(|v| *v >= 0.0));
        let nz: Vec<usize> = (0..e.values.len()).filter(|&m| e.values[m] != 0.0).collect();
        prop_assert!(nz.len() <= k);
        if let (Some(f), Some(l)) = (nz.first(), nz.last()) {
            prop_assert!(l - f < k);
        }
        let dsum: f64 = e.derivatives.iter().sum();
        prop_assert!(dsum.abs() < 1e-9 * (g as f64 / width).max(1.0));
    }

    #[test]
    fn convex_hull(k in 1usize..=4, g in 1usize..=6, u in 0.0f64..=1.0, seed in any::<u64>()) {
        let kv = KnotVector::new(k, g, (0.0, 1.0)).unwrap();
        let coeffs: Vec<f64> = (0..kv.basis_count())
            .map(|i| ((seed.wrapping_mul(i as u64 + 1) % 1000) as f64 / 100.0) - 5.0)
            .collect();
        let (v, _) = kv.eval_spline(&coeffs, u).unwrap();
        let lo = coeffs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = coeffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn clamps_outside_the_domain(k in 1usize..=4, g in 1usize..=6, x in -10.0f64..10.0) {
        let kv = KnotVector::new(k, g, (0.0, 1.0)).unwrap();
        let clamped = x.clamp(0.0, 1.0);
        prop_assert_eq!(kv.eval_basis(x).values, kv.eval_basis(clamped).values);
    }
}
