//! Slow reference implementations for the test suite. Nothing here calls
//! into the library's numeric code.
#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact value of a finite float.
pub fn exact(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

/// Uniform knots `a + (b - a)(i - k)/G`, `i = 0..=G + 2k`.
pub fn knots(k: usize, g: usize, a: &Q, b: &Q) -> Vec<Q> {
    (0..=g + 2 * k)
        .map(|i| {
            let i = BigInt::from(i as i64 - k as i64);
            a + (b - a) * Q::new(i, BigInt::from(g as i64))
        })
        .collect()
}

/// Order-`p` B-spline `i` by direct recursion. Order 1 is the indicator of
/// `[t_i, t_{i+1})`, except that the right end of interval `closed` belongs
/// to that interval alone.
fn cox_de_boor(t: &[Q], i: usize, p: usize, x: &Q, closed: usize) -> Q {
    if p == 1 {
        let inside = if x == &t[closed + 1] {
            i == closed
        } else {
            &t[i] <= x && x < &t[i + 1]
        };
        return if inside { Q::one() } else { Q::zero() };
    }
    let left = (x - &t[i]) / (&t[i + p - 1] - &t[i]) * cox_de_boor(t, i, p - 1, x, closed);
    let right = (&t[i + p] - x) / (&t[i + p] - &t[i + 1]) * cox_de_boor(t, i + 1, p - 1, x, closed);
    left + right
}

/// Values of the `G + k` order-`k` B-splines `B_1..=B_{G+k}` at `x` in
/// `[a, b]` (`B_0` vanishes on the domain and is left out).
pub fn bspline(k: usize, g: usize, a: &Q, b: &Q, x: &Q) -> Vec<Q> {
    let t = knots(k, g, a, b);
    let closed = k + g - 1;
    (1..=g + k).map(|i| cox_de_boor(&t, i, k, x, closed)).collect()
}

/// Derivatives of the same functions, from the order-lowering identity.
pub fn bspline_derivative(k: usize, g: usize, a: &Q, b: &Q, x: &Q) -> Vec<Q> {
    let t = knots(k, g, a, b);
    let closed = k + g - 1;
    (1..=g + k)
        .map(|i| {
            if k == 1 {
                return Q::zero();
            }
            let scale = Q::from_integer(BigInt::from(k as i64 - 1));
            let lo = cox_de_boor(&t, i, k - 1, x, closed) / (&t[i + k - 1] - &t[i]);
            let hi = cox_de_boor(&t, i + 1, k - 1, x, closed) / (&t[i + k] - &t[i + 1]);
            scale * (lo - hi)
        })
        .collect()
}

/// Pairwise AUC: the share of positive/negative pairs ranked correctly,
/// ties counting one half.
pub fn auc(y: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..y.len() {
        if y[i] != 1 {
            continue;
        }
        for j in 0..y.len() {
            if y[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Average ranks (1-based) of `values`.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| {
            let below = values.iter().filter(|w| *w < v).count() as f64;
            let equal = values.iter().filter(|w| *w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Exact two-sided Wilcoxon signed-rank p by enumerating all sign
/// assignments of the nonzero differences.
pub fn wilcoxon_p(differences: &[f64]) -> f64 {
    let d: Vec<f64> = differences.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    assert!((1..=20).contains(&n), "enumeration needs 1..=20 nonzero differences");
    let ranks = average_ranks(&d.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let observed = w_plus.min(total - w_plus);
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let wp: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if wp.min(total - wp) <= observed + 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Central finite differences of `f` at `params`.
pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, params: &[f64], h: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `||a - b|| / (||a|| + ||b||)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()) + norm(&mut b.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// One oracle comparison.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub case: String,
    pub reference: f64,
    pub candidate: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn new(case: impl Into<String>, reference: f64, candidate: f64, tolerance: f64) -> Self {
        OracleReport {
            case: case.into(),
            reference,
            candidate,
            discrepancy: (reference - candidate).abs(),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

/// Exact `|x - y|` for a rational reference and a float candidate.
pub fn exact_gap(reference: &Q, candidate: f64) -> f64 {
    to_f64(&(reference - exact(candidate)).abs())
}
