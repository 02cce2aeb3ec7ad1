//! Uniform-grid B-splines.
//!
//! A [`KnotVector`] of order `k` (polynomial degree `k - 1`) over `G` equal
//! intervals on `[a, b]` stores `G + 2k + 1` knots running from `a - k*h` to
//! `b + k*h`. Cox-de Boor over those knots yields `G + k + 1` order-`k`
//! B-splines; the first one is supported on `[a - k*h, a)` and vanishes on
//! the domain, so the basis exposed here is the remaining `G + k`.
//!
//! Intervals are half-open except the last interior one, which is closed so
//! that `x = b` is covered. Consequently the top basis function is zero on
//! `[a, b]` as well; it is kept so that the coefficient count is `G + k`.
//! On `[a, b]` the basis is non-negative, sums to one and has at most `k`
//! nonzero entries.

use crate::error::{Error, Result};

/// Largest supported spline order.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    order: usize,
    intervals: usize,
    domain: (f64, f64),
    knots: Vec<f64>,
}

/// Dense basis evaluation at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

/// The (at most `k`) nonzero basis functions at one point.
///
/// Entry `r` of `values`/`derivatives` belongs to basis index `start + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveBasis {
    pub start: usize,
    pub len: usize,
    pub values: [f64; MAX_ORDER],
    pub derivatives: [f64; MAX_ORDER],
}

impl Default for ActiveBasis {
    fn default() -> Self {
        ActiveBasis {
            start: 0,
            len: 0,
            values: [0.0; MAX_ORDER],
            derivatives: [0.0; MAX_ORDER],
        }
    }
}

impl ActiveBasis {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.len]
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivatives[..self.len]
    }
}

/// Builds the uniformly extended knot vector. See [`KnotVector::new`].
pub fn make_knots(order: usize, intervals: usize, domain: (f64, f64)) -> Result<KnotVector> {
    KnotVector::new(order, intervals, domain)
}

impl KnotVector {
    pub fn new(order: usize, intervals: usize, domain: (f64, f64)) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!(
                "spline domain [{a}, {b}] must be finite with a < b"
            )));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(Error::Domain(format!(
                "spline order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        if intervals == 0 {
            return Err(Error::Domain("grid needs at least one interval".into()));
        }
        let width = b - a;
        let knots = (0..intervals + 2 * order + 1)
            .map(|i| a + width * (i as f64 - order as f64) / intervals as f64)
            .collect();
        Ok(KnotVector {
            order,
            intervals,
            domain,
            knots,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_count(&self) -> usize {
        self.intervals + self.order
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.domain.0, self.domain.1)
    }

    /// Index `j` of the knot interval used for `x`, with `t[j] <= x < t[j+1]`
    /// except at `x = b`, which maps to the last interior interval.
    fn span(&self, x: f64) -> usize {
        let lo = self.order;
        let hi = self.order + self.intervals - 1;
        let h = (self.domain.1 - self.domain.0) / self.intervals as f64;
        let guess = ((x - self.knots[0]) / h).floor();
        let mut j = if guess.is_nan() {
            lo
        } else {
            (guess.max(0.0) as usize).clamp(lo, hi)
        };
        // the guess can be off by one when x sits on a knot
        while j > lo && x < self.knots[j] {
            j -= 1;
        }
        while j < hi && x >= self.knots[j + 1] {
            j += 1;
        }
        j
    }

    /// Nonzero basis values and derivatives at `x`, which is clamped to the domain.
    pub fn eval_active(&self, x: f64) -> ActiveBasis {
        let x = self.clamp(x);
        let k = self.order;
        let degree = k - 1;
        let t = &self.knots;
        let j = self.span(x);

        // Triangular Cox-de Boor: n[s] holds B_{j-r+s, r+1} after round r.
        let mut n = [0.0; MAX_ORDER];
        let mut left = [0.0; MAX_ORDER];
        let mut right = [0.0; MAX_ORDER];
        let mut lower = [0.0; MAX_ORDER];
        n[0] = 1.0;
        for r in 1..=degree {
            if r == degree {
                lower[..r].copy_from_slice(&n[..r]);
            }
            left[r] = x - t[j + 1 - r];
            right[r] = t[j + r] - x;
            let mut saved = 0.0;
            for s in 0..r {
                let temp = n[s] / (right[s + 1] + left[r - s]);
                n[s] = saved + right[s + 1] * temp;
                saved = left[r - s] * temp;
            }
            n[r] = saved;
        }

        let mut out = ActiveBasis {
            // Cox-de Boor index j - degree >= 1 on the domain; shift past the dropped B_0.
            start: j - degree - 1,
            len: k,
            ..ActiveBasis::default()
        };
        out.values[..k].copy_from_slice(&n[..k]);
        if degree > 0 {
            // lower[s] = B_{j-degree+1+s, k-1}, s in 0..degree
            let scale = degree as f64;
            for s in 0..k {
                let m = j - degree + s;
                let below = if s >= 1 { lower[s - 1] } else { 0.0 };
                let above = if s < degree { lower[s] } else { 0.0 };
                let d_lo = t[m + k - 1] - t[m];
                let d_hi = t[m + k] - t[m + 1];
                out.derivatives[s] = scale * (below / d_lo - above / d_hi);
            }
        }
        out
    }

    /// Dense values and derivatives of all `G + k` basis functions at `x`.
    pub fn eval_basis(&self, x: f64) -> BasisEval {
        let active = self.eval_active(x);
        let mut values = vec![0.0; self.basis_count()];
        let mut derivatives = vec![0.0; self.basis_count()];
        for r in 0..active.len {
            values[active.start + r] = active.values[r];
            derivatives[active.start + r] = active.derivatives[r];
        }
        BasisEval {
            values,
            derivatives,
        }
    }

    /// Spline value and its derivative in `x` for the given coefficients.
    pub fn eval_spline(&self, coefficients: &[f64], x: f64) -> Result<(f64, f64)> {
        if coefficients.len() != self.basis_count() {
            return Err(Error::Shape(format!(
                "spline needs {} coefficients, got {}",
                self.basis_count(),
                coefficients.len()
            )));
        }
        let active = self.eval_active(x);
        Ok(combine(&active, coefficients))
    }

    /// Greville abscissae of the basis: coefficients that reproduce `f(x) = x`
    /// on the domain for order >= 2. For order 1 these are interval midpoints.
    pub fn greville_abscissae(&self) -> Vec<f64> {
        let k = self.order;
        (1..=self.basis_count())
            .map(|m| {
                if k == 1 {
                    0.5 * (self.knots[m] + self.knots[m + 1])
                } else {
                    self.knots[m + 1..m + k].iter().sum::<f64>() / (k - 1) as f64
                }
            })
            .collect()
    }
}

/// `(sum c_m B_m, sum c_m B'_m)` over the active window.
#[inline]
pub fn combine(active: &ActiveBasis, coefficients: &[f64]) -> (f64, f64) {
    let c = &coefficients[active.start..active.start + active.len];
    let mut value = 0.0;
    let mut slope = 0.0;
    for r in 0..active.len {
        value += c[r] * active.values[r];
        slope += c[r] * active.derivatives[r];
    }
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_grid_on_unit_interval() {
        let kv = make_knots(3, 5, (0.0, 1.0)).unwrap();
        assert_eq!(kv.knots().len(), 12);
        assert_eq!(kv.basis_count(), 8);
        for (i, t) in kv.knots().iter().enumerate() {
            assert_relative_eq!(*t, -0.6 + 0.2 * i as f64, epsilon = 1e-15);
        }
        assert_eq!(kv.knots()[3], 0.0);
        assert_eq!(kv.knots()[8], 1.0);
    }

    #[test]
    fn smallest_grid() {
        let kv = make_knots(1, 1, (0.0, 1.0)).unwrap();
        assert_eq!(kv.knots(), &[-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(kv.basis_count(), 2);
    }

    #[test]
    fn table_grid_order_two() {
        assert_eq!(make_knots(2, 5, (0.0, 1.0)).unwrap().basis_count(), 7);
    }

    #[test]
    fn rejects_bad_domain_and_sizes() {
        assert!(matches!(make_knots(3, 5, (1.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(make_knots(3, 5, (2.0, 1.0)), Err(Error::Domain(_))));
        assert!(make_knots(0, 5, (0.0, 1.0)).is_err());
        assert!(make_knots(3, 0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn order_one_is_an_indicator() {
        let kv = make_knots(1, 4, (0.0, 1.0)).unwrap();
        for (x, expect) in [(0.0, 0), (0.1, 0), (0.25, 1), (0.6, 2), (0.99, 3), (1.0, 3)] {
            let e = kv.eval_basis(x);
            for (m, v) in e.values.iter().enumerate() {
                assert_eq!(*v, if m == expect { 1.0 } else { 0.0 }, "x={x} m={m}");
            }
            assert!(e.derivatives.iter().all(|d| *d == 0.0));
        }
    }

    #[test]
    fn linear_basis_is_hat_shaped() {
        let kv = make_knots(2, 2, (0.0, 1.0)).unwrap();
        let e = kv.eval_basis(0.25);
        // hats peaked at 0, 0.5 sharing the interval [0, 0.5)
        assert_relative_eq!(e.values[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.values[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.derivatives[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(e.derivatives[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_coefficients_reproduce_constant() {
        let kv = make_knots(3, 5, (0.0, 1.0)).unwrap();
        let c = vec![2.5; kv.basis_count()];
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let (v, d) = kv.eval_spline(&c, x).unwrap();
            assert_relative_eq!(v, 2.5, epsilon = 1e-12);
            assert!(d.abs() < 1e-10);
        }
        let zeros = vec![0.0; kv.basis_count()];
        assert_eq!(kv.eval_spline(&zeros, 0.4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn coefficient_length_is_checked() {
        let kv = make_knots(3, 5, (0.0, 1.0)).unwrap();
        assert!(matches!(kv.eval_spline(&[1.0; 7], 0.5), Err(Error::Shape(_))));
    }

    #[test]
    fn greville_coefficients_reproduce_identity() {
        for k in 2..=4 {
            let kv = make_knots(k, 5, (0.0, 1.0)).unwrap();
            let c = kv.greville_abscissae();
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                let (v, d) = kv.eval_spline(&c, x).unwrap();
                assert_relative_eq!(v, x, epsilon = 1e-12);
                assert_relative_eq!(d, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn values_on_knots_are_non_negative() {
        let kv = make_knots(3, 5, (0.0, 1.0)).unwrap();
        for &t in kv.knots() {
            let e = kv.eval_basis(t);
            assert!(e.values.iter().all(|v| *v >= 0.0));
            assert!((e.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
