mod oracle;

use oracle::*;
use num::{One, Zero};

#[test]
fn oracle_self_checks() {
    // quadratic: gradient of sum c_i x_i^2 is 2 c_i x_i
    let g = gradient(|p| p[0] * p[0] + 3.0 * p[1] * p[1], &[1.5, -2.0], 1e-5);
    assert!((g[0] - 3.0).abs() < 1e-8 && (g[1] + 12.0).abs() < 1e-8);
    // order 1: indicators
    let v = bspline(1, 3, &q(0, 1), &q(1, 1), &q(1, 2));
    assert_eq!(v, vec![Q::zero(), Q::one(), Q::zero(), Q::zero()]);
    // partition of unity in exact arithmetic
    for k in 1..=4 {
        let s: Q = bspline(k, 5, &q(0, 1), &q(1, 1), &q(1, 3)).into_iter().sum();
        assert_eq!(s, Q::one());
    }
    assert_eq!(auc(&[1, 0], &[0.3, 0.3]), 0.5);
    assert_eq!(wilcoxon_p(&[0.4]), 1.0);
    assert_eq!(wilcoxon_p(&[1.0; 10]), 2.0 / 1024.0);
}
