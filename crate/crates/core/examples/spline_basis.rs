//! Prints the B-spline basis and a fitted spline on [0, 1].

use kan_imbalance::spline::KnotVector;

fn main() -> kan_imbalance::Result<()> {
    let kv = KnotVector::new(3, 5, (0.0, 1.0))?;
    println!("order {} / {} intervals / {} basis functions", kv.order(), kv.intervals(), kv.basis_count());
    println!("knots: {:?}", kv.knots());

    for x in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
        let b = kv.eval_basis(x);
        let row: Vec<String> = b.values.iter().map(|v| format!("{v:.4}")).collect();
        println!("x={x:<5} sum={:.15} [{}]", b.values.iter().sum::<f64>(), row.join(" "));
    }

    // coefficients at the Greville abscissae reproduce a straight line
    let coefficients = kv.greville_abscissae();
    for x in [0.0, 0.3, 0.7, 1.0, 1.5] {
        let (s, ds) = kv.eval_spline(&coefficients, x)?;
        println!("s({x}) = {s:.6}, s'({x}) = {ds:.6}");
    }
    Ok(())
}
