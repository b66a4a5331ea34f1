//! Truncated multivariate Taylor arithmetic: build jets for two variables,
//! combine them, and read off derivatives.
//!
//! cargo run --example taylor_jets

use invseries::taylor::{Elementary, TaylorPoly};
use invseries::{Expr, Precision, Rounding, Vector};

fn main() -> invseries::Result<()> {
    let prec = Precision::new(40)?;
    let degree = 3;

    // x = 1 + h1, y = 2 + h2
    let x = TaylorPoly::variable(0, prec.one(), 2, degree)?;
    let y = TaylorPoly::variable(1, prec.from_i64(2), 2, degree)?;

    // f = exp(x·y) expanded at (1, 2)
    let f = x.mul(&y)?.compose(Elementary::Exp)?;
    println!("exp(x*y) around (1, 2), coefficients ∂^α f / α!:");
    for (alpha, c) in f.terms() {
        println!(
            "  {:?}  {}",
            alpha.exponents(),
            c.to_sci(15, Rounding::Nearest)
        );
    }

    // Second derivative tensor, i.e. the Hessian
    let hessian = f.derivative_tensor(2)?;
    println!(
        "d2f/dxdy = {}",
        hessian.get(&[0, 1]).to_sci(15, Rounding::Nearest)
    );

    // Expressions produce the same jets
    let vars = vec!["x".to_string(), "y".to_string()];
    let expr = Expr::parse("exp(x*y)", &vars, prec)?;
    let point = Vector::from_decimals(&["1", "2"], prec)?;
    let from_expr = expr.eval_jet(&point, degree)?;
    println!("expression jet matches: {}", from_expr == f);

    // sqrt(16 + h) = 4 + h/8 - h^2/512 + ...
    let h = TaylorPoly::variable(0, prec.from_i64(16), 1, 4)?;
    let root = h.compose(Elementary::Sqrt)?;
    let coeffs: Vec<String> = root
        .coefficients()
        .iter()
        .map(|c| c.to_sci(12, Rounding::Nearest))
        .collect();
    println!("sqrt(16 + h): {}", coeffs.join(", "));
    Ok(())
}
