//! The scheme tensors are derivatives of the local inverse. For f(x) = x^2 - 1
//! expanded at x = 4 the inverse is sqrt(1 + f) around f = 15, whose Taylor
//! coefficients have the closed form binom(1/2, p) · 4 / 16^p.
//!
//! cargo run --example inverse_coefficients

use invseries::corpus::builtin;
use invseries::scheme::{build_terms, SchemeSpec};
use invseries::{Precision, Rounding};

fn main() -> invseries::Result<()> {
    let prec = Precision::new(100)?;
    let problem = builtin("scalar-square", prec)?;
    let terms = build_terms(&problem, problem.start(), SchemeSpec::new(8)?)?;

    println!("{:>2}  {:>26}  {:>26}", "p", "scheme a_p", "closed form");
    let mut binom = prec.one();
    let half = prec.parse("0.5")?;
    for (idx, term) in terms.iter().enumerate() {
        let p = idx + 1;
        binom = &binom * &(&(&half - &prec.from_i64(idx as i64)) / &prec.from_i64(p as i64));
        let closed = &(&binom * &prec.from_i64(4)) / &prec.from_i64(16).powi(p as u32);
        let a_p = &term.values()[0] / &prec.factorial(p);
        println!(
            "{p:>2}  {:>26}  {:>26}",
            a_p.to_sci(20, Rounding::Nearest),
            closed.to_sci(20, Rounding::Nearest)
        );
    }

    // two variables: the order-2 tensor of the circle/line system at (4, 4)
    let problem = builtin("incas-2var", prec)?;
    let terms = build_terms(&problem, problem.start(), SchemeSpec::new(3)?)?;
    println!("A^1 = J^-1 at (4, 4):");
    for i in 0..2 {
        let row: Vec<String> = (0..2)
            .map(|j| terms[0].value(&[i, j]).to_sci(8, Rounding::Nearest))
            .collect();
        println!("  [{}]", row.join(", "));
    }
    println!("A^2[i, j1, j2]:");
    for i in 0..2 {
        for j1 in 0..2 {
            let row: Vec<String> = (0..2)
                .map(|j2| terms[1].value(&[i, j1, j2]).to_sci(8, Rounding::Nearest))
                .collect();
            println!("  i={i} j1={j1}: [{}]", row.join(", "));
        }
    }
    Ok(())
}
