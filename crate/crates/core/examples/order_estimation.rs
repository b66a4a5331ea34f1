//! Measure convergence orders from traces with both estimators, including
//! orders beyond five, and compare the asymptotic error constant with its
//! prediction.
//!
//! cargo run --example order_estimation

use invseries::analysis::{
    error_constant_check, estimate_order_known_root, estimate_order_successive,
};
use invseries::corpus::builtin;
use invseries::{solve, Precision, Rounding, SolveConfig};

fn main() -> invseries::Result<()> {
    let prec = Precision::new(1000)?;
    let problem = builtin("scalar-square", prec)?;
    println!(
        "{:>5} {:>6} {:>11} {:>11}  per-iteration (known root)",
        "order", "iters", "known-root", "successive"
    );
    for k in 2..=8 {
        let config = SolveConfig::new(k, prec)?;
        let trace = solve(&problem, &config)?;
        let root = trace
            .reference_root
            .clone()
            .expect("builtin lists its roots");
        let known = estimate_order_known_root(&trace, &root)?;
        let successive = estimate_order_successive(&trace)
            .map(|e| format!("{:.3}", e.summary))
            .unwrap_or_else(|_| "n/a".into());
        let per: Vec<String> = known
            .per_iteration
            .iter()
            .map(|(n, p)| format!("{n}:{p:.3}"))
            .collect();
        println!(
            "{k:>5} {:>6} {:>11.3} {:>11}  {}",
            trace.iterations(),
            known.summary,
            successive,
            per.join(" ")
        );
        if k <= 3 {
            let (measured, predicted) = error_constant_check(&problem, &trace, config.spec)?;
            println!(
                "      error constant: measured {}, predicted {}",
                measured.to_sci(8, Rounding::Nearest),
                predicted.to_sci(8, Rounding::Nearest)
            );
        }
    }
    Ok(())
}
