//! Solve the circle/line test system with orders 2 through 5 and print the
//! iteration counts and the first few step norms.
//!
//! cargo run --example solve_test_system

use invseries::corpus::builtin;
use invseries::{solve, Precision, Rounding, SolveConfig};

fn main() -> invseries::Result<()> {
    let prec = Precision::new(1000)?;
    let problem = builtin("incas-2var", prec)?;
    for k in 2..=5 {
        let trace = solve(&problem, &SolveConfig::new(k, prec)?)?;
        let steps: Vec<String> = trace.rows[1..]
            .iter()
            .take(5)
            .map(|r| r.step_norm.as_ref().unwrap().to_sci(10, Rounding::Truncate))
            .collect();
        println!(
            "order {k}: {} after {} iterations; x1 = {}; steps {}",
            trace.status.as_str(),
            trace.iterations(),
            trace.rows[1].x[0].to_sci(30, Rounding::Truncate),
            steps.join(", ")
        );
    }
    Ok(())
}
