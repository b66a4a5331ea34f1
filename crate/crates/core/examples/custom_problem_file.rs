//! Load a system from the text format, solve it, and print the trace as CSV.
//!
//! cargo run --example custom_problem_file -- [path] [order]
//!
//! Without arguments it uses `problems/transcendental.txt` at order 4.

use invseries::analysis::{render_table, TableFormat};
use invseries::{parse_problem, solve, Precision, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/problems/transcendental.txt").to_string()
    });
    let order: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let prec = Precision::new(120)?;
    let problem = parse_problem(&std::fs::read_to_string(&path)?, prec)?;
    println!("# {path}");
    print!(
        "{}",
        problem
            .to_file_string()
            .lines()
            .filter(|l| l.starts_with("eq"))
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();

    let trace = solve(&problem, &SolveConfig::new(order, prec)?)?;
    print!("{}", render_table(&trace, 25, TableFormat::Csv));
    println!(
        "# {} after {} iterations",
        trace.status.as_str(),
        trace.iterations()
    );
    Ok(())
}
