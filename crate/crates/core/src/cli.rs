//! Command-line front end. [`run`] takes the arguments and output streams
//! explicitly so that it can be driven from tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    estimate_order_known_root, estimate_order_successive, render_table, OrderEstimate, TableFormat,
};
use crate::corpus::{builtin, BUILTIN_NAMES};
use crate::error::Error;
use crate::expr::{parse_problem, Problem};
use crate::numerics::Precision;
use crate::solver::{solve, IterationTrace, SolveConfig, Status};

/// Exit code for a converged solve or a passing order check.
pub const EXIT_OK: i32 = 0;
/// Usage, parse and I/O errors.
pub const EXIT_USAGE: i32 = 1;
/// Divergence, iteration cap, or an order check outside tolerance.
pub const EXIT_NOT_CONVERGED: i32 = 2;
/// Singular Jacobian at some iterate.
pub const EXIT_SINGULAR: i32 = 3;

/// Distance from the nominal order accepted by `order-check`.
pub const ORDER_TOLERANCE: f64 = 0.2;

#[derive(Parser, Debug)]
#[command(
    name = "invseries",
    version,
    about = "Arbitrary-order inverse-series root finding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and print the iteration trace.
    Solve(SolveArgs),
    /// Reproduce the order 2-5 tables for the two-variable test system.
    Tables(TablesArgs),
    /// Measure the convergence order for a list of scheme orders.
    OrderCheck(OrderCheckArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Problem file.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Built-in problem name.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Scheme order k (convergence order of the iteration).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    order: u64,
    /// Working precision in decimal digits.
    #[arg(long, default_value_t = Precision::DEFAULT_DIGITS)]
    precision: u32,
    #[arg(long, default_value_t = SolveConfig::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Step-norm tolerance as a decimal; defaults to 10^(50 - precision).
    #[arg(long)]
    tol: Option<String>,
    #[arg(long, default_value = "markdown")]
    format: TableFormat,
    /// Significant digits shown for solution components.
    #[arg(long, default_value_t = 50)]
    digits: usize,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long, default_value_t = Precision::DEFAULT_DIGITS)]
    precision: u32,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 50)]
    digits: usize,
}

#[derive(Args, Debug)]
struct OrderCheckArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated scheme orders.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    orders: Vec<usize>,
    #[arg(long, default_value_t = Precision::DEFAULT_DIGITS)]
    precision: u32,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output error: {0}")]
    Output(#[from] std::io::Error),
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Tables(a) => cmd_tables(&a, out),
        Command::OrderCheck(a) => cmd_order_check(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(source: &Source, prec: Precision) -> Result<(String, Problem), CliError> {
    match (&source.problem, &source.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
                path: path.clone(),
                source: e,
            })?;
            Ok((path.display().to_string(), parse_problem(&text, prec)?))
        }
        (None, Some(name)) => Ok((name.clone(), builtin(name, prec)?)),
        (None, None) => Err(Error::InvalidConfig(format!(
            "one of --problem or --builtin is required (builtins: {})",
            BUILTIN_NAMES.join(", ")
        ))
        .into()),
    }
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIters | Status::Diverged => EXIT_NOT_CONVERGED,
        Status::SingularJacobian => EXIT_SINGULAR,
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let prec = Precision::new(a.precision)?;
    let (_, problem) = load(&a.source, prec)?;
    let mut config = SolveConfig::new(a.order as usize, prec)?;
    config.max_iters = a.max_iters;
    if let Some(tol) = &a.tol {
        config.tol = prec.parse(tol)?;
    }
    let trace = solve(&problem, &config)?;
    out.write_all(render_table(&trace, a.digits, a.format).as_bytes())?;
    let summary = format!(
        "status: {} after {} iterations",
        trace.status.as_str(),
        trace.iterations()
    );
    if a.format == TableFormat::Markdown {
        writeln!(out, "\n{summary}")?;
    } else {
        writeln!(err, "{summary}")?;
    }
    Ok(exit_code(trace.status))
}

/// File name used by `tables` for order `k`.
pub fn table_file_name(k: usize) -> String {
    format!("table-order-{k}.md")
}

fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let prec = Precision::new(a.precision)?;
    let problem = builtin("incas-2var", prec)?;
    let traces = solve_orders(&problem, &[2, 3, 4, 5], prec);
    let mut code = EXIT_OK;
    for (k, trace) in [2usize, 3, 4, 5].into_iter().zip(traces) {
        let trace = trace?;
        let body = format!(
            "# Order {k}\n\nStart (4, 4), {} digits, status {}.\n\n{}",
            prec.digits(),
            trace.status.as_str(),
            render_table(&trace, a.digits, TableFormat::Markdown)
        );
        let path = a.out_dir.join(table_file_name(k));
        write_file(&path, &body)?;
        writeln!(out, "wrote {}", path.display())?;
        code = code.max(exit_code(trace.status));
    }
    Ok(code)
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Write {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Solves `problem` for each order on its own thread; results keep the order
/// of `orders`.
fn solve_orders(
    problem: &Problem,
    orders: &[usize],
    prec: Precision,
) -> Vec<Result<IterationTrace, Error>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = orders
            .iter()
            .map(|&k| scope.spawn(move || solve(problem, &SolveConfig::new(k, prec)?)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

fn describe(estimate: &Result<OrderEstimate, Error>) -> String {
    match estimate {
        Ok(e) => format!("{:.3}", e.summary),
        Err(Error::InsufficientData { .. }) => "n/a".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn cmd_order_check(a: &OrderCheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let prec = Precision::new(a.precision)?;
    let (name, problem) = load(&a.source, prec)?;
    for &k in &a.orders {
        crate::scheme::SchemeSpec::new(k)?;
    }
    let traces = solve_orders(&problem, &a.orders, prec);

    writeln!(out, "order check: {name}, {} digits", prec.digits())?;
    writeln!(
        out,
        "| order | status | iterations | known_root | successive | verdict |"
    )?;
    writeln!(out, "|---|---|---|---|---|---|")?;
    let mut notes = Vec::new();
    let mut all_ok = true;
    for (&k, trace) in a.orders.iter().zip(traces) {
        let trace = trace?;
        let known = match &trace.reference_root {
            Some(root) => estimate_order_known_root(&trace, root),
            None => Err(Error::MissingRoot),
        };
        let successive = estimate_order_successive(&trace);
        let within = |e: &Result<OrderEstimate, Error>| match e {
            Ok(e) => (e.summary - k as f64).abs() <= ORDER_TOLERANCE,
            Err(Error::InsufficientData { .. }) | Err(Error::MissingRoot) => true,
            Err(_) => false,
        };
        let converged = trace.status == Status::Converged;
        let ok = converged && within(&known) && within(&successive);
        all_ok &= ok;
        for (label, e) in [("known-root", &known), ("successive", &successive)] {
            match e {
                Err(Error::InsufficientData { usable, .. }) => notes.push(format!(
                    "order {k}: {label} estimator has insufficient data ({usable} usable iterates; converged in {} iterations)",
                    trace.iterations()
                )),
                Err(Error::MissingRoot) => notes.push(format!("order {k}: no known root, {label} estimator skipped")),
                _ => {}
            }
        }
        writeln!(
            out,
            "| {k} | {} | {} | {} | {} | {} |",
            trace.status.as_str(),
            trace.iterations(),
            describe(&known),
            describe(&successive),
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    for note in notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
