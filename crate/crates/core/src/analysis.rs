//! Empirical convergence order and table rendering for iteration traces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Problem;
use crate::numerics::{Rounding, Scalar, Vector};
use crate::scheme::{build_terms, jacobian_series, SchemeSpec};
use crate::solver::IterationTrace;

/// Upper edge of the usable window: `10^-2`.
const WINDOW_UPPER_LOG10: f64 = -2.0;
/// The lower edge sits this many digits above the precision floor.
const WINDOW_FLOOR_SLACK: f64 = 100.0;
/// Per-iteration estimates needed for a summary.
const MIN_ESTIMATES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EstimateMethod {
    KnownRoot,
    SuccessiveSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// `(n, p̂_n)`, where `n` is the iterate whose error/step closes the ratio.
    pub per_iteration: Vec<(usize, f64)>,
    /// Median of `per_iteration`.
    pub summary: f64,
    /// Trace rows whose magnitudes fell inside the usable window.
    pub window: Vec<usize>,
    pub method: EstimateMethod,
}

fn usable(log10: f64, digits: u32) -> bool {
    log10.is_finite()
        && log10 > -(digits as f64) + WINDOW_FLOOR_SLACK
        && log10 <= WINDOW_UPPER_LOG10
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn summarize(
    per_iteration: Vec<(usize, f64)>,
    window: Vec<usize>,
    method: EstimateMethod,
) -> Result<OrderEstimate> {
    if per_iteration.len() < MIN_ESTIMATES {
        return Err(Error::InsufficientData {
            usable: window.len(),
            required: MIN_ESTIMATES
                + if method == EstimateMethod::KnownRoot {
                    1
                } else {
                    2
                },
        });
    }
    let mut values: Vec<f64> = per_iteration.iter().map(|&(_, p)| p).collect();
    let summary = median(&mut values);
    Ok(OrderEstimate {
        per_iteration,
        summary,
        window,
        method,
    })
}

/// Order estimate from `log10` error magnitudes: `p̂_n = log e_n / log e_{n-1}`.
pub fn order_from_errors(log_errors: &[f64], digits: u32) -> Result<OrderEstimate> {
    let window: Vec<usize> = (0..log_errors.len())
        .filter(|&n| usable(log_errors[n], digits))
        .collect();
    let per_iteration = (1..log_errors.len())
        .filter(|&n| usable(log_errors[n - 1], digits) && usable(log_errors[n], digits))
        .map(|n| (n, log_errors[n] / log_errors[n - 1]))
        .collect();
    summarize(per_iteration, window, EstimateMethod::KnownRoot)
}

/// Order estimate from `log10` step norms:
/// `p̂_n = log(s_n / s_{n-1}) / log(s_{n-1} / s_{n-2})`.
///
/// `s_{n-1}` and `s_n` must lie in the usable window; `s_{n-2}` only serves as
/// the reference scale and must be larger than `s_{n-1}`.
pub fn order_from_steps(log_steps: &[f64], digits: u32) -> Result<OrderEstimate> {
    let window: Vec<usize> = (0..log_steps.len())
        .filter(|&n| usable(log_steps[n], digits))
        .collect();
    let per_iteration = (2..log_steps.len())
        .filter(|&n| {
            usable(log_steps[n - 1], digits)
                && usable(log_steps[n], digits)
                && log_steps[n - 2].is_finite()
                && log_steps[n - 2] > log_steps[n - 1]
        })
        .map(|n| {
            let num = log_steps[n] - log_steps[n - 1];
            let den = log_steps[n - 1] - log_steps[n - 2];
            (n, num / den)
        })
        .collect();
    summarize(per_iteration, window, EstimateMethod::SuccessiveSteps)
}

/// Order estimate from the errors against a known root.
pub fn estimate_order_known_root(trace: &IterationTrace, root: &Vector) -> Result<OrderEstimate> {
    let logs = trace
        .rows
        .iter()
        .map(|row| Ok(crate::numerics::norm_inf(&row.x.sub(root)?).log10_abs()))
        .collect::<Result<Vec<f64>>>()?;
    order_from_errors(&logs, trace.precision.digits())
}

/// Root-free order estimate from successive step norms. Row `n` of the trace
/// contributes `s_n = ‖x^n - x^{n-1}‖∞`.
pub fn estimate_order_successive(trace: &IterationTrace) -> Result<OrderEstimate> {
    let logs: Vec<f64> = trace
        .rows
        .iter()
        .map(|row| row.step_norm.as_ref().map_or(f64::NAN, Scalar::log10_abs))
        .collect();
    order_from_steps(&logs, trace.precision.digits())
}

/// Measured vs predicted asymptotic error constant for a one-variable
/// problem: `|δ_{n+1}| / |δ_n|^k` against `|a_k · f'(x̄)^k|`, where `a_k` is
/// the first inverse-series coefficient the order-k scheme drops.
///
/// The measurement uses the last `n` with both errors in the usable window.
/// If no such pair exists but the error fell from above the floor to below it
/// in one step (affine problems), the measurement is reported as zero.
pub fn error_constant_check(
    problem: &Problem,
    trace: &IterationTrace,
    spec: SchemeSpec,
) -> Result<(Scalar, Scalar)> {
    if problem.nvars() != 1 {
        return Err(Error::DimensionMismatch(
            "error constant check needs a one-variable problem".into(),
        ));
    }
    let root = trace.reference_root.as_ref().ok_or(Error::MissingRoot)?;
    let k = spec.order();
    let prec = trace.precision;
    let digits = prec.digits();

    let errors: Vec<Scalar> = trace
        .rows
        .iter()
        .map(|r| (&r.x[0] - &root[0]).abs())
        .collect();
    let logs: Vec<f64> = errors.iter().map(Scalar::log10_abs).collect();
    let floor = -(digits as f64) + WINDOW_FLOOR_SLACK;

    let full_pair = (1..errors.len())
        .rev()
        .find(|&n| usable(logs[n - 1], digits) && usable(logs[n], digits));
    let measured = match full_pair {
        Some(n) => &errors[n] / &errors[n - 1].powi(k as u32),
        None => {
            // log10 of an exact zero is -inf, which also counts as below the floor
            let exact_hit = (1..errors.len()).any(|n| logs[n - 1] > floor && logs[n] <= floor);
            if !exact_hit {
                return Err(Error::InsufficientData {
                    usable: logs.iter().filter(|&&l| usable(l, digits)).count(),
                    required: 2,
                });
            }
            prec.zero()
        }
    };

    // a_k from the order-(k+1) builder at the root; 1-D tensors have a single entry.
    let terms = build_terms(problem, root, SchemeSpec::new(k + 1)?)?;
    let a_k = &terms[k - 1].values()[0] / &prec.factorial(k);
    let slope = jacobian_series(problem, root, 0)?.constant_part()[(0, 0)].clone();
    let predicted = (&a_k * &slope.powi(k as u32)).abs();
    Ok((measured, predicted))
}

/// Output format of [`render_table`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(format!(
                "unknown format `{other}` (expected markdown, csv or json)"
            )),
        }
    }
}

/// Significant digits of the step, residual and error columns.
pub const DIFF_DIGITS: usize = 10;

#[derive(Serialize)]
struct JsonRow {
    iter: usize,
    solution: Vec<String>,
    step_norm: Option<String>,
    residual_norm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_vs_root: Option<String>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    order: usize,
    precision: u32,
    status: &'a str,
    variables: &'a [String],
    rows: Vec<JsonRow>,
}

/// Renders a trace. Columns: `iter`, one per solution component, `step_norm`,
/// `residual_norm`, and `error_vs_root` when the trace has a reference root.
/// Solution components get `sig_digits` significant digits, the other columns
/// ten; digits beyond that are truncated and trailing zeros dropped.
pub fn render_table(trace: &IterationTrace, sig_digits: usize, format: TableFormat) -> String {
    let with_error = trace.reference_root.is_some();
    let sci = |s: &Scalar, d: usize| s.to_sci(d, Rounding::Truncate);

    let mut header: Vec<String> = vec!["iter".into()];
    header.extend(trace.var_names.iter().cloned());
    header.push("step_norm".into());
    header.push("residual_norm".into());
    if with_error {
        header.push("error_vs_root".into());
    }

    let rows: Vec<JsonRow> = trace
        .rows
        .iter()
        .map(|row| JsonRow {
            iter: row.iter,
            solution: row.x.iter().map(|v| sci(v, sig_digits)).collect(),
            step_norm: row.step_norm.as_ref().map(|s| sci(s, DIFF_DIGITS)),
            residual_norm: sci(&row.residual, DIFF_DIGITS),
            error_vs_root: row.error_vs_root.as_ref().map(|e| sci(e, DIFF_DIGITS)),
        })
        .collect();

    let flat = |r: &JsonRow| -> Vec<String> {
        let mut cells = vec![r.iter.to_string()];
        cells.extend(r.solution.iter().cloned());
        cells.push(r.step_norm.clone().unwrap_or_else(|| "-".into()));
        cells.push(r.residual_norm.clone());
        if with_error {
            cells.push(r.error_vs_root.clone().unwrap_or_else(|| "-".into()));
        }
        cells
    };

    match format {
        TableFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!("| {} |\n", header.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for r in &rows {
                out.push_str(&format!("| {} |\n", flat(r).join(" | ")));
            }
            out
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory csv write");
            for r in &rows {
                w.write_record(flat(r)).expect("in-memory csv write");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
        }
        TableFormat::Json => {
            let table = JsonTable {
                order: trace.order,
                precision: trace.precision.digits(),
                status: trace.status.as_str(),
                variables: &trace.var_names,
                rows,
            };
            let mut s = serde_json::to_string_pretty(&table).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_errors() {
        let logs = [-2.0, -4.0, -8.0, -16.0];
        let est = order_from_errors(&logs, 1000).unwrap();
        assert_eq!(est.summary, 2.0);
        assert!(est.per_iteration.iter().all(|&(_, p)| p == 2.0));
        assert_eq!(est.method, EstimateMethod::KnownRoot);
    }

    #[test]
    fn quadratic_steps() {
        let logs = [f64::NAN, -1.0, -2.0, -4.0, -8.0];
        let est = order_from_steps(&logs, 1000).unwrap();
        assert_eq!(est.summary, 2.0);
        assert_eq!(est.per_iteration.len(), 2);
    }

    #[test]
    fn window_excludes_saturated_and_pre_asymptotic() {
        // the last two values sit below the 10^(-digits+100) floor
        let logs = [
            0.5,
            -1.0,
            -3.0,
            -9.0,
            -27.0,
            -81.0,
            -243.0,
            -260.0,
            f64::NEG_INFINITY,
        ];
        let est = order_from_errors(&logs, 300).unwrap();
        assert_eq!(est.window, vec![2, 3, 4, 5]);
        assert_eq!(est.summary, 3.0);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            order_from_errors(&[-3.0, -6.0], 1000),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            order_from_steps(&[f64::NAN, -1.0, -2.0, -4.0], 1000),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<TableFormat>().unwrap(), TableFormat::Csv);
        assert!("xml".parse::<TableFormat>().is_err());
    }
}
