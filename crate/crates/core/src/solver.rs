//! Fixed-point driver: rebuild the scheme at every iterate, apply it, and
//! record what happened.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Problem;
use crate::numerics::{norm_inf, Precision, Scalar, Vector};
use crate::scheme::{apply_update, build_terms, SchemeSpec};

/// Loop controls for [`solve`].
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub spec: SchemeSpec,
    pub precision: Precision,
    pub max_iters: usize,
    /// Threshold on `‖x^{n+1} - x^n‖∞`.
    pub tol: Scalar,
    /// Consecutive step-norm increases that count as divergence.
    pub divergence_window: usize,
}

impl SolveConfig {
    pub const DEFAULT_MAX_ITERS: usize = 30;
    pub const DEFAULT_DIVERGENCE_WINDOW: usize = 3;

    /// Defaults: 30 iterations, `tol = 10^(-digits + 50)`, window 3.
    pub fn new(order: usize, precision: Precision) -> Result<Self> {
        Ok(Self {
            spec: SchemeSpec::new(order)?,
            precision,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: precision.epsilon_with_slack(50),
            divergence_window: Self::DEFAULT_DIVERGENCE_WINDOW,
        })
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.tol.is_zero() || self.tol.is_negative() {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.divergence_window == 0 {
            return Err(Error::InvalidConfig(
                "divergence window must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
    SingularJacobian,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::Diverged => "diverged",
            Status::SingularJacobian => "singular-jacobian",
        }
    }
}

/// One iterate.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iter: usize,
    pub x: Vector,
    /// `x^n - x^{n-1}`; absent for the start point.
    pub step: Option<Vector>,
    pub step_norm: Option<Scalar>,
    /// `‖F(x^n)‖∞`.
    pub residual: Scalar,
    /// `‖x^n - root‖∞` against the trace's reference root.
    pub error_vs_root: Option<Scalar>,
}

#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub order: usize,
    pub precision: Precision,
    pub var_names: Vec<String>,
    pub rows: Vec<TraceRow>,
    pub status: Status,
    /// Known root closest to the last iterate, if the problem lists any.
    pub reference_root: Option<Vector>,
}

impl IterationTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace always holds the start row")
    }

    /// Number of iterations performed (rows after the start point).
    pub fn iterations(&self) -> usize {
        self.rows.len() - 1
    }

    /// Attaches `root` as the reference root and fills in errors.
    pub fn with_reference_root(mut self, root: Vector) -> Result<Self> {
        for row in &mut self.rows {
            row.error_vs_root = Some(norm_inf(&row.x.sub(&root)?));
        }
        self.reference_root = Some(root);
        Ok(self)
    }
}

/// One application of the order-`spec` update at `point`.
pub fn iterate_once(problem: &Problem, point: &Vector, spec: SchemeSpec) -> Result<Vector> {
    let terms = build_terms(problem, point, spec)?;
    let f = problem.residual(point)?;
    apply_update(&terms, &f, point)
}

/// Residuals below `10^(-digits + 15)` count as exact.
const RESIDUAL_FLOOR_SLACK: i64 = 15;

fn at_iterate(iteration: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Evaluation {
        iteration,
        source: Box::new(e),
    }
}

/// Iterates the order-k scheme from the problem's start point.
///
/// Stops when the step norm drops to `tol`, or when it is already in the
/// asymptotic regime (below `1e-3` and shrinking) and `step^k <= tol`, which
/// means the next step would be below `tol` as well. An iterate whose
/// residual is at the precision floor also stops the loop, since every later
/// step would be rounding noise. The start point is always iterated at least
/// once so that a singular Jacobian there is reported.
pub fn solve(problem: &Problem, config: &SolveConfig) -> Result<IterationTrace> {
    config.validate()?;
    if problem.precision() != config.precision {
        return Err(Error::PrecisionMismatch {
            problem: problem.precision().digits(),
            config: config.precision.digits(),
        });
    }
    let k = config.order() as u32;
    let asymptotic = config.precision.pow10(-3);
    let residual_floor = config.precision.epsilon_with_slack(RESIDUAL_FLOOR_SLACK);

    let mut x = problem.start().clone();
    let mut fx = problem.residual(&x).map_err(at_iterate(0))?;
    let mut rows = vec![TraceRow {
        iter: 0,
        x: x.clone(),
        step: None,
        step_norm: None,
        residual: norm_inf(&fx),
        error_vs_root: None,
    }];

    let mut status = Status::MaxIters;
    let mut first_step: Option<Scalar> = None;
    let mut prev_step: Option<Scalar> = None;
    let mut increases = 0usize;

    for iter in 1..=config.max_iters {
        let terms = match build_terms(problem, &x, config.spec) {
            Ok(t) => t,
            Err(Error::SingularMatrix { .. }) => {
                status = Status::SingularJacobian;
                break;
            }
            Err(e) => return Err(at_iterate(iter - 1)(e)),
        };
        let next = apply_update(&terms, &fx, &x)?;
        let step = next.sub(&x)?;
        let s = norm_inf(&step);
        fx = problem.residual(&next).map_err(at_iterate(iter))?;
        x = next;
        rows.push(TraceRow {
            iter,
            x: x.clone(),
            step: Some(step),
            step_norm: Some(s.clone()),
            residual: norm_inf(&fx),
            error_vs_root: None,
        });

        let shrinking = prev_step.as_ref().is_some_and(|p| &s < p);
        let at_floor = rows[iter].residual <= residual_floor;
        if at_floor || s <= config.tol || (shrinking && s < asymptotic && s.powi(k) <= config.tol) {
            status = Status::Converged;
            break;
        }

        if prev_step.as_ref().is_some_and(|p| &s > p) {
            increases += 1;
        } else {
            increases = 0;
        }
        let first = first_step.get_or_insert_with(|| s.clone());
        if increases >= config.divergence_window && &s > first {
            status = Status::Diverged;
            break;
        }
        prev_step = Some(s);
    }

    let trace = IterationTrace {
        order: config.order(),
        precision: config.precision,
        var_names: problem.var_names().to_vec(),
        rows,
        status,
        reference_root: None,
    };
    match nearest_root(problem, &trace.last().x)? {
        Some(root) => trace.with_reference_root(root),
        None => Ok(trace),
    }
}

fn nearest_root(problem: &Problem, x: &Vector) -> Result<Option<Vector>> {
    let mut best: Option<(Scalar, &Vector)> = None;
    for root in problem.known_roots() {
        let d = norm_inf(&x.sub(root)?);
        if best.as_ref().is_none_or(|(bd, _)| &d < bd) {
            best = Some((d, root));
        }
    }
    Ok(best.map(|(_, r)| r.clone()))
}
