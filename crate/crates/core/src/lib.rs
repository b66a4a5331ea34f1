//! Root finding for square nonlinear systems with iteration schemes of any
//! convergence order.
//!
//! An order-k step expands the local inverse of `F` around the current point
//! and evaluates the truncated series at `F = 0`:
//!
//! ```text
//! x+ = x + sum_{p=1}^{k-1} (1/p!) A^p (-F(x))^{⊗p}
//! ```
//!
//! The tensors `A^p` are derivatives of the inverse Jacobian, obtained with
//! truncated multivariate Taylor arithmetic. Order 2 is Newton's method.
//! Everything runs in arbitrary precision (1000 decimal digits by default).
//!
//! ```
//! use invseries::{corpus, solve, Precision, SolveConfig, Status};
//!
//! let prec = Precision::new(200).unwrap();
//! let problem = corpus::builtin("incas-2var", prec).unwrap();
//! let trace = solve(&problem, &SolveConfig::new(3, prec).unwrap()).unwrap();
//! assert_eq!(trace.status, Status::Converged);
//! assert_eq!(trace.rows[1].x[0].to_sci(20, invseries::Rounding::Nearest), "1.685546875e0");
//! ```

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod numerics;
pub mod scheme;
pub mod solver;
pub mod taylor;

pub use analysis::{
    error_constant_check, estimate_order_known_root, estimate_order_successive, render_table,
    OrderEstimate, TableFormat,
};
pub use error::{Error, Result};
pub use expr::{parse_problem, Expr, Problem};
pub use numerics::{lu_invert, lu_solve, Matrix, Precision, Rounding, Scalar, Vector};
pub use scheme::{apply_update, build_terms, SchemeSpec, SchemeTerm};
pub use solver::{iterate_once, solve, IterationTrace, SolveConfig, Status, TraceRow};
pub use taylor::{Elementary, MultiIndex, TaylorPoly};
