//! Built-in problems.

use crate::error::{Error, Result};
use crate::expr::{parse_problem, Problem};
use crate::numerics::{Precision, Vector};

const INCAS_2VAR: &str = "\
vars: x1 x2
eq: x1 - x2
eq: x1^2 + x2^2 - 2
start: 4 4
root: 1 1
root: -1 -1
";

const INCAS_3VAR: &str = "\
vars: x[1] x[2] x[3]
eq: x[1] + 2*x[2] + x[3]
eq: 2*x[1] - x[2] - x[3]
eq: x[1]^2 + x[2]^2 + x[3]^2 - 3
start: 2.1 2.2 -1
";

const SCALAR_SQUARE: &str = "\
vars: x
eq: x^2 - 1
start: 4
root: 1
root: -1
";

// The third row closes the system: the two listing rows fix the direction
// (1, -3, 5), and this row picks the point on it.
const AFFINE_3: &str = "\
vars: x[1] x[2] x[3]
eq: x[1] + 2*x[2] + x[3]
eq: 2*x[1] - x[2] - x[3]
eq: x[1] + x[2] + x[3] - 3
start: 2.1 2.2 -1
root: 1 -3 5
";

const AFFINE_2: &str = "\
vars: x1 x2
eq: x1 + x2 - 3
eq: x1 - x2 - 1
start: 4 4
root: 2 1
";

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "incas-2var",
    "incas-3var",
    "scalar-square",
    "affine-3",
    "affine-2",
];

/// Loads a built-in problem at precision `prec`.
pub fn builtin(name: &str, prec: Precision) -> Result<Problem> {
    match name {
        "incas-2var" => parse_problem(INCAS_2VAR, prec),
        "incas-3var" => {
            // roots ±r·(1, -3, 5) with r = √(3/35)
            let r = (&prec.from_i64(3) / &prec.from_i64(35)).sqrt()?;
            let dir = [1, -3, 5];
            let plus: Vector = dir.iter().map(|&d| &r * &prec.from_i64(d)).collect();
            let minus = plus.neg();
            parse_problem(INCAS_3VAR, prec)?
                .with_root(plus)?
                .with_root(minus)
        }
        "scalar-square" => parse_problem(SCALAR_SQUARE, prec),
        "affine-3" => parse_problem(AFFINE_3, prec),
        "affine-2" => parse_problem(AFFINE_2, prec),
        other => Err(Error::InvalidConfig(format!(
            "unknown builtin `{other}` (available: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
