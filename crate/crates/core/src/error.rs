use thiserror::Error;

/// Errors produced anywhere in the solve pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision must be at least {min} decimal digits, got {got}")]
    InvalidPrecision { got: u32, min: u32 },

    #[error("malformed decimal literal `{0}`")]
    MalformedDecimal(String),

    #[error("matrix is singular: pivot in column {column} is below the singularity threshold")]
    SingularMatrix { column: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("jet shape mismatch: ({lhs_vars} vars, degree {lhs_degree}) vs ({rhs_vars} vars, degree {rhs_degree})")]
    ShapeMismatch {
        lhs_vars: usize,
        lhs_degree: usize,
        rhs_vars: usize,
        rhs_degree: usize,
    },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },

    #[error("reciprocal of a jet whose constant term is (numerically) zero")]
    DivisionByZeroJet,

    #[error("division by zero")]
    DivisionByZero,

    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("derivative order {order} exceeds jet degree {max_degree}")]
    OrderTooHigh { order: usize, max_degree: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },

    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquareSystem { equations: usize, variables: usize },

    #[error("problem has no `start:` line")]
    MissingStart,

    #[error("scheme order {order} is outside the supported range {min}..={max}")]
    UnsupportedOrder {
        order: usize,
        min: usize,
        max: usize,
    },

    #[error("{nvars} variables exceeds the supported maximum of {max}")]
    TooManyVariables { nvars: usize, max: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("problem precision ({problem} digits) differs from solve precision ({config} digits)")]
    PrecisionMismatch { problem: u32, config: u32 },

    #[error("evaluation failed at iterate {iteration}: {source}")]
    Evaluation {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "not enough usable iterations for an order estimate ({usable} usable, {required} required)"
    )]
    InsufficientData { usable: usize, required: usize },

    #[error("trace has no reference root")]
    MissingRoot,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
