use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling J_{index} = {value} violates |J_i| <= r^i (r^i = {bound})")]
    GrowthViolation { index: u32, value: String, bound: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("enumeration exceeded the term cap of {cap} terms")]
    BudgetOverflow { cap: u64 },

    #[error("chunk tree exceeded the node cap of {cap} nodes")]
    TreeOverflow { cap: usize },

    #[error("H(p, j) is undefined at p = {p}, j = {j}")]
    DomainError { p: f64, j: f64 },

    #[error("cap requested for an empty residual index set")]
    EmptyResidual,

    #[error("quadrature did not converge: last change {change:e} against tolerance {tolerance:e}")]
    QuadratureNonConvergence { change: f64, tolerance: f64 },

    #[error("evaluation point lies {distance:e} from a pole (guard {guard:e})")]
    PoleProximity { distance: f64, guard: f64 },

    #[error("vertical contour tail {estimate:e} is not negligible at height {height}")]
    TailNotNegligible { height: f64, estimate: f64 },

    #[error("no root of the occupation constraint for m_tilde = {m_tilde}")]
    NoRoot { m_tilde: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("1/N extrapolation unstable: fit residual {residual:e} exceeds {tolerance:e}")]
    ExtrapolationUnstable { residual: f64, tolerance: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot parse number {0:?}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
