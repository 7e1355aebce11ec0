use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// `p` lies below the Joseph–Lundgren exponent, so the indicial roots are complex.
    #[error("negative discriminant for N = {dim}, p = {p} (p_c = {pc}); kernel exponents are complex")]
    DiscriminantNegative { dim: u32, p: f64, pc: f64 },

    #[error("profile reached a non-positive value {value:e} at r = {r}")]
    NonPositiveProfile { r: f64, value: f64 },

    #[error("discrete residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("fit window holds {nodes} nodes, at least {required} are needed")]
    WindowTooNarrow { nodes: usize, required: usize },

    #[error("tail correction at r = {r} is {relative:e} of the leading term, below working precision")]
    PrecisionLoss { r: f64, relative: f64 },

    #[error("kernel element is non-positive ({value:e}) at r = {r}")]
    NonPositiveKernel { r: f64, value: f64 },

    #[error("|u| = {value:e} exceeds the bound {bound:e} at r = {r}")]
    BoundViolated { r: f64, value: f64, bound: f64 },

    #[error("Newton iteration diverged at t = {t} after {attempts} step-size reductions")]
    NewtonDiverged { t: f64, attempts: usize },

    #[error("blow-up detected at t = {t}: max|u| = {max_abs:e} > {threshold:e}")]
    BlowupDetected { t: f64, max_abs: f64, threshold: f64 },

    #[error("not converged at t = {t}: steady residual {residual:e} > {eps:e}")]
    NotConverged { t: f64, residual: f64, eps: f64 },

    #[error("rescaled domain needs r up to {needed}, profile only reaches {available}")]
    DomainExceeded { needed: f64, available: f64 },

    #[error("integrator failed at r = {r}: {reason}")]
    Integrator { r: f64, reason: String },

    #[error("singular linear system at row {row}")]
    SingularMatrix { row: usize },

    #[error("invalid config at `{path}`: {reason}")]
    ConfigInvalid { path: String, reason: String },

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
