use thiserror::Error;

/// Errors raised while building slice models or integrating on them.
#[derive(Debug, Error)]
pub enum SliceError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Residual {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("symplectic form is degenerate (smallest singular value {smallest:.3e})")]
    DegenerateForm { smallest: f64 },

    #[error("Sigma restricted to q x q is degenerate along {kernel:?}")]
    DegenerateSigmaOnQ { kernel: Vec<f64> },

    #[error("Omega at nu = 0 is degenerate (smallest singular value {0:.3e})")]
    DegenerateTubeForm(f64),

    #[error("tau equation is singular outside the valid tube (condition number {cond:.3e})")]
    TauSingular { cond: f64 },

    #[error("state left the certified tube at t = {t}: |rho| = {rho_norm:.4e} (r = {r_mstar:.4e}), |v| = {v_norm:.4e} (r = {r_v:.4e})")]
    TubeExit {
        t: f64,
        rho_norm: f64,
        r_mstar: f64,
        v_norm: f64,
        r_v: f64,
    },

    #[error("cocycle theta unavailable: {0}")]
    ThetaUnavailable(String),

    #[error("operation requires an abelian Lie algebra")]
    NonAbelian,

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("matrix logarithm failed: {0}")]
    Logarithm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = SliceError> = std::result::Result<T, E>;
