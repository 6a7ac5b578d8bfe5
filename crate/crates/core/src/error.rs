use thiserror::Error;

pub type Result<T> = std::result::Result<T, NliError>;

#[derive(Debug, Error)]
pub enum NliError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error(
        "triangular Raman model is valid up to {limit_thz} THz of optical bandwidth, grid spans {bandwidth_thz:.3} THz"
    )]
    RamanValidity { bandwidth_thz: f64, limit_thz: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("ODE integration stalled at z = {z:.3} m (achieved error {residual:e})")]
    Convergence { z: f64, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("field became non-finite at split step {step}")]
    NumericalBlowup { step: usize },

    #[error("{tier} tier: {source}")]
    Tier { tier: &'static str, source: Box<NliError> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(NliError::Domain(msg.into()))
}
