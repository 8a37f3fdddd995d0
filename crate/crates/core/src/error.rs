use thiserror::Error;

use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),

    #[error("point ({u}, {v}) lies outside the patch domain")]
    OutOfDomain { u: f64, v: f64 },

    #[error("degenerate immersion: |x_u × x_v| = {norm:e} is below the regularity margin {margin:e}")]
    DegenerateImmersion { norm: f64, margin: f64 },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("curvature derivatives are unavailable at the umbilic point ({u}, {v})")]
    UmbilicDerivativesUnavailable { u: f64, v: f64 },

    #[error("ill-conditioned polynomial fit (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("degenerate chart metric (det = {det:e})")]
    DegenerateChart { det: f64 },

    #[error("inconclusive classification: {0}")]
    InconclusiveClassification(String),

    #[error("fibre coordinate t = {t} exceeds the bound {bound}")]
    FiberOutOfRange { t: f64, bound: f64 },

    #[error("config: {0}")]
    ConfigParse(String),
}
