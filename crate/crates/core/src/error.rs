use thiserror::Error;

use crate::scalarfn::ScalarError;
use crate::spaceform::SpaceFormError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    SpaceForm(#[from] SpaceFormError),
    #[error("degenerate metric G at t = {t}: |det| = {det:e} (scale {scale:e})")]
    Degenerate { t: f64, det: f64, scale: f64 },
    #[error("`{what}` vanishes at t ≈ {t}")]
    DenominatorZero { what: String, t: f64 },
    #[error("dimension {n} is not supported (max {max})")]
    Dimension { n: usize, max: usize },
    #[error("least-squares system is rank-deficient at t = {t}")]
    RankDeficient { t: f64 },
    #[error("class lattice is inconsistent: {0}")]
    Inconsistent(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
