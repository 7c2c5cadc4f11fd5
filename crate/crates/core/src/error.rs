use thiserror::Error;

use crate::planar::ModeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {id}: sign condition a*b*c*d < 0 violated (a*b*c*d = {product})")]
    SignConditionViolated { id: ModeId, product: f64 },

    #[error("mode {id}: matrix is not Hurwitz ({inequality})")]
    NotHurwitz { id: ModeId, inequality: String },

    #[error("Lyapunov weights differ ({old:?} vs {new:?}); use the general enclosing level")]
    WeightMismatch { old: (f64, f64), new: (f64, f64) },

    #[error("invalid levels: {0}")]
    InvalidLevels(String),

    #[error("unknown mode id {0}")]
    UnknownModeId(ModeId),

    #[error("duplicate mode id {0}")]
    DuplicateModeId(ModeId),

    #[error("invalid switching signal: {0}")]
    InvalidSignal(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("sampled check `{check}` fails at {point:?} (excess {excess})")]
    InvariantViolated {
        check: &'static str,
        point: Vec<f64>,
        excess: f64,
    },

    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
