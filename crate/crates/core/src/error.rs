use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("non-finite input coordinate {coord}: {value}")]
    NonFiniteInput { coord: usize, value: f64 },

    #[error("objective returned non-finite value {value} at sample {sample_index}")]
    NonFiniteValue { sample_index: u64, value: f64 },

    #[error("objective returned non-finite gradient coordinate at sample {sample_index}")]
    NonFiniteGradient { sample_index: u64 },

    #[error("objective `{name}` exposes no gradient oracle")]
    NoGradientOracle { name: String },

    #[error("unknown problem name `{name}`")]
    UnknownProblem { name: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("descent diverged at iteration {iter}: non-finite iterate")]
    Diverged {
        iter: usize,
        /// Last finite portion of the trajectory.
        prefix: crate::optimize::Trajectory,
    },

    #[error("problem descriptor parse error at byte {pos}: {msg}")]
    DescriptorParse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
