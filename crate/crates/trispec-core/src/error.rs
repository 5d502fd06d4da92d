use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signature ({r},{p},{q}) is not hyperbolic: 1/r + 1/p + 1/q must be < 1")]
    NotHyperbolic { r: u32, p: u32, q: String },

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("classification defined for direct motions only")]
    ReversingMotion,

    #[error("degenerate matrix (determinant {0:e})")]
    Degenerate(f64),

    #[error("motion is not hyperbolic")]
    NotHyperbolicMotion,

    #[error("no common perpendicular: geodesics intersect or are asymptotic")]
    NoCommonPerpendicular,

    #[error("geodesic endpoints must be distinct")]
    DegenerateGeodesic,

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("{what} exceeds cap: requested {requested}, cap {cap} (estimated size {estimate})")]
    ResourceCap {
        what: &'static str,
        requested: usize,
        cap: usize,
        estimate: usize,
    },

    #[error("q = inf: use the cleared form")]
    UseClearedForm,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("node exceeds ball radius")]
    ExceedsBallRadius,
}

pub type Result<T> = std::result::Result<T, Error>;
