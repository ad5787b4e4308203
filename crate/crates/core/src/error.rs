use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point pattern is empty")]
    EmptyPattern,
    #[error("invalid window [{xmin}, {xmax}] x [{ymin}, {ymax}]")]
    InvalidWindow {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("point {index} at ({x}, {y}) is not strictly inside the window")]
    PointOutsideWindow { index: usize, x: f64, y: f64 },
    #[error("cell is degenerate (area {area})")]
    DegenerateCell { area: f64 },
    #[error("parameter `{name}` = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("model kind `{kind}` does not support {operation}")]
    UnsupportedModel {
        kind: &'static str,
        operation: &'static str,
    },
    #[error("intensity has no finite upper bound on the sampling region")]
    UnboundedIntensity,
    #[error("ETAS parameters are supercritical (branching ratio {branching_ratio})")]
    Supercritical { branching_ratio: f64 },
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("sample value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("pixel count {0} is not a positive perfect square")]
    InvalidPartition(usize),
    #[error("conditional intensity is not positive at event {index}")]
    NonPositiveIntensity { index: usize },
    #[error("user grid is not a complete rectangular lattice: {0}")]
    InvalidGrid(&'static str),
}
