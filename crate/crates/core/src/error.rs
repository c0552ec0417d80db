use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("packet outside domain: {0}")]
    PacketOutsideDomain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain too small: density {density:.3e} reached the grid edge at t = {time}")]
    DomainTooSmall { time: f64, density: f64 },
    #[error("trajectory reached a node of the wave at t = {time}, point {point:?}")]
    NodeEncounter { time: f64, point: Vec<f64> },
    #[error("weak value undefined: |<post|pre>| = {overlap:.3e} is below {floor:.1e}")]
    UndefinedWeakValue { overlap: f64, floor: f64 },
    #[error("pointer grid clips the state: {mass:.3e} of the norm lies near the edge")]
    GridClipping { mass: f64 },
    #[error("T too small: final overlap with the eigenstate is {overlap:.6}")]
    NotAdiabatic { overlap: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical guard (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DomainTooSmall { .. }
                | Error::NodeEncounter { .. }
                | Error::UndefinedWeakValue { .. }
                | Error::GridClipping { .. }
                | Error::NotAdiabatic { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
