use thiserror::Error;

/// Errors produced by the geometry, filter, simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("oracle found no feasible heading")]
    OracleInfeasible,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("simulation aborted at t={t:.4} (airplane {id}): {reason}")]
    SimulationAborted { t: f64, id: u32, reason: String },

    #[error("no equilibrium found for u={u}")]
    NoEquilibria { u: f64 },

    #[error("run spec error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
