use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid flux model: {0}")]
    Model(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("time {t} lies outside the simulated range [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },

    #[error("CFL violated: dt={dt} exceeds dx/max|f'|={limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("snapshot mismatch: {0}")]
    SnapshotMismatch(String),

    /// The Glimm functional check failed at an event; carries a dump of the event.
    #[error("interaction estimate violated at event {event}: {dump}")]
    GlimmViolation { event: usize, dump: String },

    #[error("event cap of {cap} exceeded at t={t}")]
    EventCap { cap: usize, t: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
