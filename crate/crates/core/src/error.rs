use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("delay schedule exhausted at round {round} (list has {len} entries)")]
    ScheduleExhausted { round: u64, len: usize },

    #[error("delay must be at least 1, got {delay} at round {round}")]
    InvalidDelay { round: u64, delay: u64 },

    #[error("event from round {origin} arrives at {arrival}, not after current round {current}")]
    LateEnqueue { origin: u64, arrival: u64, current: u64 },

    #[error("drain({round}) called after drain({last}); rounds must strictly increase")]
    NonMonotoneDrain { round: u64, last: u64 },

    #[error("drain({round}) would skip pending events arriving at round {pending}")]
    SkippedDelivery { round: u64, pending: u64 },

    #[error("cost {value} at round {round} lies outside [0, 1]")]
    CostOutOfRange { round: u64, value: f64 },

    #[error("no recorded play for round {0}")]
    UnknownOrigin(u64),

    #[error("multiplicative stability violated at origin {origin}: ratio {ratio} exceeds e^2")]
    StabilityViolation { origin: u64, ratio: f64 },

    #[error("not a probability vector: {0}")]
    NotSimplex(String),

    #[error("regret fit: {0}")]
    Fit(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by the user's configuration or inputs rather than by
    /// a broken invariant inside the library.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::ScheduleExhausted { .. }
                | Error::InvalidDelay { .. }
                | Error::CostOutOfRange { .. }
                | Error::NotSimplex(_)
        )
    }
}
