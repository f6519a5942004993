use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent with another.
    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// The objective returned a non-finite value.
    #[error("objective returned {value} for particle {particle}")]
    Evaluation { particle: usize, value: f64 },

    /// A trial inside an experiment failed.
    #[error("trial {trial} (seed {seed}) of {algorithm} on {objective} failed: {source}")]
    Trial {
        algorithm: String,
        objective: String,
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("could not generate a well-conditioned rotation after {attempts} attempts")]
    DegenerateRotation { attempts: usize },

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
