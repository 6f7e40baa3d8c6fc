use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed arguments: bad sizes, unsorted grids, empty inputs.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parameter t = {t} outside family range [{min}, {max}]")]
    ParameterRange { t: f64, min: f64, max: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// An iteration hit its cap. `residual` is the last bracket width or
    /// off-diagonal norm, whichever the method tracks.
    #[error("{message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// Sampled data contradicts an assumption the computation relies on,
    /// e.g. a non-monotone eigencurve on a set-continuous family.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// Wraps another error with the parameter values it arose at.
    #[error("at t = {t}{}: {source}", .mode.map(|m| format!(", m = {m}")).unwrap_or_default())]
    At {
        t: f64,
        mode: Option<u32>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn at(self, t: f64, mode: Option<u32>) -> Self {
        Error::At {
            t,
            mode,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any `At` annotations peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.root(), Error::Numeric { .. } | Error::Consistency(_))
    }
}
