use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A time argument fell outside the domain of the object being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tabulated rate was queried outside its knot span.
    #[error("extrapolation error: t = {t} outside tabulated span [{start}, {end}]")]
    Extrapolation { t: f64, start: f64, end: f64 },

    #[error("argument error: {0}")]
    Argument(String),

    /// Shapes or sources that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("projector P{index} is not strongly invariant at (t, s) = ({t}, {s}): {reason}")]
    NotStronglyInvariant {
        index: usize,
        t: f64,
        s: f64,
        reason: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn is_structural(&self) -> bool {
        matches!(self, Error::Structural(_))
    }
}
