use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    Precondition(String),
    /// Parameter outside the domain of a curve or function.
    Domain { value: f64, lo: f64, hi: f64 },
    /// Input does not follow the expected annotation layout.
    Format(String),
    /// More ground truths than prediction slots.
    Capacity { slots: usize, required: usize },
    /// Synthetic generation exhausted its retry budget.
    Generation(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Domain { value, lo, hi } => {
                write!(f, "parameter {value} outside domain [{lo}, {hi}]")
            }
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Capacity { slots, required } => write!(
                f,
                "{required} ground-truth instances exceed {slots} prediction slots"
            ),
            Error::Generation(msg) => write!(f, "generation failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
