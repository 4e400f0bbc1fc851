use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two particles sit on top of each other under a singular potential.
    #[error("particles {0} and {1} coincide (singular potential)")]
    Singularity(usize, usize),

    /// A root search was started on an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A configured cap (particle count, graph order, ...) was exceeded.
    #[error("{what} = {value} exceeds the cap {cap}")]
    Cap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
