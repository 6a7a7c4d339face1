use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("privacy profile increases between eps={eps_lo} and eps={eps_hi} (delta {delta_lo} -> {delta_hi})")]
    NonmonotoneProfile {
        eps_lo: f64,
        eps_hi: f64,
        delta_lo: f64,
        delta_hi: f64,
    },
    #[error("loss grids differ in step: {0} vs {1}")]
    GridMismatch(f64, f64),
    #[error("result grid needs {needed} points, limit is {limit}")]
    Overflow { needed: usize, limit: usize },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("no finite mu exists for this trade-off curve: f(0) = {f0}, residual delta_inf = {delta_inf:e}")]
    NoFiniteMu { f0: f64, delta_inf: f64 },
    #[error("target {target:e} is not bracketed by [{lo:e}, {hi:e}]")]
    NonBracketed { target: f64, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid Renyi order {0}")]
    InvalidOrder(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
