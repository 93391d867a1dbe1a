//! Bootstrap prediction intervals for the age distribution of life-table
//! death counts.
//!
//! Death-count curves are mapped to unconstrained curves with the centered
//! log-ratio transform, modelled with a two-stage dynamic factor model
//! (nonstationary factors from the differenced series, stationary factors
//! from the residual curves), and forecast by bootstrapping score forecast
//! errors and residual curves. A compositional Lee–Carter bootstrap serves as
//! the baseline, and an expanding-window harness scores both by empirical
//! coverage.

pub mod cli;
pub mod coda;
pub mod dfm;
pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod fts;
pub mod lc;
pub mod lifetable;
pub mod quadrature;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
