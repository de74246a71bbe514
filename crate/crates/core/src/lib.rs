//! Numerical laboratory for the correspondence between black-hole evaporation
//! and double descent in linear regression.
//!
//! - [`spectra`]: Marchenko–Pastur law, Stieltjes transform, Wishart sampling.
//! - [`pagecurve`]: radiation entanglement entropy three ways.
//! - [`regression`]: least-squares / minimum-norm fits and variance laws.
//! - [`qregression`]: regression of a diagonal observable on microstate data.
//! - [`harness`]: experiment configuration, seeding and CSV/JSON output.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod pagecurve;
pub mod qregression;
pub mod quad;
pub mod regression;
pub mod seed;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use seed::derive_trial_seed;
pub use spectra::AspectRatio;
