//! Random networks with households, tunable clustering and degree
//! correlation, and SIR epidemics on them: network generation, asymptotic
//! network properties, branching-process approximations and Monte Carlo
//! estimation.

pub mod branching;
pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod figures;
pub mod household;
pub mod infection;
pub mod netgen;
pub mod netprops;
pub mod network;
pub mod numeric;
pub mod quantile;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
