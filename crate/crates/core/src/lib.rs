//! Dual subspace gradient semismooth Newton solver for
//! `min_x f(x) + 𝓘(Ax + b)` with the 0/1 loss `𝓘`.

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod conjugate;
pub mod data;
pub mod dual;
pub mod error;
pub mod linops;
pub mod prox;
pub mod runner;
pub mod sgsn;
pub mod stationarity;
pub mod tasks;

pub use error::{Error, Result};
