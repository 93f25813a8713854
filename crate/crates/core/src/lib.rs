//! Spectral analysis toolkit for XX-driven annealing on structured
//! maximum-independent-set instances.

pub mod analysis;
pub mod blocks;
pub mod bounds;
pub mod csvout;
pub mod error;
pub mod hamiltonian;
pub mod instance;
pub mod linalg;
pub mod schedule;
pub mod sector;

pub use error::{Error, Result};
