pub mod cli;
pub mod ensembles;
pub mod error;
pub mod hamiltonian;
pub mod landscape;
pub mod parisi;
pub mod predicates;
pub mod rng;

pub use error::{Error, Result};
