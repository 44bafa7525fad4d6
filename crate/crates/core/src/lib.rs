//! Fixed-depth Hamiltonian simulation: compile `e^{−iHt}` into
//! `K† e^{−ih₀t} K` through a Cartan decomposition of the dynamical Lie
//! algebra and a Zassenhaus product ansatz for `K`.

pub mod dd;
pub mod error;
pub mod evolution;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod optimize;
pub mod pauli;
pub mod zassenhaus;

pub use error::{Error, Result};
