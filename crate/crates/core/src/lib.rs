//! Spin-chain model of magnetization reversal in layered hard/soft
//! ("spring") magnets.

pub mod equilibrium;
pub mod error;
pub mod field;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod sweep;
pub mod vec3;

pub use error::{Error, Result};
