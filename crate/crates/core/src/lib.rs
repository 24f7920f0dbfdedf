//! Sideband spectroscopy and cooling of atoms in a two-lattice trap.

pub mod cooling;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod quadrature;
pub mod raman;
pub mod specfun;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
