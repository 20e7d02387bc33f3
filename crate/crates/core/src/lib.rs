//! Generalized associated Lamé potentials on the PT-symmetric line
//! `y = i x + β`: exact band-edge and mid-band states, a Floquet
//! discriminant oracle, SUSY partners and the Heun mapping.

pub mod catalog;
pub mod elliptic;
pub mod error;
pub mod expr;
pub mod gal;
pub mod heun;
pub mod spectral;
pub mod susy;
pub mod verify;

pub use elliptic::{C64, EllipticTriple, ModulusM};
pub use error::{GalError, Result};
pub use gal::GalSpec;
