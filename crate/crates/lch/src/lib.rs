//! Legendrian contact homology over F₂.
//!
//! The crate builds the Chekanov-Eliashberg DGA of a Legendrian knot from a
//! Lagrangian diagram, enumerates augmentations, computes linearized
//! (co)homology, the augmentation categories `Aug₊`, `Aug₋` and the circle
//! category, and the bimodules and pre-morphisms needed to certify the weak
//! relative Calabi-Yau structure order by order.

pub mod dga;
pub mod diagram;
pub mod f2linalg;
pub mod augmentation;
pub mod ainfinity;
pub mod bimodule;
pub mod duality;
