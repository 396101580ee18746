//! Exact-arithmetic toolkit for sets of natural numbers, their densities and
//! weighted backward shifts, together with the explicit counterexample
//! constructions that separate the density-based hypercyclicity criteria.

pub mod constructions;
pub mod criteria;
pub mod densities;
pub mod hvector;
pub mod index_sets;
pub mod scalar;
pub mod shift_ops;

pub use index_sets::IndexSet;
pub use scalar::Scalar;
pub use shift_ops::{Space, TruncatedVector, WeightSequence};
