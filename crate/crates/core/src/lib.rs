//! Exact twisted heights over the rationals.
//!
//! A twisted pair attaches to every place `v` of `Q` a basis of linear forms
//! `L_1^(v), ..., L_n^(v)` and rational exponents `c_iv`. For a parameter
//! `Q >= 1` the twisted height of a point is
//! `prod_v max_i |L_i^(v)(x)|_v * Q^(-c_iv)`. This crate computes those
//! heights exactly, the weight filtration that governs their behaviour as
//! `Q` grows, brute-force estimates of the successive infima, and the
//! explicit constants that bound the number of exceptional subspaces.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod exact_reals;
pub mod exterior;
pub mod filtration;
pub mod infima;
pub mod interval;
pub mod linalg;
pub mod places;
pub mod suite;
pub mod twisted;

pub use error::{Error, Result};
pub use exact_reals::{ExactReal, FactoredReal};
pub use linalg::{QVec, Subspace};
pub use places::Place;
pub use twisted::{LocalData, TwistedPair};
