//! Numerical toolkit for planar harmonic mappings `f = h + conj(g)` on the
//! unit disk.
//!
//! The crate evaluates the normality functional `(1-|z|^2) f#(z)` and its
//! weighted (phi) variants, extracts Zalcman-type rescaling sequences for
//! non-normal maps, and checks Lappan-type fiber criteria against direct sup
//! estimates.
//!
//! Holomorphic parts are written in a small expression language (see
//! [`funcexpr`]) and differentiated exactly with truncated Taylor jets.

// Negated comparisons such as `!(x > 0.0)` are used so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod criteria;
mod error;
pub mod funcexpr;
pub mod harmonic;
pub mod metrics;
pub mod normality;
pub mod zalcman;

pub use error::{Error, Result, SingularityKind};
pub use funcexpr::{HoloExpr, HoloFunction, Jet};
pub use harmonic::{HarmonicMap, RescaledMap};

/// Plane coordinates and function values.
pub type ComplexValue = num_complex::Complex64;
