//! Nonlinear potential theory on finite weighted graphs.
//!
//! A [`space::WeightedGraphSpace`] models a bounded domain: vertices carry
//! measure, edges carry a length and a conductance, and the p-energy of a
//! vertex field is `sum_e c_e |u_i - u_j|^p`. On top of the constrained
//! energy minimizer in [`penergy`] the crate computes variational
//! capacities ([`capacity`]), checks the superlevel-set identities of
//! capacitary potentials ([`superlevel`]), builds Green and singular
//! functions ([`green`]), and supplies radial continuum oracles
//! ([`radial`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod error;
pub mod green;
mod linalg;
pub mod penergy;
pub mod quad;
pub mod radial;
pub mod space;
pub mod superlevel;

pub use error::{Error, Result};
