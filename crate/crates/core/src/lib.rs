//! Lorentzian affine space `R^{n−1,1}` realized as the open Schubert cell of
//! lines opposite to a fixed isotropic line `L` in `R^{n,2}`.
//!
//! The crate builds affine deformations of Schottky subgroups of `O(n−1,1)`,
//! samples their limit sets in the flag manifold of isotropic lines, and
//! searches the complement of the thickened limit set for points where the
//! affine action is properly discontinuous.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod groups;
pub mod lemmas;
pub mod limitset;
pub mod pipeline;
pub mod sampling;

pub use error::{Error, Result};
