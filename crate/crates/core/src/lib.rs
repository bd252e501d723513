//! Numerical laboratory linking Gaussian, circular, chiral and transfer-matrix
//! random-matrix ensembles to the radial geometry of symmetric spaces.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cartan;
pub mod cs;
pub mod dmpk;
pub mod ensembles;
pub mod lie;
pub mod quad;
pub mod roots;
pub mod special;
pub mod spectra;
