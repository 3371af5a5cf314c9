//! Rational decision making over Hermitian matrices.
//!
//! Gambles are Hermitian matrices paying `π† G π` utiles when the system is
//! measured along the unit vector `π`. This crate checks coherence of finite
//! sets of desirable gambles, validates quantum horse lotteries (block lists
//! forming a POVM), maps preferences over lotteries to desirable gambles and
//! back, represents complete preferences by a trace-one positive matrix, and
//! updates beliefs on projective events.
//!
//! The numerical backbone is a dense primal-dual semidefinite solver
//! ([`sdp`]) working on the real symmetric embedding of Hermitian blocks;
//! every certificate it produces is re-validated with the eigensolver in
//! [`hermitian`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cone;
pub mod desirability;
pub mod error;
pub mod hermitian;
mod linalg;
pub mod lottery;
pub mod preference;
pub mod sampling;
pub mod sdp;
pub mod updating;

pub use error::{Error, Result};
pub use hermitian::{BlockDiag, HermitianMatrix, OrthogonalDecomposition, Projector, PsdClass};
