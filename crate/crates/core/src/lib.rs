//! Block GMRES and block FOM for `A X = B` with several right-hand sides,
//! together with a stagnation-diagnostics engine.
//!
//! The pieces fit together as follows:
//!
//! - [`kernels`]: dense QR/SVD, numerical rank, the structured pseudo-inverse,
//!   CS-decomposition and principal angles.
//! - [`arnoldi`]: block Arnoldi with breakdown detection and seeded random
//!   replacement of dependent basis vectors.
//! - [`solvers`]: progressive QR of the block Hessenberg matrix, block GMRES
//!   and (generalized) block FOM iterates, and a [`solvers::Session`] driver.
//! - [`diagnostics`]: rank/case classification, CS sines and cosines,
//!   principal-angle checks and the GMRES/FOM relation identities.
//! - [`problems`]: Matrix Market input, shift-matrix and block-diagonal
//!   generators, and the built-in experiments.
//!
//! All arithmetic is real double precision.

pub mod arnoldi;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use kernels::Matrix;
