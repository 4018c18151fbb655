//! Jets, Whitney fields and C^m horizontal extension in the free step-2
//! Carnot groups 𝔾_r.
//!
//! The crate is organised bottom-up:
//!
//! - [`group`]: the group law of 𝔾_r, the horizontality polynomials 𝒫^k and
//!   horizontal curves obtained by vertical lifting.
//! - [`poly`]: polynomials, bump functions, piecewise functions, quadrature,
//!   the Markov-inequality toolkit and L² least squares.
//! - [`jets`]: compact sets, jets, Whitney fields, Taylor remainders and
//!   two-point Hermite extension across gaps.
//! - [`conditions`]: the A/V quantities, the generalized A/V audits, residual
//!   areas and the algebraic identity used for necessity.
//! - [`extend`]: good subsets, component ordering, the staged bump
//!   perturbation per gap, curve assembly and verification.
//! - [`cli`]: batch commands that read and write the JSON file formats of
//!   [`io`].
//!
//! [`fixtures`] builds reproducible instances: the counterexample field and
//! fields restricted from lifted polynomial curves.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod extend;
pub mod fixtures;
pub mod group;
pub mod io;
pub mod jets;
pub mod poly;

pub use error::{Error, Result};
