//! Polynomials, bump terms, piecewise functions, quadrature, the Markov
//! toolkit and L² least squares.

pub mod bump;
pub mod lsq;
pub mod markov;
pub mod piecewise;
pub mod polynomial;
pub mod quadrature;

pub use bump::{bump_constants, bump_wronskian_integral, cross_moment, make_bump, profile_moments, BumpConstants, BumpKind, BumpTerm};
pub use lsq::{l2_least_squares, l2_least_squares_poly, LeastSquares};
pub use markov::{
    comparability_constant, markov_bound_check, markov_subinterval, sup_l1_l2_norms, MarkovReport,
    MarkovWindow, Norms,
};
pub use piecewise::{integrate, integrate_abs, integrate_with, PiecewiseFunction, Side};
pub use polynomial::Polynomial;
