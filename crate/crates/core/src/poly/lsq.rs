//! L² least squares on an interval with the normalised measure.
//!
//! The normal equations are solved through a symmetric eigen-decomposition of
//! the Gram matrix; eigenvalues below `1e-12 · trace` are treated as null
//! directions and the minimal-norm solution is returned.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::piecewise::{integrate_abs, integrate_with, PiecewiseFunction, Side};
use super::polynomial::Polynomial;
use crate::{Error, Result};

/// Relative eigenvalue cutoff of the Gram matrix.
pub const GRAM_CUTOFF: f64 = 1e-12;

/// Result of an L² projection.
#[derive(Clone, Debug, Serialize)]
pub struct LeastSquares {
    /// Coefficients of the basis functions.
    pub coefficients: Vec<f64>,
    /// `((1/(b−a)) ∫ (target − Σ c_k basis_k)²)^{1/2}`.
    pub residual_l2: f64,
    /// `(1/(b−a)) ∫ |target − Σ c_k basis_k|`.
    pub residual_l1: f64,
}

fn solve_normal(gram: DMatrix<f64>, rhs: DVector<f64>) -> Vec<f64> {
    let n = rhs.len();
    let trace = gram.trace();
    if !(trace > 0.0) {
        return vec![0.0; n];
    }
    let eig = SymmetricEigen::new(gram);
    let mut c = DVector::<f64>::zeros(n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda > GRAM_CUTOFF * trace {
            let u = eig.eigenvectors.column(k);
            c += u * (u.dot(&rhs) / lambda);
        }
    }
    c.iter().copied().collect()
}

/// Projects `target` onto `span(basis)` in `L²(a, b)`.
pub fn l2_least_squares(
    target: &PiecewiseFunction,
    basis: &[PiecewiseFunction],
    a: f64,
    b: f64,
) -> Result<LeastSquares> {
    if !(b > a) {
        return Err(Error::InvalidInput(format!("degenerate interval [{a}, {b}]")));
    }
    let len = b - a;
    let mut knots = target.all_knots();
    for f in basis {
        knots.extend(f.all_knots());
    }
    let bumpy = |u: f64, v: f64| target.has_bumps_in(u, v) || basis.iter().any(|f| f.has_bumps_in(u, v));
    let inner = |f: &PiecewiseFunction, g: &PiecewiseFunction| -> Result<f64> {
        let h = |t: f64| f.eval_unchecked(0, t, Side::Right) * g.eval_unchecked(0, t, Side::Right);
        Ok(integrate_with(&h, a, b, &knots, bumpy)? / len)
    };
    let n = basis.len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = inner(&basis[i], &basis[j])?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
        rhs[i] = inner(&basis[i], target)?;
    }
    let coefficients = solve_normal(gram, rhs);
    let mut terms: Vec<(f64, &PiecewiseFunction)> = vec![(1.0, target)];
    for (c, f) in coefficients.iter().zip(basis) {
        terms.push((-c, f));
    }
    let residual = PiecewiseFunction::linear_combination(&terms)?;
    let residual_l1 = integrate_abs(&residual, a, b)? / len;
    let residual_l2 = (inner(&residual, &residual)?).max(0.0).sqrt();
    Ok(LeastSquares {
        coefficients,
        residual_l2,
        residual_l1,
    })
}

/// Polynomial specialisation of [`l2_least_squares`], with exact integrals.
pub fn l2_least_squares_poly(target: &Polynomial, basis: &[Polynomial], a: f64, b: f64) -> LeastSquares {
    let len = b - a;
    let inner = |f: &Polynomial, g: &Polynomial| (f * g).integrate(a, b) / len;
    let n = basis.len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = inner(&basis[i], &basis[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
        rhs[i] = inner(&basis[i], target);
    }
    let coefficients = solve_normal(gram, rhs);
    let mut residual = target.clone();
    for (c, f) in coefficients.iter().zip(basis) {
        residual = &residual - &f.scale(*c);
    }
    LeastSquares {
        residual_l1: residual.integrate_abs(a, b) / len,
        residual_l2: inner(&residual, &residual).max(0.0).sqrt(),
        coefficients,
    }
}
