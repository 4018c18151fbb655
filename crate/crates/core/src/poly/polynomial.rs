//! Dense univariate polynomials in the monomial basis.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// A real polynomial `Σ c_k x^k` with the constant term first.
///
/// An empty coefficient list is the zero polynomial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from monomial coefficients, constant term first.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c x^k`.
    pub fn monomial(k: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The Chebyshev polynomial of the first kind `T_n`.
    pub fn chebyshev(n: usize) -> Self {
        let mut prev = Polynomial::constant(1.0);
        if n == 0 {
            return prev;
        }
        let x = Polynomial::monomial(1, 1.0);
        let mut cur = x.clone();
        for _ in 1..n {
            let next = &(&x * &cur).scale(2.0) - &prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    /// Coefficients, constant term first, without trailing zeros.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// First derivative.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    /// Derivative of order `k`.
    pub fn nth_derivative(&self, k: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..k {
            if p.is_zero() {
                break;
            }
            p = p.derivative();
        }
        p
    }

    /// Value of the `k`-th derivative at `x` without allocating.
    pub fn eval_derivative(&self, k: usize, x: f64) -> f64 {
        let n = self.coeffs.len();
        if k >= n {
            return 0.0;
        }
        let mut acc = 0.0;
        for d in (k..n).rev() {
            let mut falling = 1.0;
            for t in 0..k {
                falling *= (d - t) as f64;
            }
            acc = acc * x + falling * self.coeffs[d];
        }
        acc
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64),
        );
        Self::new(coeffs)
    }

    /// Exact definite integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let p = self.antiderivative();
        p.eval(b) - p.eval(a)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Re-expansion `q(x) = p(x + h)`.
    pub fn shift(&self, h: f64) -> Self {
        self.compose_affine(1.0, h)
    }

    /// Composition `q(x) = p(α x + β)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        // Horner in the polynomial ring: q = (((c_n) (αx+β) + c_{n−1}) (αx+β) + …).
        let n = self.coeffs.len();
        let mut acc = vec![0.0; n];
        let mut len = 0;
        for c in self.coeffs.iter().rev() {
            let mut next = vec![0.0; n];
            for d in 0..len {
                next[d] += acc[d] * beta;
                next[d + 1] += acc[d] * alpha;
            }
            next[0] += c;
            acc = next;
            len = (len + 1).min(n);
        }
        Self::new(acc)
    }

    /// Real roots in `[a, b]`, sorted and clustered.
    ///
    /// Roots are computed as eigenvalues of the companion matrix of the
    /// polynomial re-expanded on `[-1, 1]`, then polished by Newton steps.
    /// Roots closer than `1e-12 · (b − a)` are merged. Complex pairs with a
    /// small imaginary part (double roots perturbed by rounding) are reported
    /// as real, which is harmless for every caller.
    pub fn real_roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if self.degree().unwrap_or(0) == 0 || !(b > a) {
            return Vec::new();
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let q = self.compose_affine(half, mid);
        let scale = q.max_abs_coeff();
        let mut c: Vec<f64> = q.coeffs.clone();
        while matches!(c.last(), Some(v) if v.abs() <= 1e-15 * scale) {
            c.pop();
        }
        let n = match c.len().checked_sub(1) {
            Some(n) if n >= 1 => n,
            _ => return Vec::new(),
        };
        let mut roots_s: Vec<f64> = Vec::new();
        if n == 1 {
            roots_s.push(-c[0] / c[1]);
        } else {
            let lead = c[n];
            let mut comp = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                comp[(0, k)] = -c[n - 1 - k] / lead;
            }
            for k in 1..n {
                comp[(k, k - 1)] = 1.0;
            }
            for z in comp.complex_eigenvalues().iter() {
                if z.im.abs() <= 1e-6 * (1.0 + z.re.abs()) {
                    roots_s.push(z.re);
                }
            }
        }
        let qn = Polynomial::new(c);
        let dq = qn.derivative();
        let mut out: Vec<f64> = Vec::new();
        for mut s in roots_s {
            for _ in 0..3 {
                let d = dq.eval(s);
                if d == 0.0 {
                    break;
                }
                let step = qn.eval(s) / d;
                if !step.is_finite() || step.abs() > 1e-3 {
                    break;
                }
                s -= step;
            }
            if (-1.0 - 1e-12..=1.0 + 1e-12).contains(&s) {
                out.push((mid + half * s).clamp(a, b));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (b - a));
        out
    }

    /// `(max_{[a,b]} |p|, argmax)`, evaluated at the endpoints and the
    /// critical points.
    pub fn max_abs_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut best = (self.eval(a).abs(), a);
        let mut consider = |x: f64| {
            let v = self.eval(x).abs();
            if v > best.0 {
                best = (v, x);
            }
        };
        consider(b);
        for x in self.derivative().real_roots_in(a, b) {
            consider(x);
        }
        best
    }

    /// `min_{[a,b]} |p|`: zero if a root lies in `[a, b]`, otherwise the
    /// smallest value over the endpoints and critical points.
    pub fn min_abs_on(&self, a: f64, b: f64) -> f64 {
        if !self.real_roots_in(a, b).is_empty() {
            return 0.0;
        }
        let mut best = self.eval(a).abs().min(self.eval(b).abs());
        for x in self.derivative().real_roots_in(a, b) {
            best = best.min(self.eval(x).abs());
        }
        best
    }

    /// `∫_a^b |p|`, exact up to root location.
    pub fn integrate_abs(&self, a: f64, b: f64) -> f64 {
        if !(b > a) || self.is_zero() {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let q = self.compose_affine(half, mid);
        let big_q = q.antiderivative();
        let mut knots = vec![-1.0];
        for x in self.real_roots_in(a, b) {
            let s = (x - mid) / half;
            if s > -1.0 && s < 1.0 {
                knots.push(s);
            }
        }
        knots.push(1.0);
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += (big_q.eval(w[1]) - big_q.eval(w[0])).abs();
        }
        total * half
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}
