//! Markov inequality, Markov sub-intervals and norm comparisons for
//! polynomials on an interval.

use serde::Serialize;

use super::polynomial::Polynomial;

/// Outcome of [`markov_bound_check`].
#[derive(Clone, Debug, Serialize)]
pub struct MarkovReport {
    /// Degree used in the bound.
    pub degree: usize,
    /// `max_{[a,b]} |p'|`.
    pub max_derivative: f64,
    /// `max_{[a,b]} |p|`.
    pub max_value: f64,
    /// `2 m² / (b − a) · max |p|`.
    pub bound: f64,
    /// `max |p'| ≤ bound` up to rounding.
    pub pass: bool,
}

/// Checks `max |p'| ≤ 2m²/(b−a) · max |p|` on `[a, b]`, with `m = deg p`.
pub fn markov_bound_check(p: &Polynomial, a: f64, b: f64) -> MarkovReport {
    let m = p.degree().unwrap_or(0);
    let (max_value, _) = p.max_abs_on(a, b);
    let (max_derivative, _) = p.derivative().max_abs_on(a, b);
    let bound = 2.0 * (m * m) as f64 / (b - a) * max_value;
    let pass = max_derivative <= bound * (1.0 + 1e-12) + 1e-300;
    MarkovReport {
        degree: m,
        max_derivative,
        max_value,
        bound,
        pass,
    }
}

/// A Markov sub-interval `I ⊆ [a, b]`.
#[derive(Clone, Debug, Serialize)]
pub struct MarkovWindow {
    /// Left end of `I`.
    pub start: f64,
    /// Right end of `I`.
    pub end: f64,
    /// `min_I |p|`.
    pub min_abs: f64,
    /// `max_{[a,b]} |p|`.
    pub max_abs: f64,
    /// True when `p` is the zero polynomial.
    pub zero_polynomial: bool,
}

/// Returns `I ⊆ [a, b]` with `|I| ≥ (b−a)/(4m²)` and
/// `min_I |p| ≥ ½ max_{[a,b]} |p|`, where `m = max(deg p, 1)`.
///
/// Candidates are a uniform grid of windows of the minimal width plus the two
/// windows anchored at the maximiser of `|p|` (one of which always qualifies
/// by the Markov inequality). The candidate with the largest root-aware
/// minimum of `|p|` is returned; ties go to the leftmost window.
pub fn markov_subinterval(p: &Polynomial, a: f64, b: f64) -> MarkovWindow {
    let m = p.degree().unwrap_or(0).max(1);
    let width = (b - a) / (4.0 * (m * m) as f64);
    if p.is_zero() {
        return MarkovWindow {
            start: a,
            end: a + width,
            min_abs: 0.0,
            max_abs: 0.0,
            zero_polynomial: true,
        };
    }
    let (max_abs, argmax) = p.max_abs_on(a, b);
    let grid = 256;
    let mut starts: Vec<f64> = (0..=grid)
        .map(|k| a + (b - a - width) * k as f64 / grid as f64)
        .collect();
    starts.push((argmax - width).clamp(a, b - width));
    starts.push(argmax.clamp(a, b - width));
    starts.sort_by(f64::total_cmp);
    let mut best = (f64::NEG_INFINITY, a);
    for s in starts {
        let v = p.min_abs_on(s, s + width);
        if v > best.0 {
            best = (v, s);
        }
    }
    MarkovWindow {
        start: best.1,
        end: best.1 + width,
        min_abs: best.0,
        max_abs,
        zero_polynomial: false,
    }
}

/// `(sup, l1avg, l2avg)` of `p` on `[a, b]` with the normalised measure.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Norms {
    /// `max |p|`.
    pub sup: f64,
    /// `(1/(b−a)) ∫ |p|`.
    pub l1avg: f64,
    /// `((1/(b−a)) ∫ p²)^{1/2}`.
    pub l2avg: f64,
}

/// Supremum, average L¹ and average L² norms on `[a, b]`.
///
/// These satisfy `l1avg ≤ l2avg ≤ sup ≤ 8m² · l1avg` for `deg p ≤ m`.
pub fn sup_l1_l2_norms(p: &Polynomial, a: f64, b: f64) -> Norms {
    let (sup, _) = p.max_abs_on(a, b);
    let len = b - a;
    // Work in the local variable x − a for conditioning.
    let q = p.shift(a);
    let l1avg = q.integrate_abs(0.0, len) / len;
    let l2avg = ((&q * &q).integrate(0.0, len) / len).max(0.0).sqrt();
    Norms { sup, l1avg, l2avg }
}

/// The explicit comparability constant `8m²` between sup and average L¹ norms.
pub fn comparability_constant(m: usize) -> f64 {
    8.0 * (m.max(1) * m.max(1)) as f64
}
