//! Brute-force oracles shared by the integration tests.
//!
//! Integrals are evaluated by a composite tanh-sinh rule between knots,
//! independently of the moment algebra and the semi-analytic lifts used by
//! the library. Tanh-sinh keeps full accuracy on the flat ends of bumps,
//! where fixed Gauss-Legendre panels converge slowly.

#![allow(dead_code)]

use cw_core::group::Component;
use cw_core::jets::WhitneyField;
use std::f64::consts::FRAC_PI_2;

use cw_core::poly::{BumpTerm, PiecewiseFunction, Polynomial, Side};

/// Panels per smooth piece of [`composite`].
pub const PANELS: usize = 1;

/// Step of the tanh-sinh rule.
const STEP: f64 = 1.0 / 16.0;

/// Truncation of the tanh-sinh parameter range.
const RANGE: f64 = 3.2;

/// `∫_a^b g` by the tanh-sinh rule.
pub fn tanh_sinh(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let n = (RANGE / STEP) as i64;
    let mut total = Neumaier::default();
    for k in -n..=n {
        let t = k as f64 * STEP;
        let u = FRAC_PI_2 * t.sinh();
        let weight = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        let offset = half * 2.0 / (1.0 + (2.0 * u.abs()).exp());
        let x = if u < 0.0 { a + offset } else { b - offset };
        if x > a && x < b {
            total.add(weight * g(x));
        }
    }
    total.value() * half * STEP
}

/// `∫_a^b g` with `PANELS` tanh-sinh panels between consecutive knots.
pub fn composite(g: &dyn Fn(f64) -> f64, a: f64, b: f64, knots: &[f64]) -> f64 {
    composite_with(g, a, b, knots, PANELS)
}

/// `∫_a^b g` with `panels` tanh-sinh panels between consecutive knots.
pub fn composite_with(g: &dyn Fn(f64) -> f64, a: f64, b: f64, knots: &[f64], panels: usize) -> f64 {
    let mut total = Neumaier::default();
    for w in windows(a, b, knots) {
        let h = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            total.add(tanh_sinh(g, w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h));
        }
    }
    total.value()
}

/// Compensated summation.
#[derive(Default)]
pub struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Points where a function may fail to be analytic: breakpoints, bump
/// endpoints and the interior transition points of the ramp profile.
pub fn singular_points(f: &PiecewiseFunction) -> Vec<f64> {
    let mut knots = f.all_knots();
    for b in f.bumps() {
        let (u, w) = (b.u(), b.v() - b.u());
        knots.extend([u + w / 3.0, u + 2.0 * w / 3.0, u + 5.0 * w / 6.0]);
    }
    knots
}

/// Consecutive knots of `[a, b]`.
pub fn windows(a: f64, b: f64, knots: &[f64]) -> Vec<[f64; 2]> {
    let mut pts = vec![a, b];
    pts.extend(knots.iter().copied().filter(|t| *t > a && *t < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| [w[0], w[1]]).collect()
}

/// `f` on the window `[w0, w1]` (inside one polynomial piece) in the
/// coordinate `s = t − w0`, so that narrow bumps are evaluated without the
/// rounding of absolute coordinates.
pub fn localized(f: &PiecewiseFunction, w0: f64, w1: f64) -> PiecewiseFunction {
    let bp = f.breakpoints();
    let mid = 0.5 * (w0 + w1);
    let k = (0..f.pieces().len())
        .find(|&k| bp[k] <= mid && mid <= bp[k + 1])
        .expect("window inside the domain");
    let bumps: Vec<BumpTerm> = f
        .bumps()
        .iter()
        .filter(|b| b.u() < w1 && b.v() > w0)
        .map(|b| BumpTerm {
            interval: [b.u() - w0, b.v() - w0],
            ..b.clone()
        })
        .collect();
    PiecewiseFunction::new(vec![0.0, w1 - w0], vec![f.piece_about(k, w0)], bumps).unwrap()
}

/// `½∫_a^b (f g' − f' g)` by brute force.
pub fn oracle_area(f: &PiecewiseFunction, g: &PiecewiseFunction, a: f64, b: f64) -> f64 {
    let mut knots = singular_points(f);
    knots.extend(singular_points(g));
    let mut total = Neumaier::default();
    for [w0, w1] in windows(a, b, &knots) {
        let (fl, gl) = (localized(f, w0, w1), localized(g, w0, w1));
        let integrand = |s: f64| {
            let x = fl.jet_side(s, 1, Side::Right).unwrap();
            let y = gl.jet_side(s, 1, Side::Right).unwrap();
            0.5 * (x[0] * y[1] - x[1] * y[0])
        };
        total.add(composite(&integrand, 0.0, w1 - w0, &[]));
    }
    total.value()
}

/// `∫_a^b φ p'`, where `p` is expressed in powers of `(t − a)`.
pub fn oracle_moment(phi: &PiecewiseFunction, p: &Polynomial, a: f64, b: f64) -> f64 {
    let dp = p.derivative();
    let mut total = Neumaier::default();
    for [w0, w1] in windows(a, b, &singular_points(phi)) {
        let (fl, dpl) = (localized(phi, w0, w1), dp.shift(w0 - a));
        let g = |s: f64| fl.eval_side(0, s, Side::Right).unwrap() * dpl.eval(s);
        total.add(composite(&g, 0.0, w1 - w0, &[]));
    }
    total.value()
}

/// Residual areas `F_ij(b) − F_ij(a) − ½∫(g_i g_j' − g_i' g_j)` of the
/// functions `g` on the gap, canonical pair order.
pub fn oracle_residuals(field: &WhitneyField, g: &[PiecewiseFunction], a: f64, b: f64) -> Vec<f64> {
    cw_core::group::pairs(field.r)
        .into_iter()
        .map(|(i, j)| {
            let c = Component::V(i, j);
            let target = field.value(c, 0, b).unwrap() - field.value(c, 0, a).unwrap();
            target - oracle_area(&g[i - 1], &g[j - 1], a, b)
        })
        .collect()
}

/// `f + φ` on the gap, with `f` given in powers of `(t − a)`.
pub fn perturbed(f: &Polynomial, phi: &PiecewiseFunction, a: f64, b: f64) -> PiecewiseFunction {
    PiecewiseFunction::from_local_polynomial(f.clone(), a, b)
        .unwrap()
        .with_bumps(phi.bumps())
}

/// Relative difference `|x − y| / max(1, |y|)`.
pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}
