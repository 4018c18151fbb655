//! Compactly supported C^∞ bump terms with exact derivatives.
//!
//! Both kinds are built from the profile `b(s) = exp(−1/(s(1−s)))` on
//! `(0, 1)`. Derivatives of `b` come from truncated power-series arithmetic:
//! the series of `g = −1/(s(1−s))` about a point is obtained by series
//! division and `exp` of a series by the recurrence
//! `e_n = (1/n) Σ_{k=1}^{n} k g_k e_{n−k}`.
//!
//! - η (plateau): `η(x) = a · b(s)/b(½)`, peak `a` at the midpoint.
//! - ξ (ramp): `ξ(x) = a · (B(3s−1) − B(6s−4))`, where `B` is the normalised
//!   cumulative integral of `b`. It rises on the middle third, falls back to
//!   zero on `[2/3, 5/6]` and vanishes identically near both ends.
//!
//! Here `s = (x−u)/(v−u)` maps the support `[u, v]` onto `[0, 1]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use super::quadrature::{gauss_legendre, gl16};
use crate::{Error, Result};

/// Bump profile kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    /// Plateau bump η.
    Eta,
    /// Ramp bump ξ.
    Xi,
}

/// One bump term `amplitude · profile((x−u)/(v−u))`.
///
/// The amplitude may be negative, which flips the profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTerm {
    /// Profile kind.
    pub kind: BumpKind,
    /// Support `[u, v]`.
    pub interval: [f64; 2],
    /// Signed amplitude.
    pub amplitude: f64,
    /// Highest derivative order tracked for this term.
    #[serde(default)]
    pub order: usize,
}

/// Constants of the bump profiles, computed once.
#[derive(Clone, Debug, Serialize)]
pub struct BumpConstants {
    /// `∫_0^1 b`.
    pub profile_integral: f64,
    /// `η ≥ amplitude / c_eta` on the middle third.
    pub c_eta: f64,
    /// `ξ' ≥ amplitude / (c_xi · (v−u))` on `xi_floor_interval`.
    pub c_xi: f64,
    /// `max(c_eta, c_xi)`, the single constant used by both invariants.
    pub c_bump: f64,
    /// Relative sub-interval of the support on which the η floor holds.
    pub eta_floor_interval: [f64; 2],
    /// Relative sub-interval of the support on which the ξ derivative floor holds.
    pub xi_floor_interval: [f64; 2],
}

/// Cells of the cumulative table of `∫_0^s b`.
const TABLE_CELLS: usize = 4096;

/// Values of `b` below this threshold are treated as exactly zero.
const CLAMP_INV_Q: f64 = 690.0;

struct CumulativeTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

fn profile(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let inv_q = 1.0 / (s * (1.0 - s));
    if inv_q > CLAMP_INV_Q {
        0.0
    } else {
        (-inv_q).exp()
    }
}

fn table() -> &'static CumulativeTable {
    static TABLE: OnceLock<CumulativeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(8);
        let mut cumulative = Vec::with_capacity(TABLE_CELLS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let h = 1.0 / TABLE_CELLS as f64;
        for k in 0..TABLE_CELLS {
            acc += gl16(&profile, k as f64 * h, (k + 1) as f64 * h);
            cumulative.push(acc);
        }
        CumulativeTable {
            nodes,
            weights,
            total: acc,
            cumulative,
        }
    })
}

/// `∫_0^1 b`.
pub fn profile_integral() -> f64 {
    table().total
}

/// Normalised cumulative profile `B(t) = ∫_0^t b / ∫_0^1 b`, clamped to `[0, 1]`.
fn cumulative(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let tab = table();
    // Use the symmetry b(s) = b(1 − s) to integrate from the nearer end.
    let (x, flip) = if t > 0.5 { (1.0 - t, true) } else { (t, false) };
    let h = 1.0 / TABLE_CELLS as f64;
    let k = ((x / h).floor() as usize).min(TABLE_CELLS - 1);
    let left = k as f64 * h;
    let half = 0.5 * (x - left);
    let mid = 0.5 * (x + left);
    let mut partial = 0.0;
    for (xi, wi) in tab.nodes.iter().zip(&tab.weights) {
        partial += wi * profile(mid + half * xi);
    }
    let value = (tab.cumulative[k] + partial * half) / tab.total;
    if flip {
        1.0 - value
    } else {
        value
    }
}

/// Derivatives `b^{(k)}(s)` for `k = 0..=n`.
pub fn profile_derivatives(s: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if s <= 0.0 || s >= 1.0 {
        return out;
    }
    let q0 = s * (1.0 - s);
    if 1.0 / q0 > CLAMP_INV_Q {
        return out;
    }
    // q(s + t) = q0 + q1 t + q2 t².
    let q1 = 1.0 - 2.0 * s;
    let q2 = -1.0;
    // Series of 1/q, then g = −1/q.
    let mut rec = vec![0.0; n + 1];
    rec[0] = 1.0 / q0;
    for k in 1..=n {
        let mut acc = q1 * rec[k - 1];
        if k >= 2 {
            acc += q2 * rec[k - 2];
        }
        rec[k] = -acc / q0;
    }
    let g: Vec<f64> = rec.iter().map(|v| -v).collect();
    // Series of exp(g).
    let mut e = vec![0.0; n + 1];
    e[0] = g[0].exp();
    for k in 1..=n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * g[j] * e[k - j];
        }
        e[k] = acc / k as f64;
    }
    let mut factorial = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        *slot = e[k] * factorial;
    }
    out
}

/// Constants of the profiles.
pub fn bump_constants() -> &'static BumpConstants {
    static CONSTANTS: OnceLock<BumpConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| {
        let z = profile_integral();
        let peak = profile(0.5);
        let eta_floor_interval = [1.0 / 3.0, 2.0 / 3.0];
        let xi_floor_interval = [4.0 / 9.0, 5.0 / 9.0];
        let samples = 2000;
        let mut eta_min = f64::INFINITY;
        let mut xi_min = f64::INFINITY;
        for k in 0..=samples {
            let t = k as f64 / samples as f64;
            let s_eta = eta_floor_interval[0] + t * (eta_floor_interval[1] - eta_floor_interval[0]);
            eta_min = eta_min.min(profile(s_eta) / peak);
            let s_xi = xi_floor_interval[0] + t * (xi_floor_interval[1] - xi_floor_interval[0]);
            xi_min = xi_min.min(xi_profile_derivatives(s_xi, 1)[1]);
        }
        let c_eta = 1.0 / eta_min;
        let c_xi = 1.0 / xi_min;
        BumpConstants {
            profile_integral: z,
            c_eta,
            c_xi,
            c_bump: c_eta.max(c_xi),
            eta_floor_interval,
            xi_floor_interval,
        }
    })
}

fn eta_profile_derivatives(s: f64, n: usize) -> Vec<f64> {
    let peak_inv = 4.0_f64.exp();
    profile_derivatives(s, n)
        .into_iter()
        .map(|v| v * peak_inv)
        .collect()
}

fn xi_profile_derivatives(s: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if s <= 0.0 || s >= 1.0 {
        return out;
    }
    let z = profile_integral();
    let t1 = 3.0 * s - 1.0;
    let t2 = 6.0 * s - 4.0;
    out[0] = cumulative(t1) - cumulative(t2);
    if n >= 1 {
        let d1 = profile_derivatives(t1, n - 1);
        let d2 = profile_derivatives(t2, n - 1);
        let (mut p3, mut p6) = (1.0, 1.0);
        for k in 1..=n {
            p3 *= 3.0;
            p6 *= 6.0;
            out[k] = (p3 * d1[k - 1] - p6 * d2[k - 1]) / z;
        }
    }
    out
}

/// Number of cached polynomial moments per profile.
pub const MOMENT_COUNT: usize = 40;

/// Panels of the composite rule used for profile moments.
const MOMENT_PANELS: usize = 512;

fn unit_profile(kind: BumpKind, s: f64) -> f64 {
    match kind {
        BumpKind::Eta => eta_profile_derivatives(s, 0)[0],
        BumpKind::Xi => xi_profile_derivatives(s, 0)[0],
    }
}

/// Interior points of `[0, 1]` where the unit profile of `kind` is not
/// analytic.
fn profile_breaks(kind: BumpKind) -> &'static [f64] {
    match kind {
        BumpKind::Eta => &[],
        BumpKind::Xi => &[1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0],
    }
}

/// Composite Gauss–Legendre rule with `panels` panels on each piece of
/// `[a, b]` cut at `breaks`.
fn split_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], panels: usize) -> f64 {
    let mut pts = vec![a, b];
    pts.extend(breaks.iter().copied().filter(|t| *t > a && *t < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        total += (0..panels).map(|k| gl16(f, w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h)).sum::<f64>();
    }
    total
}

/// `∫_0^1 f` cut at the transition points of both profiles.
fn composite<F: Fn(f64) -> f64>(f: &F) -> f64 {
    split_sum(f, 0.0, 1.0, profile_breaks(BumpKind::Xi), MOMENT_PANELS / 4)
}

/// Moments `∫_0^1 p(s) s^n ds`, `n < MOMENT_COUNT`, of the unit profile of
/// `kind` (amplitude 1 on `[0, 1]`).
pub fn profile_moments(kind: BumpKind) -> &'static [f64] {
    static ETA: OnceLock<Vec<f64>> = OnceLock::new();
    static XI: OnceLock<Vec<f64>> = OnceLock::new();
    let cell = match kind {
        BumpKind::Eta => &ETA,
        BumpKind::Xi => &XI,
    };
    cell.get_or_init(|| {
        (0..MOMENT_COUNT)
            .map(|n| composite(&|s: f64| unit_profile(kind, s) * s.powi(n as i32)))
            .collect()
    })
}

/// Panels of the composite rule on partially covered supports.
const PARTIAL_PANELS: usize = 16;

fn panel_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, terms: &[&BumpTerm]) -> f64 {
    let breaks: Vec<f64> = terms.iter().flat_map(|t| t.breaks()).collect();
    split_sum(f, a, b, &breaks, PARTIAL_PANELS)
}

/// `∫_x^y (f g' − f' g)` of two bump terms.
///
/// Exact through [`cross_moment`] when both share a support contained in
/// `[x, y]`; a composite Gauss–Legendre rule on the overlap, cut at the
/// profile transition points, otherwise.
pub fn bump_wronskian_integral(f: &BumpTerm, g: &BumpTerm, x: f64, y: f64) -> f64 {
    let lo = x.max(f.u()).max(g.u());
    let hi = y.min(f.v()).min(g.v());
    if !(hi > lo) {
        return 0.0;
    }
    if f.interval == g.interval && lo == f.u() && hi == f.v() {
        return 2.0 * f.amplitude * g.amplitude * cross_moment(f.kind, g.kind);
    }
    panel_sum(
        &|t: f64| {
            let a = f.derivatives(t, 1);
            let b = g.derivatives(t, 1);
            a[0] * b[1] - a[1] * b[0]
        },
        lo,
        hi,
        &[f, g],
    )
}

/// `∫ p q'` for unit profiles `p`, `q` on a common support; independent of
/// the support.
pub fn cross_moment(p: BumpKind, q: BumpKind) -> f64 {
    static ETA_XI: OnceLock<f64> = OnceLock::new();
    let lambda = *ETA_XI.get_or_init(|| composite(&|s: f64| unit_profile(BumpKind::Eta, s) * xi_profile_derivatives(s, 1)[1]));
    match (p, q) {
        (BumpKind::Eta, BumpKind::Xi) => lambda,
        (BumpKind::Xi, BumpKind::Eta) => -lambda,
        _ => 0.0,
    }
}

/// Builds a bump term. The support must be a nondegenerate interval.
pub fn make_bump(kind: BumpKind, interval: [f64; 2], amplitude: f64, m: usize) -> Result<BumpTerm> {
    let [u, v] = interval;
    if !(u.is_finite() && v.is_finite() && v > u) {
        return Err(Error::InvalidInput(format!(
            "bump support [{u}, {v}] must be a nondegenerate interval"
        )));
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidInput("bump amplitude must be finite".into()));
    }
    Ok(BumpTerm {
        kind,
        interval,
        amplitude,
        order: m,
    })
}

impl BumpTerm {
    /// Left end of the support.
    pub fn u(&self) -> f64 {
        self.interval[0]
    }

    /// Right end of the support.
    pub fn v(&self) -> f64 {
        self.interval[1]
    }

    /// Width of the support.
    pub fn width(&self) -> f64 {
        self.interval[1] - self.interval[0]
    }

    /// True if the open support meets `(a, b)`.
    pub fn overlaps(&self, a: f64, b: f64) -> bool {
        self.u() < b && self.v() > a
    }

    /// The same term with amplitude multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            amplitude: self.amplitude * lambda,
            ..self.clone()
        }
    }

    /// Derivatives of orders `0..=n` at `x`.
    pub fn derivatives(&self, x: f64, n: usize) -> Vec<f64> {
        let w = self.width();
        let s = (x - self.u()) / w;
        let mut d = match self.kind {
            BumpKind::Eta => eta_profile_derivatives(s, n),
            BumpKind::Xi => xi_profile_derivatives(s, n),
        };
        let mut factor = self.amplitude;
        for slot in d.iter_mut() {
            *slot *= factor;
            factor /= w;
        }
        d
    }

    /// Derivative of order `k` at `x`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        if x <= self.u() || x >= self.v() {
            return 0.0;
        }
        self.derivatives(x, k)[k]
    }

    /// Interior points of the support where the profile is not analytic.
    pub fn breaks(&self) -> Vec<f64> {
        let (u, w) = (self.u(), self.width());
        profile_breaks(self.kind).iter().map(|s| u + s * w).collect()
    }

    /// Value at `x`.
    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `∫ bump · p` over the support, where `p` is given in powers of
    /// `(x − u)`.
    pub fn integrate_polynomial(&self, p: &Polynomial) -> f64 {
        let w = self.width();
        let c = p.coeffs();
        let total = if c.len() <= MOMENT_COUNT {
            let mu = profile_moments(self.kind);
            let mut scale = w;
            let mut acc = 0.0;
            for (cn, m) in c.iter().zip(mu) {
                acc += cn * scale * m;
                scale *= w;
            }
            acc
        } else {
            w * composite(&|s: f64| unit_profile(self.kind, s) * p.eval(s * w))
        };
        self.amplitude * total
    }

    /// `∫_x^y bump · p`, where `p` is given in powers of `(t − u)`.
    pub fn integrate_polynomial_on(&self, p: &Polynomial, x: f64, y: f64) -> f64 {
        let lo = x.max(self.u());
        let hi = y.min(self.v());
        if !(hi > lo) {
            return 0.0;
        }
        if lo == self.u() && hi == self.v() {
            return self.integrate_polynomial(p);
        }
        let u = self.u();
        panel_sum(&|t: f64| self.value(t) * p.eval(t - u), lo, hi, &[self])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_integral_matches_reference() {
        assert!((profile_integral() - 0.007_029_858_406_609_656).abs() < 1e-15);
    }

    #[test]
    fn eta_peak_and_flat_ends() {
        let eta = make_bump(BumpKind::Eta, [0.0, 1.0], 1.0, 3).unwrap();
        assert!((eta.value(0.5) - 1.0).abs() < 1e-15);
        for k in 0..=3 {
            assert_eq!(eta.derivative(k, 0.0), 0.0);
            assert_eq!(eta.derivative(k, 1.0), 0.0);
        }
    }

    #[test]
    fn xi_ramp_shape() {
        let xi = make_bump(BumpKind::Xi, [0.0, 1.0], 1.0, 2).unwrap();
        assert!((xi.value(2.0 / 3.0) - 1.0).abs() < 1e-14);
        assert!(xi.value(0.9).abs() < 1e-15);
        assert!(xi.value(0.2).abs() < 1e-15);
        let c = bump_constants();
        assert!(xi.derivative(1, 0.5) >= 1.0 / c.c_xi - 1e-12);
        assert!((c.c_xi - 0.210_935_895_737_286_16).abs() < 1e-9);
        assert!((c.c_eta - 0.5_f64.exp()).abs() < 1e-9);
    }

    fn panels(g: &dyn Fn(f64) -> f64, u: f64, v: f64) -> f64 {
        let n = 2000;
        let h = (v - u) / n as f64;
        (0..n).map(|k| gl16(&g, u + k as f64 * h, u + (k + 1) as f64 * h)).sum()
    }

    #[test]
    fn polynomial_moments_match_quadrature() {
        let p = Polynomial::new(vec![0.3, -1.0, 2.0, 0.5]);
        for kind in [BumpKind::Eta, BumpKind::Xi] {
            let b = make_bump(kind, [0.2, 0.45], -1.7, 2).unwrap();
            let g = |x: f64| b.value(x) * p.eval(x - 0.2);
            let direct = panels(&g, 0.2, 0.45);
            assert!((b.integrate_polynomial(&p) - direct).abs() < 1e-13);
        }
        let eta = make_bump(BumpKind::Eta, [1.0, 3.0], 1.0, 1).unwrap();
        let xi = make_bump(BumpKind::Xi, [1.0, 3.0], 1.0, 1).unwrap();
        let g = |x: f64| eta.value(x) * xi.derivative(1, x);
        let direct = panels(&g, 1.0, 3.0);
        assert!((cross_moment(BumpKind::Eta, BumpKind::Xi) - direct).abs() < 1e-13);
    }

    #[test]
    fn cumulative_is_consistent() {
        assert!((cumulative(0.5) - 0.5).abs() < 1e-15);
        let direct = super::super::quadrature::adaptive(&profile, 0.0, 0.3, 1e-14, 1e-22).unwrap();
        assert!((cumulative(0.3) - direct / profile_integral()).abs() < 1e-13);
    }
}
