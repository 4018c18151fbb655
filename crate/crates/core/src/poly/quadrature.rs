//! Gauss–Legendre quadrature: a fixed 16-node rule per panel and adaptive
//! bisection for panels that carry bump terms.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Number of nodes of the fixed rule (exact for degree ≤ 31).
pub const GL_NODES: usize = 16;

/// Default relative tolerance of adaptive quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const MAX_DEPTH: usize = 48;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_NODES))
}

/// Fixed 16-node Gauss–Legendre rule on `[a, b]`.
pub fn gl16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        acc += wi * f(mid + half * xi);
    }
    acc * half
}

/// Adaptive bisection with the 16-node rule.
///
/// A panel is accepted when the single-panel and two-half-panel estimates
/// differ by at most `max(rel_tol · |estimate|, abs_tol)`, where the absolute
/// tolerance is shared among panels in proportion to their width.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let whole = gl16(f, a, b);
    let mut worst = 0.0_f64;
    let v = adapt(f, a, b, whole, rel_tol, abs_tol, b - a, 0, &mut worst);
    if worst > 0.0 {
        return Err(Error::Quadrature { a, b, achieved: worst });
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    total: f64,
    depth: usize,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl16(f, a, m);
    let right = gl16(f, m, b);
    let refined = left + right;
    let diff = (refined - whole).abs();
    let allowed = (rel_tol * refined.abs()).max(abs_tol * (b - a) / total);
    if diff <= allowed {
        return refined;
    }
    if depth >= MAX_DEPTH {
        *worst = worst.max(diff);
        return refined;
    }
    adapt(f, a, m, left, rel_tol, abs_tol, total, depth + 1, worst)
        + adapt(f, m, b, right, rel_tol, abs_tol, total, depth + 1, worst)
}

/// Integrates `f` over `[a, b]` split at `breaks`.
///
/// Panels listed as smooth-polynomial (no bump overlaps them) use the fixed
/// rule; the rest are integrated adaptively. `is_bumpy(u, v)` tells which.
pub fn integrate_panels<F, B>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    is_bumpy: B,
    rel_tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    B: Fn(f64, f64) -> bool,
{
    if !(b > a) {
        return Ok(0.0);
    }
    let mut knots: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    knots.push(a);
    knots.extend(breaks.iter().copied().filter(|t| *t > a && *t < b));
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut smooth_total = 0.0;
    let mut bumpy_panels = Vec::new();
    for w in knots.windows(2) {
        if is_bumpy(w[0], w[1]) {
            bumpy_panels.push((w[0], w[1]));
        } else {
            smooth_total += gl16(f, w[0], w[1]);
        }
    }
    if bumpy_panels.is_empty() {
        return Ok(smooth_total);
    }
    // Absolute floor from a first sweep of |f| over the bumpy panels.
    let mut magnitude = 0.0;
    for &(u, v) in &bumpy_panels {
        magnitude += gl16(&|t: f64| f(t).abs(), u, v);
    }
    let bumpy_width: f64 = bumpy_panels.iter().map(|(u, v)| v - u).sum();
    let abs_tol = rel_tol * magnitude.max(f64::MIN_POSITIVE);
    let mut total = smooth_total;
    for &(u, v) in &bumpy_panels {
        let share = abs_tol * (v - u) / bumpy_width;
        total += adaptive(f, u, v, rel_tol, share)?;
    }
    Ok(total)
}
