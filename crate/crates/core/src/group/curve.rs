//! Horizontal curves in 𝔾_r and their vertical lifts.
//!
//! A curve is horizontal exactly when each vertical component satisfies
//! `γ_ij(t) − γ_ij(t₀) = ½∫_{t₀}^t (γ_i γ_j' − γ_i' γ_j)`; equivalently
//! `D^k γ_ij = 𝒫^k(γ_i, …, D^k γ_j)` for `k ≥ 1`.

use std::fmt;

use serde::Serialize;

use super::{pair_count, pair_index, pairs, pcal, GroupElement};
use crate::poly::{bump_wronskian_integral, BumpTerm, PiecewiseFunction, Polynomial, Side};
use crate::{Error, Result};

/// Identifies one coordinate function of a curve or field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    /// Horizontal component `i` (1-based).
    H(usize),
    /// Vertical component `(i, j)` with `i > j` (1-based).
    V(usize, usize),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::H(i) => write!(f, "{i}"),
            Component::V(i, j) => write!(f, "{i}{j}"),
        }
    }
}

/// One piece of a vertical component.
#[derive(Clone, Debug, PartialEq)]
pub enum CurvePiece {
    /// Explicit polynomial in powers of `(t − piece start)`.
    Poly(Polynomial),
    /// Lifted piece: value `anchor + ½∫_{start}^t (γ_i γ_j' − γ_i' γ_j)`,
    /// derivatives from 𝒫^k.
    Lift {
        /// Value at the start of the piece.
        anchor: f64,
    },
}

/// A vertical coordinate function `γ_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalComponent {
    /// First index of the pair.
    pub i: usize,
    /// Second index of the pair.
    pub j: usize,
    /// Piece boundaries.
    pub breakpoints: Vec<f64>,
    /// One piece per sub-interval.
    pub pieces: Vec<CurvePiece>,
}

impl VerticalComponent {
    fn piece_index(&self, t: f64, side: Side) -> usize {
        let n = self.pieces.len();
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        let mut k = idx.saturating_sub(1).min(n - 1);
        if side == Side::Left && k > 0 && t == self.breakpoints[k] {
            k -= 1;
        }
        k
    }
}

/// A curve in 𝔾_r given by horizontal and vertical component functions.
#[derive(Clone, Debug)]
pub struct HorizontalCurve {
    /// Number of generators.
    pub r: usize,
    /// Smoothness order tracked by the checks.
    pub m: usize,
    /// Horizontal components `γ_1..γ_r`.
    pub components: Vec<PiecewiseFunction>,
    /// Vertical components in canonical pair order.
    pub vertical: Vec<VerticalComponent>,
    /// Domain `[t₀, t₁]`.
    pub domain: (f64, f64),
}

impl HorizontalCurve {
    /// Assembles a curve after checking dimensions and domains.
    pub fn new(
        r: usize,
        m: usize,
        components: Vec<PiecewiseFunction>,
        vertical: Vec<VerticalComponent>,
    ) -> Result<Self> {
        if components.len() != r || vertical.len() != pair_count(r) {
            return Err(Error::Dimension(format!(
                "a curve in G_{r} needs {r} horizontal and {} vertical components",
                pair_count(r)
            )));
        }
        let domain = components[0].domain();
        let tol = 1e-12 * (domain.1 - domain.0).max(1.0);
        for c in &components {
            let d = c.domain();
            if (d.0 - domain.0).abs() > tol || (d.1 - domain.1).abs() > tol {
                return Err(Error::Dimension("horizontal components have different domains".into()));
            }
        }
        for (n, (v, (i, j))) in vertical.iter().zip(pairs(r)).enumerate() {
            if v.i != i || v.j != j {
                return Err(Error::InvalidInput(format!(
                    "vertical component {n} is labelled ({},{}) instead of ({i},{j})",
                    v.i, v.j
                )));
            }
            if v.pieces.len() + 1 != v.breakpoints.len() {
                return Err(Error::Dimension(format!("vertical component ({i},{j}) is malformed")));
            }
        }
        Ok(Self {
            r,
            m,
            components,
            vertical,
            domain,
        })
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain;
        let slack = 1e-12 * (b - a).max(1.0);
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain {
                point: t,
                what: format!("the curve domain [{a}, {b}]"),
            });
        }
        Ok(())
    }

    /// `½∫_u^v (γ_i γ_j' − γ_i' γ_j)`.
    pub fn area_integral(&self, i: usize, j: usize, u: f64, v: f64) -> Result<f64> {
        let gi = &self.components[i - 1];
        let gj = &self.components[j - 1];
        signed_area(gi, gj, u, v)
    }

    /// `k`-th derivative of a component at `t` from the given side.
    pub fn eval(&self, c: Component, k: usize, t: f64, side: Side) -> Result<f64> {
        self.check_domain(t)?;
        match c {
            Component::H(i) => Ok(self.components[i - 1].eval_unchecked(k, t, side)),
            Component::V(i, j) => {
                let v = &self.vertical[pair_index(i, j)];
                let p = v.piece_index(t, side);
                let start = v.breakpoints[p];
                match &v.pieces[p] {
                    CurvePiece::Poly(q) => Ok(q.eval_derivative(k, t - start)),
                    CurvePiece::Lift { anchor } => {
                        if k == 0 {
                            Ok(anchor + self.area_integral(i, j, start, t)?)
                        } else {
                            let xi = self.components[i - 1].jet_unchecked(t, k, side);
                            let xj = self.components[j - 1].jet_unchecked(t, k, side);
                            Ok(pcal(k, &xi, &xj))
                        }
                    }
                }
            }
        }
    }

    /// The point `γ(t)`.
    pub fn point(&self, t: f64) -> Result<GroupElement> {
        let horizontal = (1..=self.r)
            .map(|i| self.eval(Component::H(i), 0, t, Side::Right))
            .collect::<Result<Vec<_>>>()?;
        let vertical = pairs(self.r)
            .into_iter()
            .map(|(i, j)| self.eval(Component::V(i, j), 0, t, Side::Right))
            .collect::<Result<Vec<_>>>()?;
        GroupElement::new(self.r, horizontal, vertical)
    }

    /// Union of all breakpoints of all components.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = Vec::new();
        for c in &self.components {
            k.extend_from_slice(c.breakpoints());
        }
        for v in &self.vertical {
            k.extend_from_slice(&v.breakpoints);
        }
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// All components in canonical order: horizontal first, then vertical.
    pub fn all_components(&self) -> Vec<Component> {
        let mut out: Vec<Component> = (1..=self.r).map(Component::H).collect();
        out.extend(pairs(self.r).into_iter().map(|(i, j)| Component::V(i, j)));
        out
    }
}

/// `½∫_u^v (f g' − f' g)` for two piecewise functions.
///
/// On each polynomial piece the polynomial part is integrated exactly. The
/// polynomial-bump terms are integrated by parts into `∫ bump · poly'`,
/// which uses the exact profile moments on fully covered supports.
pub fn signed_area(f: &PiecewiseFunction, g: &PiecewiseFunction, u: f64, v: f64) -> Result<f64> {
    if !(v > u) {
        return Ok(0.0);
    }
    let mut knots = vec![u, v];
    knots.extend(f.breakpoints().iter().chain(g.breakpoints()).copied().filter(|t| *t > u && *t < v));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (x, y) = (w[0], w[1]);
        let mid = 0.5 * (x + y);
        let pf = f.piece_about(f.piece_index(mid, Side::Right), x);
        let pg = g.piece_about(g.piece_index(mid, Side::Right), x);
        let (dpf, dpg) = (pf.derivative(), pg.derivative());
        let wronskian = &(&pf * &dpg) - &(&dpf * &pg);
        total += 0.5 * wronskian.antiderivative().eval(y - x);
        let bf: Vec<&BumpTerm> = f.bumps().iter().filter(|b| b.overlaps(x, y)).collect();
        let bg: Vec<&BumpTerm> = g.bumps().iter().filter(|b| b.overlaps(x, y)).collect();
        let ends = |bs: &[&BumpTerm], t: f64| bs.iter().map(|b| b.value(t)).sum::<f64>();
        total += 0.5 * (pf.eval(y - x) * ends(&bg, y) - pf.eval(0.0) * ends(&bg, x));
        total -= 0.5 * (ends(&bf, y) * pg.eval(y - x) - ends(&bf, x) * pg.eval(0.0));
        for b in &bg {
            total -= b.integrate_polynomial_on(&dpf.shift(b.u() - x), x, y);
        }
        for b in &bf {
            total += b.integrate_polynomial_on(&dpg.shift(b.u() - x), x, y);
        }
        for a in &bf {
            for b in &bg {
                total += 0.5 * bump_wronskian_integral(a, b, x, y);
            }
        }
    }
    Ok(total)
}

/// Lifts one sub-interval `[u, v]` of a pair starting from `anchor`; returns
/// the piece and its value at `v`.
pub(crate) fn lift_segment(
    gi: &PiecewiseFunction,
    gj: &PiecewiseFunction,
    u: f64,
    v: f64,
    anchor: f64,
) -> Result<(CurvePiece, f64)> {
    if gi.has_bumps_in(u, v) || gj.has_bumps_in(u, v) {
        let end = anchor + signed_area(gi, gj, u, v)?;
        return Ok((CurvePiece::Lift { anchor }, end));
    }
    let mid = 0.5 * (u + v);
    let pi = gi.piece_about(gi.piece_index(mid, Side::Right), u);
    let pj = gj.piece_about(gj.piece_index(mid, Side::Right), u);
    let integrand = &(&pi * &pj.derivative()) - &(&pi.derivative() * &pj);
    let lift = &integrand.antiderivative().scale(0.5) + &Polynomial::constant(anchor);
    let end = lift.eval(v - u);
    Ok((CurvePiece::Poly(lift), end))
}

/// The horizontal curve with the given horizontal components and
/// `γ(t₀) = start`.
///
/// The horizontal part of `start` must agree with the components at `t₀`;
/// its vertical part provides the initial vertical values. Vertical pieces
/// are exact polynomials wherever no bump is present and lifted pieces
/// otherwise.
pub fn vertical_lift(horizontal: Vec<PiecewiseFunction>, start: &GroupElement, m: usize) -> Result<HorizontalCurve> {
    let r = horizontal.len();
    if start.r != r {
        return Err(Error::Dimension(format!(
            "start point lies in G_{} but {r} components were given",
            start.r
        )));
    }
    if r < 2 {
        return Err(Error::InvalidInput("a curve needs at least two components".into()));
    }
    let (t0, _) = horizontal[0].domain();
    for (i, c) in horizontal.iter().enumerate() {
        let v = c.eval_unchecked(0, t0, Side::Right);
        if (v - start.horizontal[i]).abs() > 1e-9 * start.scale().max(1.0 + v.abs()) {
            return Err(Error::InvalidInput(format!(
                "start point has x_{} = {} but the component starts at {v}",
                i + 1,
                start.horizontal[i]
            )));
        }
    }
    let mut knots: Vec<f64> = Vec::new();
    for c in &horizontal {
        knots.extend_from_slice(c.breakpoints());
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut vertical = Vec::with_capacity(pair_count(r));
    for (i, j) in pairs(r) {
        let mut value = start.vertical_at(i, j);
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let (piece, end) = lift_segment(&horizontal[i - 1], &horizontal[j - 1], w[0], w[1], value)?;
            pieces.push(piece);
            value = end;
        }
        vertical.push(VerticalComponent {
            i,
            j,
            breakpoints: knots.clone(),
            pieces,
        });
    }
    HorizontalCurve::new(r, m, horizontal, vertical)
}

/// Residuals of one pair in [`horizontality_check`].
#[derive(Clone, Debug, Serialize)]
pub struct PairHorizontality {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Largest increment residual over the grid.
    pub increment_residual: f64,
    /// Where the increment residual is attained.
    pub increment_at: f64,
    /// Largest derivative residual for orders `1..=m`.
    pub derivative_residuals: Vec<f64>,
}

/// Report of [`horizontality_check`].
#[derive(Clone, Debug, Serialize)]
pub struct HorizontalityReport {
    /// Per-pair residuals.
    pub pairs: Vec<PairHorizontality>,
    /// Largest residual over all pairs and checks.
    pub max_residual: f64,
    /// Scale used for the relative tolerance.
    pub scale: f64,
    /// Relative tolerance.
    pub tolerance: f64,
    /// All residuals at most `tolerance · scale`.
    pub pass: bool,
}

/// Interior samples per knot interval in [`horizontality_check`].
const SAMPLES_PER_PIECE: usize = 5;

/// Measures how far a curve is from horizontal.
///
/// On a grid made of all knots and interior samples, reports per pair the
/// largest increment residual
/// `|γ_ij(t) − γ_ij(t₀) − ½∫_{t₀}^t (γ_iγ_j' − γ_i'γ_j)|` (both one-sided
/// values at knots, with the integral accumulated cell by cell) and, for
/// `1 ≤ k ≤ m`, the largest `|D^k γ_ij − 𝒫^k(jets)|`.
pub fn horizontality_check(curve: &HorizontalCurve, tolerance: f64) -> Result<HorizontalityReport> {
    let knots = curve.knots();
    let mut grid: Vec<(f64, bool)> = Vec::new();
    for w in knots.windows(2) {
        grid.push((w[0], true));
        for s in 1..=SAMPLES_PER_PIECE {
            grid.push((w[0] + (w[1] - w[0]) * s as f64 / (SAMPLES_PER_PIECE + 1) as f64, false));
        }
    }
    grid.push((*knots.last().expect("nonempty"), true));
    let m = curve.m;
    let mut scale = 1.0_f64;
    for &(t, _) in &grid {
        for c in &curve.components {
            for v in c.jet_unchecked(t, m, Side::Right) {
                scale = scale.max(1.0 + v.abs());
            }
        }
    }
    let t0 = curve.domain.0;
    let mut report_pairs = Vec::new();
    let mut max_residual = 0.0_f64;
    for (i, j) in pairs(curve.r) {
        let comp = Component::V(i, j);
        let base = curve.eval(comp, 0, t0, Side::Right)?;
        let mut acc = 0.0;
        let mut inc = (0.0_f64, t0);
        let mut der = vec![0.0_f64; m];
        for (n, &(t, is_knot)) in grid.iter().enumerate() {
            if n > 0 {
                acc += curve.area_integral(i, j, grid[n - 1].0, t)?;
            }
            let sides: &[Side] = if is_knot { &[Side::Left, Side::Right] } else { &[Side::Right] };
            for &side in sides {
                let value = curve.eval(comp, 0, t, side)?;
                scale = scale.max(1.0 + value.abs());
                let res = (value - base - acc).abs();
                if res > inc.0 {
                    inc = (res, t);
                }
                if m > 0 {
                    let xi = curve.components[i - 1].jet_unchecked(t, m, side);
                    let xj = curve.components[j - 1].jet_unchecked(t, m, side);
                    for k in 1..=m {
                        let d = curve.eval(comp, k, t, side)?;
                        der[k - 1] = der[k - 1].max((d - pcal(k, &xi, &xj)).abs());
                    }
                }
            }
        }
        max_residual = der.iter().fold(max_residual.max(inc.0), |a, b| a.max(*b));
        report_pairs.push(PairHorizontality {
            i,
            j,
            increment_residual: inc.0,
            increment_at: inc.1,
            derivative_residuals: der,
        });
    }
    Ok(HorizontalityReport {
        pairs: report_pairs,
        max_residual,
        scale,
        tolerance,
        pass: max_residual <= tolerance * scale,
    })
}
