//! Assembly of the extended curve from per-gap perturbations, and its
//! verification against the field.

use rayon::prelude::*;
use serde::Serialize;

use super::perturb::{extend_gap, GapPerturbation};
use super::ExtendConfig;
use crate::group::{horizontality_check, lift_segment, pairs, Component, CurvePiece, HorizontalCurve, HorizontalityReport, VerticalComponent};
use crate::jets::{hermite_extend_gap, ComponentData, WhitneyField};
use crate::poly::{BumpTerm, PiecewiseFunction, Polynomial, Side};
use crate::{Error, Result};

/// Outcome of one gap.
#[derive(Clone, Debug, Serialize)]
pub struct GapRecord {
    /// Left end.
    pub a: f64,
    /// Right end.
    pub b: f64,
    /// Hermite extension per component, in powers of `(x − a)`.
    pub hermite: Vec<Polynomial>,
    /// Perturbation data, absent for skipped gaps.
    pub perturbation: Option<GapPerturbation>,
    /// True when the gap was shorter than the floor.
    pub skipped: bool,
    /// Diagnostic for skipped gaps.
    pub warning: Option<String>,
}

/// An extended curve with its per-gap records.
#[derive(Clone, Debug)]
pub struct Extension {
    /// The assembled curve on `[min K, max K]`.
    pub curve: HorizontalCurve,
    /// One record per gap, left to right.
    pub gaps: Vec<GapRecord>,
}

/// Tolerances of [`verify_extension`], all relative to the field scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Jet mismatch on `K`.
    pub jet: f64,
    /// Horizontality residual.
    pub horizontality: f64,
    /// One-sided derivative jump at knots.
    pub smoothness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        ExtendConfig::default().tolerances()
    }
}

/// Worst jet mismatch of one component and order.
#[derive(Clone, Debug, Serialize)]
pub struct JetCheck {
    /// Component label.
    pub component: String,
    /// Derivative order.
    pub order: usize,
    /// Largest `|D^k γ(t) − F^k(t)|` over `K` and both sides.
    pub max_residual: f64,
    /// Point of the largest mismatch.
    pub at: f64,
}

/// Worst one-sided derivative jump at one interior knot.
#[derive(Clone, Debug, Serialize)]
pub struct KnotCheck {
    /// The knot.
    pub t: f64,
    /// Component of the largest jump.
    pub component: String,
    /// Order of the largest jump.
    pub order: usize,
    /// `|D^k γ(t⁺) − D^k γ(t⁻)|`.
    pub jump: f64,
}

/// Result of [`verify_extension`].
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    /// Scale used for relative tolerances.
    pub scale: f64,
    /// Tolerances applied.
    pub tolerances: Tolerances,
    /// Jet matching per component and order.
    pub jets: Vec<JetCheck>,
    /// Largest jet residual.
    pub max_jet_residual: f64,
    /// Jet section verdict.
    pub jets_pass: bool,
    /// Horizontality section.
    pub horizontality: HorizontalityReport,
    /// Knot smoothness per interior knot.
    pub knots: Vec<KnotCheck>,
    /// Largest knot jump.
    pub max_knot_jump: f64,
    /// Knot section verdict.
    pub knots_pass: bool,
    /// All sections pass.
    pub pass: bool,
}

/// A piece of `K` or a gap between two consecutive elements.
enum Segment {
    Interval(usize, [f64; 2]),
    Gap(usize, [f64; 2]),
}

fn segments(field: &WhitneyField) -> Vec<Segment> {
    let mut out = Vec::new();
    let gaps = field.k.gaps();
    for n in 0..field.k.len() {
        let [u, v] = field.k.element(n);
        if v > u {
            out.push(Segment::Interval(n, [u, v]));
        }
        if n < gaps.len() {
            let (a, b) = gaps[n];
            out.push(Segment::Gap(n, [a, b]));
        }
    }
    out
}

fn interval_poly(field: &WhitneyField, c: Component, n: usize, start: f64) -> Result<Polynomial> {
    match field.data(c) {
        ComponentData::PerIntervalPoly(p) => Ok(p[n].shift(start)),
        ComponentData::Pointwise(_) => Err(Error::InvalidInput("pointwise data on a nondegenerate interval".into())),
    }
}

fn process_gap(field: &WhitneyField, a: f64, b: f64, floor: f64, config: &ExtendConfig) -> Result<(GapRecord, Option<Error>)> {
    let hermite = (1..=field.r)
        .map(|i| hermite_extend_gap(&field.jet(Component::H(i), a)?, &field.jet(Component::H(i), b)?, a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut record = GapRecord {
        a,
        b,
        hermite,
        perturbation: None,
        skipped: false,
        warning: None,
    };
    if b - a < floor {
        record.skipped = true;
        record.warning = Some(format!("gap [{a}, {b}] is shorter than the floor {floor:e}; vertical jets at {b} are not enforced"));
        return Ok((record, None));
    }
    let f = record
        .hermite
        .iter()
        .map(|p| PiecewiseFunction::from_local_polynomial(p.clone(), a, b))
        .collect::<Result<Vec<_>>>()?;
    match extend_gap(field, &f, a, b, config) {
        Ok(p) => {
            record.perturbation = Some(p);
            Ok((record, None))
        }
        Err(e) => {
            record.warning = Some(e.to_string());
            Ok((record, Some(e)))
        }
    }
}

/// Like [`extend_field`], but gaps whose perturbation fails keep their
/// Hermite extension; the failures are returned alongside the extension.
pub fn extend_field_partial(field: &WhitneyField, config: &ExtendConfig) -> Result<(Extension, Vec<Error>)> {
    let (lo, hi) = field.k.bounds();
    if !(hi > lo) {
        return Err(Error::InvalidInput("K must contain more than one point".into()));
    }
    let floor = config.gap_floor * (hi - lo);
    let results = field
        .k
        .gaps()
        .into_par_iter()
        .map(|(a, b)| process_gap(field, a, b, floor, config))
        .collect::<Result<Vec<_>>>()?;
    let mut gaps = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (g, e) in results {
        gaps.push(g);
        failures.extend(e);
    }
    let curve = assemble_curve(field, &gaps)?;
    Ok((Extension { curve, gaps }, failures))
}

/// Hermite extension, per-gap perturbation and lifting of a field.
///
/// Gaps are processed in parallel. Gaps shorter than
/// `config.gap_floor · diam K` keep the raw Hermite extension and carry a
/// warning. The first gap failure is returned as the error.
pub fn extend_field(field: &WhitneyField, config: &ExtendConfig) -> Result<Extension> {
    let (ext, failures) = extend_field_partial(field, config)?;
    match failures.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(ext),
    }
}

/// The curve `f_i + φ_i` on gaps and the field's own polynomials on the
/// intervals of `K`, lifted from `F_ij(a_l)` at each gap.
pub fn assemble_curve(field: &WhitneyField, gaps: &[GapRecord]) -> Result<HorizontalCurve> {
    let segs = segments(field);
    if segs.is_empty() {
        return Err(Error::InvalidInput("K must contain more than one point".into()));
    }
    let mut breakpoints: Vec<f64> = Vec::with_capacity(segs.len() + 1);
    for s in &segs {
        let [u, _] = match s {
            Segment::Interval(_, iv) | Segment::Gap(_, iv) => *iv,
        };
        breakpoints.push(u);
    }
    breakpoints.push(match segs.last().expect("nonempty") {
        Segment::Interval(_, iv) | Segment::Gap(_, iv) => iv[1],
    });
    let mut components = Vec::with_capacity(field.r);
    for i in 1..=field.r {
        let mut pieces = Vec::with_capacity(segs.len());
        let mut bumps: Vec<BumpTerm> = Vec::new();
        for s in &segs {
            match s {
                Segment::Interval(n, iv) => pieces.push(interval_poly(field, Component::H(i), *n, iv[0])?),
                Segment::Gap(n, _) => {
                    let g = &gaps[*n];
                    pieces.push(g.hermite[i - 1].clone());
                    if let Some(p) = &g.perturbation {
                        bumps.extend(p.bumps[i - 1].iter().cloned());
                    }
                }
            }
        }
        components.push(PiecewiseFunction::new(breakpoints.clone(), pieces, bumps)?);
    }
    let mut vertical = Vec::with_capacity(field.vertical.len());
    for (i, j) in pairs(field.r) {
        let mut pieces = Vec::with_capacity(segs.len());
        for s in &segs {
            match s {
                Segment::Interval(n, iv) => pieces.push(CurvePiece::Poly(interval_poly(field, Component::V(i, j), *n, iv[0])?)),
                Segment::Gap(_, [a, b]) => {
                    let anchor = field.value(Component::V(i, j), 0, *a)?;
                    let (piece, _) = lift_segment(&components[i - 1], &components[j - 1], *a, *b, anchor)?;
                    pieces.push(piece);
                }
            }
        }
        vertical.push(VerticalComponent {
            i,
            j,
            breakpoints: breakpoints.clone(),
            pieces,
        });
    }
    HorizontalCurve::new(field.r, field.m, components, vertical)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Checks jets on `K`, horizontality and knot smoothness of a curve.
pub fn verify_extension(curve: &HorizontalCurve, field: &WhitneyField, tolerances: &Tolerances) -> Result<VerificationReport> {
    if curve.r != field.r || curve.m != field.m {
        return Err(Error::Dimension(format!(
            "curve has (r, m) = ({}, {}) but the field has ({}, {})",
            curve.r, curve.m, field.r, field.m
        )));
    }
    let scale = field.jet_scale();
    let points = field.k.sample_points(true);
    let mut jets = Vec::new();
    for c in field.components() {
        for k in 0..=field.m {
            let mut worst = (0.0_f64, points[0]);
            for &t in &points {
                let want = field.value(c, k, t)?;
                for side in [Side::Left, Side::Right] {
                    let got = curve.eval(c, k, t, side)?;
                    let d = (got - want).abs();
                    if !(d <= worst.0) {
                        worst = (d, t);
                    }
                }
            }
            jets.push(JetCheck {
                component: c.to_string(),
                order: k,
                max_residual: worst.0,
                at: worst.1,
            });
        }
    }
    let max_jet_residual = jets.iter().fold(0.0, |a, j| nan_max(a, j.max_residual));
    let jets_pass = max_jet_residual <= tolerances.jet * scale;
    let horizontality = horizontality_check(curve, tolerances.horizontality)?;
    let (t0, t1) = curve.domain;
    let mut knots = Vec::new();
    for t in curve.knots() {
        if t <= t0 || t >= t1 {
            continue;
        }
        let mut worst = KnotCheck {
            t,
            component: String::new(),
            order: 0,
            jump: 0.0,
        };
        for c in curve.all_components() {
            for k in 0..=curve.m {
                let jump = (curve.eval(c, k, t, Side::Right)? - curve.eval(c, k, t, Side::Left)?).abs();
                if !(jump <= worst.jump) || worst.component.is_empty() {
                    worst = KnotCheck {
                        t,
                        component: c.to_string(),
                        order: k,
                        jump,
                    };
                }
            }
        }
        knots.push(worst);
    }
    let max_knot_jump = knots.iter().fold(0.0, |a, k| nan_max(a, k.jump));
    let knots_pass = max_knot_jump <= tolerances.smoothness * scale;
    let pass = jets_pass && knots_pass && horizontality.pass;
    Ok(VerificationReport {
        scale,
        tolerances: *tolerances,
        jets,
        max_jet_residual,
        jets_pass,
        horizontality,
        knots,
        max_knot_jump,
        knots_pass,
        pass,
    })
}
