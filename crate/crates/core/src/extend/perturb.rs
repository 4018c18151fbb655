//! Bump perturbations that create prescribed vertical areas on one gap.
//!
//! With perturbations `φ_i` supported inside the gap, the area of pair
//! `(i, j)` changes by `∫ φ_i f_j' − φ_j f_i' + φ_i φ_j'`. The construction
//! recurses over the ordered components:
//!
//! - two components `(p, q)`: a linear correction `φ_q = s Σ v_k η_k` when
//!   `∫|TF_p'| ≥ (b−a)^m`, otherwise a product correction
//!   `φ_p = s Σ x_k ξ_k`, `φ_q = s Σ x_k η_k` with `x` in the common null
//!   space of all moment constraints;
//! - `n ≥ 3` components: the good subsets are halved; the first `n − 1`
//!   components are handled on the first half, the components
//!   `1..n−2, n` on the second half, and the last pair `(n, n−1)` on the
//!   reserved slots of the second half, linearly when every `d_k`,
//!   `k < n`, is big and by a product otherwise. In the second case the
//!   component left out of each sub-problem is added to the protected set.
//!
//! Every construction is orthogonal to `f_y'` for each protected `y`, so
//! pairs fixed earlier keep their areas.

use nalgebra::{DMatrix, SVD};
use serde::Serialize;

use super::good_subsets::{build_good_subsets, GoodSubsets};
use super::ordering::{distances_for, order_from_derivatives, taylor_derivatives, ComponentOrder};
use super::ExtendConfig;
use crate::conditions::residual_areas;
use crate::group::{pair_index, pairs};
use crate::jets::WhitneyField;
use crate::poly::markov::markov_subinterval;
use crate::poly::{cross_moment, make_bump, BumpKind, BumpTerm, PiecewiseFunction, Polynomial};
use crate::{Error, Result};

/// Samples per bump support used for sup-norm reporting.
const SUP_SAMPLES: usize = 64;

/// Kind of one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageKind {
    /// Target already zero; nothing added.
    Skip,
    /// One η bump on a slot inside a Markov sub-interval.
    LinearSingle,
    /// `Σ v_k η_k` with `v` orthogonal to the protected moment vectors.
    LinearProjection,
    /// `ξ`/`η` products on a common null vector of all moment constraints.
    Product,
}

/// Null-space dimensions of a product stage.
#[derive(Clone, Debug, Serialize)]
pub struct NullspaceDims {
    /// Slots used.
    pub slots: usize,
    /// Protected functions (constraints per bump kind).
    pub constraints: usize,
    /// Dimension of the null space of the ξ constraints.
    pub v1: usize,
    /// Dimension of the null space of the η constraints.
    pub v2: usize,
    /// Dimension of the common null space.
    pub joint: usize,
}

/// Declared orthogonality `∫ φ_x f_y' ≈ 0` of one stage.
#[derive(Clone, Debug, Serialize)]
pub struct OrthoCheck {
    /// Perturbed component.
    pub component: usize,
    /// Protected component.
    pub against: usize,
    /// `∫ φ_x f_y'` over the stage's support.
    pub value: f64,
}

/// One stage of the construction.
#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    /// Position in the recursion, e.g. `root/s2/s1`.
    pub path: String,
    /// Construction used.
    pub kind: StageKind,
    /// Pair `(i, j)`, `i > j`, in original labels.
    pub pair: (usize, usize),
    /// Residual `𝒜_ij` before the stage.
    pub target: f64,
    /// Slots available to the stage.
    pub slots: Vec<[f64; 2]>,
    /// Coefficients `v` (linear) or `x` (product) per used slot.
    pub coefficients: Vec<f64>,
    /// Common amplitude factor `s`.
    pub amplitude: f64,
    /// Null-space dimensions for product stages.
    pub nullspace: Option<NullspaceDims>,
    /// Protected components.
    pub protected: Vec<usize>,
    /// Bumps added, with their component.
    pub bumps: Vec<(usize, BumpTerm)>,
    /// Declared orthogonalities.
    pub orthogonality: Vec<OrthoCheck>,
    /// All residuals after the stage, canonical pair order.
    pub residuals_after: Vec<f64>,
    /// Pairs handled by this and earlier stages.
    pub fixed_pairs: Vec<(usize, usize)>,
}

/// Perturbations of one gap with their audit trail.
#[derive(Clone, Debug, Serialize)]
pub struct GapPerturbation {
    /// The gap `[a, b]`.
    pub gap: [f64; 2],
    /// Case classification.
    pub case_tag: String,
    /// Greedy component ordering.
    pub order: ComponentOrder,
    /// Threshold `(b − a)^m` for big distances.
    pub threshold: f64,
    /// Top-level good subsets.
    pub good_subsets: GoodSubsets,
    /// Residual areas before perturbation.
    pub initial_residuals: Vec<f64>,
    /// Residual areas after all stages.
    pub final_residuals: Vec<f64>,
    /// Bump terms per component.
    pub bumps: Vec<Vec<BumpTerm>>,
    /// Stages in execution order.
    pub stages: Vec<StageRecord>,
    /// `max_t |D^k φ_i(t)|` per component and order.
    pub sup_norms: Vec<Vec<f64>>,
    /// `max |𝒜_ij| / (b − a)^{2m}`.
    pub area_to_budget: f64,
}

impl GapPerturbation {
    /// `φ_i` as a function on the gap.
    pub fn phi(&self, i: usize) -> Result<PiecewiseFunction> {
        Ok(PiecewiseFunction::zero(self.gap[0], self.gap[1])?.with_bumps(&self.bumps[i - 1]))
    }

    /// `φ_i` restricted to the bumps added by stages `0..=stage`.
    pub fn phi_after_stage(&self, i: usize, stage: usize) -> Result<PiecewiseFunction> {
        let bumps: Vec<BumpTerm> = self.stages[..=stage]
            .iter()
            .flat_map(|s| s.bumps.iter().filter(|(c, _)| *c == i).map(|(_, b)| b.clone()))
            .collect();
        Ok(PiecewiseFunction::zero(self.gap[0], self.gap[1])?.with_bumps(&bumps))
    }

    /// True when no bump was added.
    pub fn is_trivial(&self) -> bool {
        self.bumps.iter().all(Vec::is_empty)
    }
}

struct Engine<'a> {
    field_m: usize,
    fprime: Vec<Polynomial>,
    derivs: Vec<Polynomial>,
    h: f64,
    a: f64,
    threshold: f64,
    residual: Vec<f64>,
    zero_area: f64,
    config: &'a ExtendConfig,
    stages: Vec<StageRecord>,
    fixed: Vec<(usize, usize)>,
    lambda: f64,
}

fn canonical(q: usize, p: usize) -> ((usize, usize), f64) {
    if q > p {
        ((q, p), 1.0)
    } else {
        ((p, q), -1.0)
    }
}

impl<'a> Engine<'a> {
    fn target(&self, q: usize, p: usize) -> f64 {
        let ((i, j), sign) = canonical(q, p);
        sign * self.residual[pair_index(i, j)]
    }

    /// `∫ bump · f_l'`.
    fn moment(&self, bump: &BumpTerm, l: usize) -> Result<f64> {
        Ok(bump.integrate_polynomial(&self.fprime[l - 1].shift(bump.u() - self.a)))
    }

    fn is_big(&self, d: f64) -> bool {
        d >= self.threshold * (1.0 - 1e-12)
    }

    fn mark_fixed(&mut self, pair: (usize, usize)) {
        if !self.fixed.contains(&pair) {
            self.fixed.push(pair);
        }
    }

    /// Effect `∫ φ_i f_j' − φ_j f_i' + φ_i φ_j'` of a set of bumps on every
    /// pair, canonical order.
    fn effect(&self, bumps: &[(usize, BumpTerm)]) -> Result<Vec<f64>> {
        let r = self.fprime.len();
        let mut out = vec![0.0; pairs(r).len()];
        for (c, b) in bumps {
            for (n, (i, j)) in pairs(r).into_iter().enumerate() {
                if *c == i {
                    out[n] += self.moment(b, j)?;
                } else if *c == j {
                    out[n] -= self.moment(b, i)?;
                }
            }
        }
        for (c1, b1) in bumps {
            for (c2, b2) in bumps {
                if c1 > c2 && b1.interval == b2.interval {
                    let cross = b1.amplitude * b2.amplitude;
                    out[pair_index(*c1, *c2)] += cross * cross_moment(b1.kind, b2.kind);
                }
            }
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn commit(
        &mut self,
        path: &str,
        kind: StageKind,
        q: usize,
        p: usize,
        target: f64,
        slots: &[[f64; 2]],
        coefficients: Vec<f64>,
        amplitude: f64,
        nullspace: Option<NullspaceDims>,
        protected: Vec<usize>,
        bumps: Vec<(usize, BumpTerm)>,
    ) -> Result<()> {
        let eff = self.effect(&bumps)?;
        for (r, e) in self.residual.iter_mut().zip(&eff) {
            *r -= e;
        }
        let mut orthogonality = Vec::new();
        let perturbed: Vec<usize> = {
            let mut t: Vec<usize> = bumps.iter().map(|(c, _)| *c).collect();
            t.sort_unstable();
            t.dedup();
            t
        };
        for &x in &perturbed {
            for &y in &protected {
                let mut value = 0.0;
                for (c, b) in bumps.iter().filter(|(c, _)| *c == x) {
                    debug_assert_eq!(*c, x);
                    value += self.moment(b, y)?;
                }
                orthogonality.push(OrthoCheck {
                    component: x,
                    against: y,
                    value,
                });
            }
        }
        let (pair, _) = canonical(q, p);
        self.mark_fixed(pair);
        let remaining = self.target(q, p);
        if kind != StageKind::Skip && remaining.abs() > self.config.area_tol * target.abs().max(1.0) {
            return Err(Error::GapFailure {
                a: self.a,
                b: self.a + self.h,
                i: pair.0,
                j: pair.1,
                reason: format!("{kind:?} stage at {path} left a residual"),
                residual: remaining,
            });
        }
        self.stages.push(StageRecord {
            path: path.to_string(),
            kind,
            pair,
            target,
            slots: slots.to_vec(),
            coefficients,
            amplitude,
            nullspace,
            protected,
            bumps,
            orthogonality,
            residuals_after: self.residual.clone(),
            fixed_pairs: self.fixed.clone(),
        });
        Ok(())
    }

    fn skip(&mut self, path: &str, q: usize, p: usize, protected: Vec<usize>) -> Result<()> {
        let target = self.target(q, p);
        self.commit(path, StageKind::Skip, q, p, target, &[], Vec::new(), 0.0, None, protected, Vec::new())
    }

    fn solve(&mut self, comps: &[usize], gs: &GoodSubsets, extra: &[usize], path: &str) -> Result<()> {
        let n = comps.len();
        if n == 2 {
            let (p, q) = (comps[0], comps[1]);
            let slots = gs.slots(2, 1).to_vec();
            if self.target(q, p).abs() <= self.zero_area {
                let protected = union(&[p, q], extra);
                return self.skip(path, q, p, protected);
            }
            let d1 = self.derivs[p - 1].integrate_abs(0.0, self.h);
            if self.is_big(d1) {
                return self.linear(path, q, p, extra, &slots, true);
            }
            return self.product(path, p, q, &union(&[p, q], extra), &slots);
        }
        let d = distances_for(&self.derivs, comps, self.h);
        let case_one = (0..n - 1).all(|k| self.is_big(d[k]));
        let (p1, p2) = gs.halve();
        let mut extra1 = extra.to_vec();
        let mut extra2 = extra.to_vec();
        if !case_one {
            extra1.push(comps[n - 1]);
            extra2.push(comps[n - 2]);
        }
        self.solve(&comps[..n - 1], &p1.relabel_drop(n)?, &extra1, &format!("{path}/s1"))?;
        let mut comps2 = comps[..n - 2].to_vec();
        comps2.push(comps[n - 1]);
        self.solve(&comps2, &p2.relabel_drop(n - 1)?, &extra2, &format!("{path}/s2"))?;
        let (p, q) = (comps[n - 2], comps[n - 1]);
        let slots = p2.slots(n, n - 1).to_vec();
        let spath = format!("{path}/s3");
        if self.target(q, p).abs() <= self.zero_area {
            return self.skip(&spath, q, p, union(comps, extra));
        }
        if case_one {
            let orth = union(&comps[..n - 2], extra);
            self.linear(&spath, q, p, &orth, &slots, false)
        } else {
            self.product(&spath, p, q, &union(comps, extra), &slots)
        }
    }

    /// `φ_q = s Σ v_k η_k` changing pair `(q, p)` and orthogonal to `f_y'`
    /// for `y ∈ orth`.
    fn linear(&mut self, path: &str, q: usize, p: usize, orth: &[usize], slots: &[[f64; 2]], allow_single: bool) -> Result<()> {
        let target = self.target(q, p);
        let m = self.field_m;
        let etas: Vec<BumpTerm> = slots
            .iter()
            .map(|s| make_bump(BumpKind::Eta, *s, 1.0, m))
            .collect::<Result<_>>()?;
        let alpha_p: Vec<f64> = etas.iter().map(|e| self.moment(e, p)).collect::<Result<_>>()?;
        let alpha_orth: Vec<Vec<f64>> = orth
            .iter()
            .map(|&y| etas.iter().map(|e| self.moment(e, y)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let norm_p = alpha_p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let protected: Vec<usize> = orth.to_vec();
        if allow_single && norm_p > 0.0 {
            let window = markov_subinterval(&self.derivs[p - 1], 0.0, self.h);
            let (ws, we) = (self.a + window.start, self.a + window.end);
            let slack = 1e-12 * self.h;
            let inside: Vec<usize> = (0..slots.len())
                .filter(|&k| slots[k][0] >= ws - slack && slots[k][1] <= we + slack)
                .collect();
            let pool: Vec<usize> = if inside.is_empty() { (0..slots.len()).collect() } else { inside };
            let k = pool
                .iter()
                .copied()
                .max_by(|&x, &y| alpha_p[x].abs().total_cmp(&alpha_p[y].abs()))
                .expect("slots");
            let tiny = 1e-13 * (1.0 + norm_p);
            if alpha_p[k] != 0.0 && alpha_orth.iter().all(|row| row[k].abs() <= tiny) {
                let s = target / alpha_p[k];
                let mut coefficients = vec![0.0; slots.len()];
                coefficients[k] = 1.0;
                let bumps = vec![(q, etas[k].scaled(s))];
                return self.commit(path, StageKind::LinearSingle, q, p, target, slots, coefficients, s, None, protected, bumps);
            }
        }
        // Gram–Schmidt of the protected moment vectors.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for row in &alpha_orth {
            let mut v = row.clone();
            for e in &basis {
                let c: f64 = v.iter().zip(e).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 * scale && norm > 0.0 {
                basis.push(v.iter().map(|x| x / norm).collect());
            }
        }
        let mut proj = alpha_p.clone();
        for e in &basis {
            let c: f64 = proj.iter().zip(e).map(|(x, y)| x * y).sum();
            for (x, y) in proj.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        let norm = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > self.config.linear_floor * norm_p) || norm == 0.0 {
            let protected = union(&[p, q], orth);
            return self.product(path, p, q, &protected, slots);
        }
        let v: Vec<f64> = proj.iter().map(|x| x / norm).collect();
        let achieved: f64 = v.iter().zip(&alpha_p).map(|(x, y)| x * y).sum();
        let s = target / achieved;
        let bumps: Vec<(usize, BumpTerm)> = etas
            .iter()
            .zip(&v)
            .filter(|(_, c)| **c != 0.0)
            .map(|(e, c)| (q, e.scaled(s * c)))
            .collect();
        self.commit(path, StageKind::LinearProjection, q, p, target, slots, v, s, None, protected, bumps)
    }

    /// `φ_p = s Σ x_k ξ_k`, `φ_q = s Σ x_k η_k` (or the roles swapped) with
    /// `x` orthogonal to every moment vector of the protected set.
    fn product(&mut self, path: &str, p: usize, q: usize, protected: &[usize], slots: &[[f64; 2]]) -> Result<()> {
        let target = self.target(q, p);
        let m = self.field_m;
        let n = if protected.len() <= 3 && slots.len() >= 7 { 7 } else { slots.len() };
        let used = &slots[..n];
        let xis: Vec<BumpTerm> = used.iter().map(|s| make_bump(BumpKind::Xi, *s, 1.0, m)).collect::<Result<_>>()?;
        let etas: Vec<BumpTerm> = used.iter().map(|s| make_bump(BumpKind::Eta, *s, 1.0, m)).collect::<Result<_>>()?;
        let np = protected.len();
        let mut xi_rows = DMatrix::<f64>::zeros(n.max(np), n);
        let mut eta_rows = DMatrix::<f64>::zeros(n.max(np), n);
        for (row, &l) in protected.iter().enumerate() {
            for k in 0..n {
                xi_rows[(row, k)] = self.moment(&xis[k], l)?;
                eta_rows[(row, k)] = self.moment(&etas[k], l)?;
            }
        }
        let mut joint = DMatrix::<f64>::zeros((2 * np).max(n), n);
        for row in 0..np {
            for k in 0..n {
                joint[(row, k)] = xi_rows[(row, k)];
                joint[(np + row, k)] = eta_rows[(row, k)];
            }
        }
        let (joint_null, joint_basis) = nullspace(&joint);
        let (v1, _) = nullspace(&xi_rows);
        let (v2, _) = nullspace(&eta_rows);
        let dims = NullspaceDims {
            slots: n,
            constraints: np,
            v1,
            v2,
            joint: joint_null,
        };
        let Some(mut x) = joint_basis.into_iter().next() else {
            let (i, j) = canonical(q, p).0;
            return Err(Error::GapFailure {
                a: self.a,
                b: self.a + self.h,
                i,
                j,
                reason: format!("empty null space with {n} slots and {np} protected functions at {path}"),
                residual: target,
            });
        };
        let lead = x.iter().copied().fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if lead < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let big_l = self.lambda * x.iter().map(|v| v * v).sum::<f64>();
        let s = (target.abs() / big_l.abs()).sqrt();
        let swap = target * big_l < 0.0;
        let mut bumps = Vec::new();
        for k in 0..n {
            if x[k] == 0.0 {
                continue;
            }
            let (for_p, for_q) = if swap { (&etas[k], &xis[k]) } else { (&xis[k], &etas[k]) };
            bumps.push((p, for_p.scaled(s * x[k])));
            bumps.push((q, for_q.scaled(s * x[k])));
        }
        self.commit(path, StageKind::Product, q, p, target, slots, x, s, Some(dims), protected.to_vec(), bumps)
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = a.to_vec();
    for x in b {
        if !out.contains(x) {
            out.push(*x);
        }
    }
    out
}

/// Relative singular-value cutoff for null spaces.
const NULL_CUTOFF: f64 = 1e-12;

/// Null-space dimension and an orthonormal basis of `{x : M x = 0}`.
fn nullspace(m: &DMatrix<f64>) -> (usize, Vec<Vec<f64>>) {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut sq = DMatrix::<f64>::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(sq, false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let basis: Vec<Vec<f64>> = idx
        .into_iter()
        .filter(|&k| smax == 0.0 || svd.singular_values[k] <= NULL_CUTOFF * smax)
        .map(|k| vt.row(k).iter().copied().collect())
        .collect();
    (basis.len(), basis)
}

fn case_tag(r: usize, order: &ComponentOrder, threshold: f64, first_kind: Option<StageKind>) -> String {
    let big = |d: f64| d >= threshold * (1.0 - 1e-12);
    let k1 = (0..r.saturating_sub(1)).find(|&k| !big(order.distances[k])).map(|k| k + 1);
    match r {
        2 => match first_kind {
            Some(StageKind::Product) => "r2-product".into(),
            Some(StageKind::Skip) | None => "r2-zero".into(),
            _ => "r2-linear".into(),
        },
        3 => match k1 {
            None => "C2".into(),
            Some(1) => "C5".into(),
            Some(_) => "C1".into(),
        },
        _ => match k1 {
            None => "induction-case1".into(),
            Some(k) => format!("induction-case2(k1={k})"),
        },
    }
}

fn sup_norms(bumps: &[Vec<BumpTerm>], m: usize) -> Vec<Vec<f64>> {
    bumps
        .iter()
        .map(|list| {
            let mut out = vec![0.0_f64; m + 1];
            let mut supports: Vec<[f64; 2]> = list.iter().map(|b| b.interval).collect();
            supports.sort_by(|x, y| x[0].total_cmp(&y[0]));
            supports.dedup();
            for s in supports {
                for k in 1..SUP_SAMPLES {
                    let t = s[0] + (s[1] - s[0]) * k as f64 / SUP_SAMPLES as f64;
                    let mut acc = vec![0.0; m + 1];
                    for b in list.iter().filter(|b| b.interval == s) {
                        for (a, d) in acc.iter_mut().zip(b.derivatives(t, m)) {
                            *a += d;
                        }
                    }
                    for (o, a) in out.iter_mut().zip(acc) {
                        *o = o.max(a.abs());
                    }
                }
            }
            out
        })
        .collect()
}

/// Builds perturbations `φ_1..φ_r` on the gap `[a, b]` so that
/// `f_i + φ_i` realise every vertical increment `F_ij(b) − F_ij(a)`.
///
/// `f` are the classical extensions on the gap (jets of `F_i` at both ends).
pub fn extend_gap(field: &WhitneyField, f: &[PiecewiseFunction], a: f64, b: f64, config: &ExtendConfig) -> Result<GapPerturbation> {
    let initial = residual_areas(field, f, a, b)?;
    let r = field.r;
    let m = field.m;
    let h = b - a;
    let derivs = taylor_derivatives(field, a)?;
    let order = order_from_derivatives(&derivs, h);
    let threshold = h.powi(m as i32);
    let gs = build_good_subsets(r, 0, m, a, b)?;
    let scale = initial.max_abs().max(field.jet_scale());
    let fprime = f
        .iter()
        .enumerate()
        .map(|(n, fi)| {
            if fi.pieces().len() != 1 || !fi.bumps().is_empty() || fi.domain() != (a, b) {
                return Err(Error::InvalidInput(format!("extension component {} must be one polynomial on the gap", n + 1)));
            }
            Ok(fi.piece_about(0, a).derivative())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut engine = Engine {
        field_m: m,
        fprime,
        derivs,
        h,
        a,
        threshold,
        residual: initial.areas.clone(),
        zero_area: config.zero_area * scale,
        config,
        stages: Vec::new(),
        fixed: Vec::new(),
        lambda: cross_moment(BumpKind::Eta, BumpKind::Xi),
    };
    engine.solve(&order.permutation, &gs, &[], "root")?;
    let area_scale = initial.max_abs().max(1.0);
    for ((i, j), res) in pairs(r).into_iter().zip(&engine.residual) {
        if res.abs() > config.area_tol * area_scale {
            return Err(Error::GapFailure {
                a,
                b,
                i,
                j,
                reason: "final residual above tolerance".into(),
                residual: *res,
            });
        }
    }
    for s in &engine.stages {
        for o in &s.orthogonality {
            if o.value.abs() > config.ortho_tol * scale {
                return Err(Error::GapFailure {
                    a,
                    b,
                    i: o.component.max(o.against),
                    j: o.component.min(o.against),
                    reason: format!("stage {} is not orthogonal to f_{}'", s.path, o.against),
                    residual: o.value,
                });
            }
        }
    }
    let mut bumps = vec![Vec::new(); r];
    for s in &engine.stages {
        for (c, bt) in &s.bumps {
            bumps[c - 1].push(bt.clone());
        }
    }
    let first_kind = engine.stages.first().map(|s| s.kind);
    let case_tag = case_tag(r, &order, threshold, first_kind);
    let sup = sup_norms(&bumps, m);
    Ok(GapPerturbation {
        gap: [a, b],
        case_tag,
        order,
        threshold,
        good_subsets: gs,
        area_to_budget: initial.max_abs() / h.powi(2 * m as i32),
        initial_residuals: initial.areas,
        final_residuals: engine.residual.clone(),
        bumps,
        stages: engine.stages,
        sup_norms: sup,
    })
}
