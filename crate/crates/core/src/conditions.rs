//! The A/V quantities, component-wise and generalized A/V audits, residual
//! areas of candidate extensions and the algebraic identity behind the
//! generalized condition.

use rayon::prelude::*;
use serde::Serialize;

use crate::group::{pair_index, pairs, signed_area, Component};
use crate::jets::{classify_trend, dyadic_summary, ScaleBucket, Trend, WhitneyField};
use crate::poly::{l2_least_squares_poly, PiecewiseFunction, Polynomial, Side};
use crate::{Error, Result};

/// `A_ij(a, b)`, `V_ij(a, b)` and their ratio.
#[derive(Clone, Debug, Serialize)]
pub struct AvSample {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Left point.
    pub a: f64,
    /// Right point.
    pub b: f64,
    /// `A_ij(a, b)`.
    #[serde(rename = "A")]
    pub a_value: f64,
    /// `V_ij(a, b)`.
    #[serde(rename = "V")]
    pub v: f64,
    /// `A / V`.
    pub ratio: f64,
}

/// Taylor data and all `A_kn(a, b)` at one pair of points.
#[derive(Clone, Debug)]
pub struct AvTable {
    /// Number of generators.
    pub r: usize,
    /// Jet order.
    pub m: usize,
    /// Left point.
    pub a: f64,
    /// Right point.
    pub b: f64,
    /// `(T_a^m F_k)'` in powers of `(x − a)`, `k = 1..r`.
    pub taylor_derivatives: Vec<Polynomial>,
    /// `∫_a^b |(T_a^m F_k)'|`.
    pub l1_derivatives: Vec<f64>,
    /// `A_kn(a, b)` in canonical pair order.
    pub areas: Vec<f64>,
}

impl AvTable {
    /// Builds the table; requires `a < b` in `K`.
    pub fn new(field: &WhitneyField, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidInput(format!("A/V pair needs a < b, got ({a}, {b})")));
        }
        let h = b - a;
        let r = field.r;
        let mut taylor = Vec::with_capacity(r);
        let mut defect = Vec::with_capacity(r);
        let mut at_a = Vec::with_capacity(r);
        for i in 1..=r {
            let t = field.taylor_local(Component::H(i), a)?;
            let fb = field.value(Component::H(i), 0, b)?;
            defect.push(fb - t.eval(h));
            at_a.push(t.coeff(0));
            taylor.push(t);
        }
        let derivs: Vec<Polynomial> = taylor.iter().map(Polynomial::derivative).collect();
        let l1 = derivs.iter().map(|d| d.integrate_abs(0.0, h)).collect();
        let mut areas = Vec::new();
        for (i, j) in pairs(r) {
            let (ti, tj) = (&taylor[i - 1], &taylor[j - 1]);
            let integrand = &(ti * &derivs[j - 1]) - &(&derivs[i - 1] * tj);
            let fij_b = field.value(Component::V(i, j), 0, b)?;
            let fij_a = field.value(Component::V(i, j), 0, a)?;
            let val = fij_b - fij_a - 0.5 * integrand.integrate(0.0, h) + 0.5 * at_a[j - 1] * defect[i - 1]
                - 0.5 * at_a[i - 1] * defect[j - 1];
            areas.push(val);
        }
        Ok(Self {
            r,
            m: field.m,
            a,
            b,
            taylor_derivatives: derivs,
            l1_derivatives: l1,
            areas,
        })
    }

    /// `A_ij` for `i > j`, and `−A_ji` for `i < j`.
    pub fn area(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.areas[pair_index(i, j)],
            std::cmp::Ordering::Less => -self.areas[pair_index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// The component-wise sample for `(i, j)`.
    pub fn sample(&self, i: usize, j: usize) -> AvSample {
        let h = self.b - self.a;
        let m = self.m as i32;
        let v = h.powi(2 * m) + h.powi(m) * (self.l1_derivatives[i - 1] + self.l1_derivatives[j - 1]);
        let a_value = self.areas[pair_index(i, j)];
        AvSample {
            i,
            j,
            a: self.a,
            b: self.b,
            a_value,
            v,
            ratio: a_value / v,
        }
    }
}

/// `A_ij(a, b)` and `V_ij(a, b)` for one pair `a < b` of points of `K`.
pub fn compute_av(field: &WhitneyField, i: usize, j: usize, a: f64, b: f64) -> Result<AvSample> {
    check_pair(field.r, i, j)?;
    Ok(AvTable::new(field, a, b)?.sample(i, j))
}

fn check_pair(r: usize, i: usize, j: usize) -> Result<()> {
    if !(1 <= j && j < i && i <= r) {
        return Err(Error::InvalidInput(format!("({i},{j}) is not a pair 1 <= j < i <= {r}")));
    }
    Ok(())
}

/// The indices `{1..r} \ {i, j}` in increasing order; coefficient vectors
/// `c`, `c̃` are aligned with this list.
pub fn free_indices(r: usize, i: usize, j: usize) -> Vec<usize> {
    (1..=r).filter(|k| *k != i && *k != j).collect()
}

/// Assembles `E_ij` from an antisymmetric pair function `area(k, n)`
/// (`area(k, n) = −area(n, k)`), with `c` and `c̃` aligned with
/// [`free_indices`].
pub fn assemble_e<F: Fn(usize, usize) -> f64>(r: usize, i: usize, j: usize, c: &[f64], ct: &[f64], area: F) -> f64 {
    let free = free_indices(r, i, j);
    let mut e = area(i, j);
    for (pos, &k) in free.iter().enumerate() {
        if k < j {
            e += ct[pos] * area(j, k);
        } else {
            e -= ct[pos] * area(k, j);
        }
        if k < i {
            e -= c[pos] * area(i, k);
        } else {
            e += c[pos] * area(k, i);
        }
    }
    for (pn, &n) in free.iter().enumerate() {
        for (pk, &k) in free.iter().enumerate() {
            if k > n {
                e += (c[pn] * ct[pk] - ct[pn] * c[pk]) * area(k, n);
            }
        }
    }
    e
}

/// `E_ij`, `Δ_i`, `Δ_j` and the generalized ratio for one coefficient choice.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedSample {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Left point.
    pub a: f64,
    /// Right point.
    pub b: f64,
    /// Coefficients `c_k`, aligned with [`free_indices`].
    pub c: Vec<f64>,
    /// Coefficients `c̃_k`, aligned with [`free_indices`].
    pub c_tilde: Vec<f64>,
    /// `E_ij(a, b, c, c̃)`.
    #[serde(rename = "E")]
    pub e: f64,
    /// `∫|T_aF_i' − Σ c̃_k T_aF_k'|`.
    pub delta_i: f64,
    /// `∫|T_aF_j' − Σ c_k T_aF_k'|`.
    pub delta_j: f64,
    /// `(b − a)^{2m} + (b − a)^m (Δ_i + Δ_j)`.
    pub denom: f64,
    /// `|E| / denom`.
    pub ratio: f64,
}

fn delta(table: &AvTable, target: usize, free: &[usize], coeffs: &[f64]) -> f64 {
    let mut p = table.taylor_derivatives[target - 1].clone();
    for (k, c) in free.iter().zip(coeffs) {
        if *c != 0.0 {
            p = &p - &table.taylor_derivatives[k - 1].scale(*c);
        }
    }
    p.integrate_abs(0.0, table.b - table.a)
}

fn generalized_from_parts(table: &AvTable, i: usize, j: usize, c: &[f64], ct: &[f64], di: f64, dj: f64) -> GeneralizedSample {
    let h = table.b - table.a;
    let m = table.m as i32;
    let e = assemble_e(table.r, i, j, c, ct, |k, n| table.area(k, n));
    let denom = h.powi(2 * m) + h.powi(m) * (di + dj);
    GeneralizedSample {
        i,
        j,
        a: table.a,
        b: table.b,
        c: c.to_vec(),
        c_tilde: ct.to_vec(),
        e,
        delta_i: di,
        delta_j: dj,
        denom,
        ratio: e.abs() / denom,
    }
}

/// The generalized sample from a precomputed table.
pub fn generalized_from_table(table: &AvTable, i: usize, j: usize, c: &[f64], ct: &[f64]) -> Result<GeneralizedSample> {
    check_pair(table.r, i, j)?;
    let free = free_indices(table.r, i, j);
    if c.len() != free.len() || ct.len() != free.len() {
        return Err(Error::Dimension(format!(
            "coefficient vectors for ({i},{j}) must be indexed by {free:?}, got lengths {} and {}",
            c.len(),
            ct.len()
        )));
    }
    let di = delta(table, i, &free, ct);
    let dj = delta(table, j, &free, c);
    Ok(generalized_from_parts(table, i, j, c, ct, di, dj))
}

/// `E_ij(a, b, c, c̃)` and its normalisation for one coefficient choice.
pub fn compute_generalized(
    field: &WhitneyField,
    i: usize,
    j: usize,
    a: f64,
    b: f64,
    c: &[f64],
    c_tilde: &[f64],
) -> Result<GeneralizedSample> {
    check_pair(field.r, i, j)?;
    generalized_from_table(&AvTable::new(field, a, b)?, i, j, c, c_tilde)
}

/// Consecutive pairs of sample points of `K`, excluding a tagged tail.
pub fn default_pairs(field: &WhitneyField) -> Vec<(f64, f64)> {
    let pts = field.k.sample_points(false);
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Output of [`audit_componentwise`].
#[derive(Clone, Debug, Serialize)]
pub struct ComponentwiseAudit {
    /// One sample per pair of points and per `(i, j)`.
    pub samples: Vec<AvSample>,
    /// Largest `|A/V|` per dyadic scale.
    pub by_scale: Vec<ScaleBucket>,
    /// Regression slope of `log₂` bucket maxima per refinement level.
    pub slope: Option<f64>,
    /// Trend class of the slope.
    pub trend: Trend,
}

/// Component-wise `A/V` ratios on the given pairs.
pub fn audit_componentwise(field: &WhitneyField, point_pairs: &[(f64, f64)]) -> Result<ComponentwiseAudit> {
    let tables: Vec<AvTable> = point_pairs
        .par_iter()
        .map(|&(a, b)| AvTable::new(field, a.min(b), a.max(b)))
        .collect::<Result<_>>()?;
    let mut samples = Vec::new();
    let mut scale = Vec::new();
    for t in &tables {
        let mut worst = 0.0_f64;
        for (i, j) in pairs(field.r) {
            let s = t.sample(i, j);
            worst = worst.max(s.ratio.abs());
            samples.push(s);
        }
        scale.push((t.b - t.a, worst));
    }
    let by_scale = dyadic_summary(&scale);
    let (slope, trend) = classify_trend(&by_scale);
    Ok(ComponentwiseAudit {
        samples,
        by_scale,
        slope,
        trend,
    })
}

/// Candidate set of the generalized audit.
#[derive(Clone, Debug, Serialize)]
pub struct AuditConfig {
    /// Coefficient bound `Ĉ`: candidates lie in `[−Ĉ, Ĉ]^{r−2}`.
    pub cbound: f64,
    /// Grid step.
    pub grid_step: f64,
    /// Full grids are used only when `r` is at most this value.
    pub grid_max_r: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            cbound: 4.0,
            grid_step: 0.25,
            grid_max_r: 4,
        }
    }
}

/// Generalized-audit result for one pair of points and one `(i, j)`.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedRecord {
    /// Zero coefficients (the component-wise quantity).
    pub zero: GeneralizedSample,
    /// Clipped L² minimisers of `Δ_j` (for `c`) and `Δ_i` (for `c̃`).
    pub minimizer: GeneralizedSample,
    /// Best grid candidate, when a grid is used.
    pub grid_best: Option<GeneralizedSample>,
    /// Best candidate overall.
    pub best: GeneralizedSample,
}

/// Output of [`audit_generalized`].
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedAudit {
    /// Configuration used.
    pub config: AuditConfig,
    /// One record per pair of points and per `(i, j)`.
    pub records: Vec<GeneralizedRecord>,
    /// Largest best ratio per dyadic scale; a lower bound of the supremum
    /// over `[−Ĉ, Ĉ]^{r−2}`.
    pub by_scale: Vec<ScaleBucket>,
    /// Regression slope of `log₂` bucket maxima per refinement level.
    pub slope: Option<f64>,
    /// Trend class of the slope.
    pub trend: Trend,
}

fn grid_values(cbound: f64, step: f64) -> Vec<f64> {
    let n = (cbound / step).floor() as i64;
    (-n..=n).map(|k| k as f64 * step).collect()
}

fn product_grid(values: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

fn minimizer(table: &AvTable, target: usize, free: &[usize], cbound: f64) -> Vec<f64> {
    let basis: Vec<Polynomial> = free.iter().map(|k| table.taylor_derivatives[k - 1].clone()).collect();
    let ls = l2_least_squares_poly(&table.taylor_derivatives[target - 1], &basis, 0.0, table.b - table.a);
    ls.coefficients.iter().map(|c| c.clamp(-cbound, cbound)).collect()
}

/// `E_ij` as the bilinear form `e0 + β·c + α·c̃ + cᵀ M c̃`.
struct BilinearE {
    e0: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    mixed: Vec<Vec<f64>>,
}

impl BilinearE {
    fn new(table: &AvTable, i: usize, j: usize, d: usize) -> Self {
        let eval = |c: &[f64], ct: &[f64]| assemble_e(table.r, i, j, c, ct, |k, n| table.area(k, n));
        let zero = vec![0.0; d];
        let unit = |k: usize| {
            let mut v = zero.clone();
            v[k] = 1.0;
            v
        };
        let e0 = eval(&zero, &zero);
        let beta: Vec<f64> = (0..d).map(|k| eval(&unit(k), &zero) - e0).collect();
        let alpha: Vec<f64> = (0..d).map(|k| eval(&zero, &unit(k)) - e0).collect();
        let mixed = (0..d)
            .map(|n| (0..d).map(|k| eval(&unit(n), &unit(k)) - e0 - beta[n] - alpha[k]).collect())
            .collect();
        Self { e0, alpha, beta, mixed }
    }

    /// For fixed `c`: the constant part and the coefficients of `c̃`.
    fn partial(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let u = self.e0 + c.iter().zip(&self.beta).map(|(a, b)| a * b).sum::<f64>();
        let w = (0..self.alpha.len())
            .map(|k| self.alpha[k] + c.iter().zip(&self.mixed).map(|(cn, row)| cn * row[k]).sum::<f64>())
            .collect();
        (u, w)
    }
}

fn record_for(table: &AvTable, i: usize, j: usize, config: &AuditConfig) -> GeneralizedRecord {
    let free = free_indices(table.r, i, j);
    let zeros = vec![0.0; free.len()];
    let c_min = minimizer(table, j, &free, config.cbound);
    let ct_min = minimizer(table, i, &free, config.cbound);
    let use_grid = !free.is_empty() && table.r <= config.grid_max_r && config.grid_step > 0.0;
    let mut c_list = vec![zeros.clone(), c_min];
    let mut ct_list = vec![zeros.clone(), ct_min];
    let base = c_list.len();
    if use_grid {
        let g = product_grid(&grid_values(config.cbound, config.grid_step), free.len());
        c_list.extend(g.iter().cloned());
        ct_list.extend(g);
    }
    let dj: Vec<f64> = c_list.iter().map(|c| delta(table, j, &free, c)).collect();
    let di: Vec<f64> = ct_list.iter().map(|c| delta(table, i, &free, c)).collect();
    let sample = |x: usize, y: usize| generalized_from_parts(table, i, j, &c_list[x], &ct_list[y], di[y], dj[x]);
    let zero = sample(0, 0);
    let min = sample(1, 1);
    let mut best = if min.ratio > zero.ratio { min.clone() } else { zero.clone() };
    let mut best_grid: Option<(f64, usize, usize)> = None;
    let h = table.b - table.a;
    let m = table.m as i32;
    let form = BilinearE::new(table, i, j, free.len());
    for x in 0..c_list.len() {
        let (u, w) = form.partial(&c_list[x]);
        for y in 0..ct_list.len() {
            let e = u + ct_list[y].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let ratio = e.abs() / (h.powi(2 * m) + h.powi(m) * (di[y] + dj[x]));
            if (x >= base || y >= base) && best_grid.is_none_or(|g| ratio > g.0) {
                best_grid = Some((ratio, x, y));
            }
            if ratio > best.ratio {
                best = sample(x, y);
            }
        }
    }
    GeneralizedRecord {
        zero,
        minimizer: min,
        grid_best: best_grid.map(|(_, x, y)| sample(x, y)),
        best,
    }
}

/// Generalized `A/V` ratios over the candidate set of `config`.
///
/// For each pair of points and each `(i, j)` the candidates are the zero
/// vector, the clipped L² minimisers and, for `r ≤ grid_max_r`, the full
/// grid of step `grid_step` on `[−Ĉ, Ĉ]^{r−2}`; all combinations of a `c`
/// candidate with a `c̃` candidate are evaluated. The reported maxima are
/// lower bounds for the supremum over the box.
pub fn audit_generalized(field: &WhitneyField, point_pairs: &[(f64, f64)], config: &AuditConfig) -> Result<GeneralizedAudit> {
    if !(config.cbound > 0.0) {
        return Err(Error::InvalidInput("the coefficient bound must be positive".into()));
    }
    let per_pair: Vec<Vec<GeneralizedRecord>> = point_pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<GeneralizedRecord>> {
            let table = AvTable::new(field, a.min(b), a.max(b))?;
            Ok(pairs(field.r)
                .into_iter()
                .map(|(i, j)| record_for(&table, i, j, config))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut scale = Vec::new();
    let mut records = Vec::new();
    for recs in per_pair {
        let worst = recs.iter().map(|r| r.best.ratio).fold(0.0, f64::max);
        if let Some(r) = recs.first() {
            scale.push((r.best.b - r.best.a, worst));
        }
        records.extend(recs);
    }
    let by_scale = dyadic_summary(&scale);
    let (slope, trend) = classify_trend(&by_scale);
    Ok(GeneralizedAudit {
        config: config.clone(),
        records,
        by_scale,
        slope,
        trend,
    })
}

/// Residual areas `𝒜_ij = F_ij(b) − F_ij(a) − ½∫_a^b (f_i f_j' − f_i' f_j)`
/// of a candidate extension on a gap.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualAreas {
    /// Left end of the gap.
    pub a: f64,
    /// Right end of the gap.
    pub b: f64,
    /// One residual per pair, in canonical order.
    pub areas: Vec<f64>,
}

impl ResidualAreas {
    /// `𝒜_ij`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.areas[pair_index(i, j)]
    }

    /// Largest absolute residual.
    pub fn max_abs(&self) -> f64 {
        self.areas.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Relative tolerance of the endpoint check in [`residual_areas`].
pub const ENDPOINT_TOL: f64 = 1e-9;

/// Residual areas of the extension `f` on the gap `[a, b]`.
///
/// Every `f_i` must match the jet of `F_i` at `a` and `b` within
/// `1e-9 · scale`.
pub fn residual_areas(field: &WhitneyField, f: &[PiecewiseFunction], a: f64, b: f64) -> Result<ResidualAreas> {
    if f.len() != field.r {
        return Err(Error::Dimension(format!("{} extension components for r = {}", f.len(), field.r)));
    }
    let scale = field.jet_scale();
    for (n, fi) in f.iter().enumerate() {
        for (t, side) in [(a, Side::Right), (b, Side::Left)] {
            let jet = field.jet(Component::H(n + 1), t)?;
            for (k, want) in jet.values.iter().enumerate() {
                let got = fi.eval_side(k, t, side)?;
                let residual = (got - want).abs();
                if residual > ENDPOINT_TOL * scale {
                    return Err(Error::EndpointMismatch {
                        component: format!("f_{} (derivative {k})", n + 1),
                        point: t,
                        residual,
                    });
                }
            }
        }
    }
    let mut areas = Vec::new();
    for (i, j) in pairs(field.r) {
        let target = field.value(Component::V(i, j), 0, b)? - field.value(Component::V(i, j), 0, a)?;
        areas.push(target - signed_area(&f[i - 1], &f[j - 1], a, b)?);
    }
    Ok(ResidualAreas { a, b, areas })
}

/// Largest pointwise gap in the identity
/// `Σ-combination of a_kn = ε_i ε_j' − ε_i' ε_j`, where
/// `a_kn = f_k f_n' − f_k' f_n`, `ε_i = f_i − Σ c̃_k f_k` and
/// `ε_j = f_j − Σ c_k f_k`.
pub fn algebraic_identity_residual(
    f: &[PiecewiseFunction],
    c: &[f64],
    c_tilde: &[f64],
    i: usize,
    j: usize,
    sample_points: &[f64],
) -> Result<f64> {
    let r = f.len();
    check_pair(r, i, j)?;
    let free = free_indices(r, i, j);
    if c.len() != free.len() || c_tilde.len() != free.len() {
        return Err(Error::Dimension(format!("coefficient vectors must be indexed by {free:?}")));
    }
    let mut worst = 0.0_f64;
    for &t in sample_points {
        let jets: Vec<[f64; 2]> = f
            .iter()
            .map(|g| -> Result<[f64; 2]> { Ok([g.eval_side(0, t, Side::Right)?, g.eval_side(1, t, Side::Right)?]) })
            .collect::<Result<_>>()?;
        let a = |k: usize, n: usize| jets[k - 1][0] * jets[n - 1][1] - jets[k - 1][1] * jets[n - 1][0];
        let lhs = assemble_e(r, i, j, c, c_tilde, a);
        let mut ei = jets[i - 1];
        let mut ej = jets[j - 1];
        for (pos, &k) in free.iter().enumerate() {
            for d in 0..2 {
                ei[d] -= c_tilde[pos] * jets[k - 1][d];
                ej[d] -= c[pos] * jets[k - 1][d];
            }
        }
        let rhs = ei[0] * ej[1] - ei[1] * ej[0];
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
