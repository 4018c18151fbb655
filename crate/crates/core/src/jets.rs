//! Jets and Whitney fields on compact subsets of ℝ, Taylor polynomials and
//! remainders, horizontal compatibility, and two-point Hermite extension.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::group::{pair_count, pair_index, pairs, pcal, Component, HorizontalCurve};
use crate::poly::{Polynomial, Side};
use crate::{Error, Result};

/// A compact set: finitely many points or finitely many closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub enum CompactSet {
    /// Sorted distinct points.
    Points(Vec<f64>),
    /// Sorted disjoint closed intervals, possibly degenerate.
    Intervals {
        /// The intervals `[u, v]`.
        intervals: Vec<[f64; 2]>,
        /// The last interval is a degenerate marker for an accumulation point
        /// of a truncated infinite set; audits never use it.
        tail_tag: bool,
    },
}

impl CompactSet {
    /// A finite set of points (sorted on construction).
    pub fn points(mut pts: Vec<f64>) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::InvalidInput("a compact set needs at least one point".into()));
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("points must be finite".into()));
        }
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("points must be distinct".into()));
        }
        Ok(Self::Points(pts))
    }

    /// A finite union of sorted, disjoint closed intervals.
    pub fn intervals(intervals: Vec<[f64; 2]>, tail_tag: bool) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidInput("a compact set needs at least one interval".into()));
        }
        for (n, iv) in intervals.iter().enumerate() {
            if !(iv[0].is_finite() && iv[1].is_finite()) || iv[1] < iv[0] {
                return Err(Error::InvalidInput(format!("interval {n} is not a finite [u, v] with u <= v")));
            }
            if n > 0 && !(iv[0] > intervals[n - 1][1]) {
                return Err(Error::InvalidInput(format!("interval {n} is not disjoint from and after interval {}", n - 1)));
            }
        }
        if tail_tag && intervals.last().is_some_and(|iv| iv[0] != iv[1]) {
            return Err(Error::InvalidInput("the tagged tail interval must be degenerate".into()));
        }
        Ok(Self::Intervals { intervals, tail_tag })
    }

    /// Number of points or intervals.
    pub fn len(&self) -> usize {
        match self {
            Self::Points(p) => p.len(),
            Self::Intervals { intervals, .. } => intervals.len(),
        }
    }

    /// Always false: construction rejects empty sets.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `[min K, max K]`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::Points(p) => (p[0], p[p.len() - 1]),
            Self::Intervals { intervals, .. } => (intervals[0][0], intervals[intervals.len() - 1][1]),
        }
    }

    /// Element `n` as an interval (a point `p` becomes `[p, p]`).
    pub fn element(&self, n: usize) -> [f64; 2] {
        match self {
            Self::Points(p) => [p[n], p[n]],
            Self::Intervals { intervals, .. } => intervals[n],
        }
    }

    /// True when element `n` is the tagged accumulation marker.
    pub fn is_tag(&self, n: usize) -> bool {
        matches!(self, Self::Intervals { intervals, tail_tag: true } if n + 1 == intervals.len())
    }

    /// Open complementary intervals `(a_l, b_l)` inside `[min K, max K]`.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        (1..self.len())
            .map(|n| (self.element(n - 1)[1], self.element(n)[0]))
            .collect()
    }

    /// Points at which jets are read: all points, or all interval endpoints.
    pub fn sample_points(&self, include_tag: bool) -> Vec<f64> {
        let mut out = Vec::new();
        for n in 0..self.len() {
            if !include_tag && self.is_tag(n) {
                continue;
            }
            let [u, v] = self.element(n);
            out.push(u);
            if v > u {
                out.push(v);
            }
        }
        out
    }

    fn tolerance(&self) -> f64 {
        let (a, b) = self.bounds();
        1e-12 * (1.0 + (b - a).abs() + a.abs().max(b.abs()))
    }

    /// Index of the element containing `t`, if any.
    pub fn locate(&self, t: f64) -> Option<usize> {
        let tol = self.tolerance();
        let n = self.len();
        let idx = (0..n).collect::<Vec<_>>().partition_point(|&k| self.element(k)[0] <= t + tol);
        [idx.checked_sub(1), (idx < n).then_some(idx)]
            .into_iter()
            .flatten()
            .find(|&k| {
                let [u, v] = self.element(k);
                t >= u - tol && t <= v + tol
            })
    }

    /// Membership test with a `1e-12` relative slack.
    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }
}

/// An order-`m` jet `(F⁰, …, F^m)` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jet {
    /// The values `F^k`, `k = 0..=m`.
    pub values: Vec<f64>,
}

impl Jet {
    /// Wraps the values.
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// The order `m`.
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

/// Data of one field component.
#[derive(Clone, Debug, PartialEq)]
pub enum ComponentData {
    /// One jet per point (finite-point sets only).
    Pointwise(Vec<Jet>),
    /// One polynomial of degree at most `m` per interval, in the global
    /// variable `t`.
    PerIntervalPoly(Vec<Polynomial>),
}

/// Jets `(F_i)` and `(F_ij)` of order `m` on a compact set.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyField {
    /// Number of generators.
    pub r: usize,
    /// Jet order.
    pub m: usize,
    /// The compact set `K`.
    pub k: CompactSet,
    /// Horizontal components `F_1..F_r`.
    pub horizontal: Vec<ComponentData>,
    /// Vertical components in canonical pair order.
    pub vertical: Vec<ComponentData>,
}

impl WhitneyField {
    /// Validates shapes against `K` and `m`.
    pub fn new(
        r: usize,
        m: usize,
        k: CompactSet,
        horizontal: Vec<ComponentData>,
        vertical: Vec<ComponentData>,
    ) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput("r must be at least 2".into()));
        }
        if horizontal.len() != r || vertical.len() != pair_count(r) {
            return Err(Error::Dimension(format!(
                "a field on G_{r} needs {r} horizontal and {} vertical components",
                pair_count(r)
            )));
        }
        let field = Self {
            r,
            m,
            k,
            horizontal,
            vertical,
        };
        for c in field.components() {
            field.validate_component(c)?;
        }
        Ok(field)
    }

    fn validate_component(&self, c: Component) -> Result<()> {
        let data = self.data(c);
        match (&self.k, data) {
            (CompactSet::Points(p), ComponentData::Pointwise(jets)) => {
                if jets.len() != p.len() {
                    return Err(Error::Dimension(format!("component {c}: {} jets for {} points", jets.len(), p.len())));
                }
                for (n, j) in jets.iter().enumerate() {
                    if j.values.len() != self.m + 1 {
                        return Err(Error::Dimension(format!(
                            "component {c}, point {n}: jet has {} entries, expected {}",
                            j.values.len(),
                            self.m + 1
                        )));
                    }
                    if j.values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidInput(format!("component {c}, point {n}: jet is not finite")));
                    }
                }
            }
            (CompactSet::Intervals { intervals, .. }, ComponentData::PerIntervalPoly(polys)) => {
                if polys.len() != intervals.len() {
                    return Err(Error::Dimension(format!(
                        "component {c}: {} polynomials for {} intervals",
                        polys.len(),
                        intervals.len()
                    )));
                }
                for (n, p) in polys.iter().enumerate() {
                    if p.degree().unwrap_or(0) > self.m {
                        return Err(Error::InvalidInput(format!("component {c}, interval {n}: degree exceeds m = {}", self.m)));
                    }
                    if p.coeffs().iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidInput(format!("component {c}, interval {n}: coefficients are not finite")));
                    }
                }
            }
            (CompactSet::Points(_), _) => {
                return Err(Error::InvalidInput(format!("component {c}: finite point sets need pointwise jets")));
            }
            (CompactSet::Intervals { .. }, _) => {
                return Err(Error::InvalidInput(format!("component {c}: interval unions need per-interval polynomials")));
            }
        }
        Ok(())
    }

    /// All components: horizontal first, then vertical in canonical order.
    pub fn components(&self) -> Vec<Component> {
        let mut out: Vec<Component> = (1..=self.r).map(Component::H).collect();
        out.extend(pairs(self.r).into_iter().map(|(i, j)| Component::V(i, j)));
        out
    }

    /// Storage of one component.
    pub fn data(&self, c: Component) -> &ComponentData {
        match c {
            Component::H(i) => &self.horizontal[i - 1],
            Component::V(i, j) => &self.vertical[pair_index(i, j)],
        }
    }

    /// Mutable storage of one component.
    pub fn data_mut(&mut self, c: Component) -> &mut ComponentData {
        match c {
            Component::H(i) => &mut self.horizontal[i - 1],
            Component::V(i, j) => &mut self.vertical[pair_index(i, j)],
        }
    }

    fn locate(&self, t: f64) -> Result<usize> {
        self.k.locate(t).ok_or_else(|| Error::OutOfDomain {
            point: t,
            what: "the compact set K".into(),
        })
    }

    /// The jet of component `c` at `t ∈ K`.
    pub fn jet(&self, c: Component, t: f64) -> Result<Jet> {
        let n = self.locate(t)?;
        Ok(match self.data(c) {
            ComponentData::Pointwise(j) => j[n].clone(),
            ComponentData::PerIntervalPoly(p) => Jet::new((0..=self.m).map(|k| p[n].eval_derivative(k, t)).collect()),
        })
    }

    /// `F^k(t)` for component `c`.
    pub fn value(&self, c: Component, k: usize, t: f64) -> Result<f64> {
        Ok(self.jet(c, t)?.values.get(k).copied().unwrap_or(0.0))
    }

    /// Taylor polynomial `T_a^m F` in powers of `(x − a)`.
    pub fn taylor_local(&self, c: Component, a: f64) -> Result<Polynomial> {
        Ok(taylor_from_jet(&self.jet(c, a)?))
    }

    /// Taylor polynomial `T_a^m F` in the global variable `x`.
    pub fn taylor(&self, c: Component, a: f64) -> Result<Polynomial> {
        Ok(self.taylor_local(c, a)?.shift(-a))
    }

    /// The field with every jet entry multiplied by `λ`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let map = |d: &ComponentData| match d {
            ComponentData::Pointwise(j) => ComponentData::Pointwise(
                j.iter().map(|x| Jet::new(x.values.iter().map(|v| v * lambda).collect())).collect(),
            ),
            ComponentData::PerIntervalPoly(p) => ComponentData::PerIntervalPoly(p.iter().map(|q| q.scale(lambda)).collect()),
        };
        Self {
            r: self.r,
            m: self.m,
            k: self.k.clone(),
            horizontal: self.horizontal.iter().map(map).collect(),
            vertical: self.vertical.iter().map(map).collect(),
        }
    }

    /// `1 + max |jet entry|` over all components and sample points of `K`.
    pub fn jet_scale(&self) -> f64 {
        let mut s = 0.0_f64;
        for t in self.k.sample_points(true) {
            for c in self.components() {
                if let Ok(j) = self.jet(c, t) {
                    s = j.values.iter().fold(s, |acc, v| acc.max(v.abs()));
                }
            }
        }
        1.0 + s
    }

    /// The field of jets of a curve at finitely many points.
    pub fn from_curve(curve: &HorizontalCurve, points: Vec<f64>) -> Result<Self> {
        let k = CompactSet::points(points)?;
        let CompactSet::Points(pts) = &k else { unreachable!() };
        let read = |c: Component| -> Result<ComponentData> {
            pts.iter()
                .map(|&t| {
                    (0..=curve.m)
                        .map(|d| curve.eval(c, d, t, Side::Right))
                        .collect::<Result<Vec<_>>>()
                        .map(Jet::new)
                })
                .collect::<Result<Vec<_>>>()
                .map(ComponentData::Pointwise)
        };
        let horizontal = (1..=curve.r).map(|i| read(Component::H(i))).collect::<Result<Vec<_>>>()?;
        let vertical = pairs(curve.r)
            .into_iter()
            .map(|(i, j)| read(Component::V(i, j)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(curve.r, curve.m, k, horizontal, vertical)
    }
}

/// `Σ F^k/k! s^k` for a jet.
pub fn taylor_from_jet(jet: &Jet) -> Polynomial {
    let mut fact = 1.0;
    let coeffs = jet
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect();
    Polynomial::new(coeffs)
}

/// Ratios of a dyadic scale bucket.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleBucket {
    /// `⌊log₂(b − a)⌋`.
    pub level: i32,
    /// Number of samples in the bucket.
    pub count: usize,
    /// Largest ratio in the bucket.
    pub max_ratio: f64,
}

/// Groups `(b − a, ratio)` samples by `⌊log₂(b − a)⌋`, finest scale last.
pub fn dyadic_summary(samples: &[(f64, f64)]) -> Vec<ScaleBucket> {
    let mut out: Vec<ScaleBucket> = Vec::new();
    for &(len, ratio) in samples {
        if !(len > 0.0) {
            continue;
        }
        let level = len.log2().floor() as i32;
        match out.iter_mut().find(|b| b.level == level) {
            Some(b) => {
                b.count += 1;
                b.max_ratio = b.max_ratio.max(ratio.abs());
            }
            None => out.push(ScaleBucket {
                level,
                count: 1,
                max_ratio: ratio.abs(),
            }),
        }
    }
    out.sort_by(|x, y| y.level.cmp(&x.level));
    out
}

/// Behaviour of the bucket maxima as the scale shrinks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    /// Slope below `−0.05`.
    Decaying,
    /// Slope within `±0.05`, or too few nonzero buckets.
    Flat,
    /// Slope above `0.05`.
    Growing,
    /// Every ratio is zero.
    FlatZero,
}

/// Slope threshold separating the trend classes.
pub const TREND_THRESHOLD: f64 = 0.05;

/// Least-squares slope of `log₂(max_ratio)` against refinement depth
/// `−level`, skipping zero buckets, with its classification.
pub fn classify_trend(buckets: &[ScaleBucket]) -> (Option<f64>, Trend) {
    let pts: Vec<(f64, f64)> = buckets
        .iter()
        .filter(|b| b.max_ratio > 0.0)
        .map(|b| (-(b.level as f64), b.max_ratio.log2()))
        .collect();
    if pts.is_empty() {
        return (None, Trend::FlatZero);
    }
    if pts.len() < 2 {
        return (None, Trend::Flat);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let trend = if slope < -TREND_THRESHOLD {
        Trend::Decaying
    } else if slope > TREND_THRESHOLD {
        Trend::Growing
    } else {
        Trend::Flat
    };
    (Some(slope), trend)
}

/// One row of [`remainder_audit`].
#[derive(Clone, Debug, Serialize)]
pub struct RemainderRow {
    /// Base point.
    pub a: f64,
    /// Evaluation point.
    pub b: f64,
    /// Derivative order.
    pub k: usize,
    /// `(R_a^m F)^k(b)`.
    pub remainder: f64,
    /// `|(R_a^m F)^k(b)| / |b − a|^{m−k}`.
    pub ratio: f64,
}

/// Output of [`remainder_audit`].
#[derive(Clone, Debug, Serialize)]
pub struct RemainderAudit {
    /// Component audited.
    pub component: String,
    /// Per pair and order.
    pub rows: Vec<RemainderRow>,
    /// Pairs skipped, with the reason.
    pub skipped: Vec<(f64, f64, String)>,
    /// Largest ratio per dyadic scale of `|b − a|`.
    pub by_scale: Vec<ScaleBucket>,
}

/// `(R_a^m F)^k(b) = F^k(b) − D^k(T_a^m F)(b)` and the ratios
/// `|R^k| / |b − a|^{m−k}` for each pair.
pub fn remainder_audit(field: &WhitneyField, c: Component, pairs: &[(f64, f64)]) -> Result<RemainderAudit> {
    let m = field.m;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut scale_samples = Vec::new();
    for &(a, b) in pairs {
        if a == b {
            skipped.push((a, b, "a = b".to_string()));
            continue;
        }
        let ta = field.taylor_local(c, a)?;
        let fb = field.jet(c, b)?;
        let h = b - a;
        let mut worst = 0.0_f64;
        for k in 0..=m {
            let remainder = fb.values[k] - ta.eval_derivative(k, h);
            let ratio = remainder.abs() / h.abs().powi((m - k) as i32);
            worst = worst.max(ratio);
            rows.push(RemainderRow { a, b, k, remainder, ratio });
        }
        scale_samples.push((h.abs(), worst));
    }
    Ok(RemainderAudit {
        component: c.to_string(),
        rows,
        skipped,
        by_scale: dyadic_summary(&scale_samples),
    })
}

/// Largest compatibility residual for one `(i, j, k)`.
#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityRow {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Derivative order.
    pub k: usize,
    /// `max |F_ij^k − 𝒫^k(F_i, F_j)|`.
    pub residual: f64,
    /// Where the maximum is attained.
    pub at: f64,
}

/// Output of [`check_horizontal_compatibility`].
#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    /// Per `(i, j, k)`.
    pub rows: Vec<CompatibilityRow>,
    /// Largest residual.
    pub max_residual: f64,
    /// `1 + max |jet entry|`.
    pub scale: f64,
    /// Relative tolerance used.
    pub tolerance: f64,
    /// All residuals at most `tolerance · scale`.
    pub pass: bool,
}

/// Default relative tolerance of [`check_horizontal_compatibility`].
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// Interior samples per interval used by [`check_horizontal_compatibility`].
const INTERVAL_SAMPLES: usize = 5;

/// Checks `F_ij^k = 𝒫^k(F_i⁰, F_j⁰, …, F_i^k, F_j^k)` for `1 ≤ k ≤ m` at
/// every point of `K` (interval endpoints plus interior samples for
/// interval unions).
pub fn check_horizontal_compatibility(field: &WhitneyField) -> Result<CompatibilityReport> {
    let mut points = field.k.sample_points(true);
    if let CompactSet::Intervals { intervals, .. } = &field.k {
        for iv in intervals {
            for s in 1..=INTERVAL_SAMPLES {
                if iv[1] > iv[0] {
                    points.push(iv[0] + (iv[1] - iv[0]) * s as f64 / (INTERVAL_SAMPLES + 1) as f64);
                }
            }
        }
    }
    let scale = field.jet_scale();
    let mut rows = Vec::new();
    let mut max_residual = 0.0_f64;
    for (i, j) in pairs(field.r) {
        let mut worst = vec![(0.0_f64, f64::NAN); field.m];
        for &t in &points {
            let xi = field.jet(Component::H(i), t)?.values;
            let xj = field.jet(Component::H(j), t)?.values;
            let xij = field.jet(Component::V(i, j), t)?.values;
            for k in 1..=field.m {
                let res = (xij[k] - pcal(k, &xi, &xj)).abs();
                if res > worst[k - 1].0 || worst[k - 1].1.is_nan() {
                    worst[k - 1] = (res, t);
                }
            }
        }
        for (k, (residual, at)) in worst.into_iter().enumerate() {
            max_residual = max_residual.max(residual);
            rows.push(CompatibilityRow {
                i,
                j,
                k: k + 1,
                residual,
                at,
            });
        }
    }
    Ok(CompatibilityReport {
        rows,
        max_residual,
        scale,
        tolerance: COMPATIBILITY_TOL,
        pass: max_residual <= COMPATIBILITY_TOL * scale,
    })
}

/// Two-point Hermite interpolant on `[a, b]` in powers of `(x − a)`.
///
/// The result has degree at most `2m + 1` and matches the `m + 1` entries of
/// `left` at `a` and of `right` at `b`. The system is solved in
/// `s = (x − a)/(b − a)`.
pub fn hermite_extend_gap(left: &Jet, right: &Jet, a: f64, b: f64) -> Result<Polynomial> {
    if !(b > a) {
        return Err(Error::InvalidInput(format!("Hermite gap [{a}, {b}] is degenerate")));
    }
    if left.values.len() != right.values.len() || left.values.is_empty() {
        return Err(Error::Dimension("Hermite endpoint jets must have the same positive length".into()));
    }
    let n = left.values.len();
    let m = n - 1;
    let h = b - a;
    let mut fact = vec![1.0_f64; 2 * n + 1];
    for k in 1..fact.len() {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut c = vec![0.0_f64; 2 * n];
    for k in 0..=m {
        c[k] = left.values[k] * h.powi(k as i32) / fact[k];
    }
    // Right conditions: Σ_p c_p p!/(p−k)! = h^k F^k(b) for k = 0..=m.
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for k in 0..=m {
        let mut known = 0.0;
        for (p, cp) in c.iter().enumerate().take(m + 1) {
            if p >= k {
                known += cp * fact[p] / fact[p - k];
            }
        }
        rhs[k] = right.values[k] * h.powi(k as i32) - known;
        for col in 0..n {
            let p = m + 1 + col;
            mat[(k, col)] = fact[p] / fact[p - k];
        }
    }
    let sol = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput("singular Hermite system".into()))?;
    for col in 0..n {
        c[m + 1 + col] = sol[col];
    }
    let local: Vec<f64> = c.iter().enumerate().map(|(p, v)| v / h.powi(p as i32)).collect();
    Ok(Polynomial::new(local))
}
