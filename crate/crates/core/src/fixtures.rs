//! Reproducible instances: the counterexample field and fields restricted
//! from lifted polynomial curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{pair_count, vertical_lift, Component, GroupElement, HorizontalCurve};
use crate::jets::{CompactSet, ComponentData, WhitneyField};
use crate::poly::{PiecewiseFunction, Polynomial};
use crate::{Error, Result};

/// `c_n = 1 − 2^{−n}`.
pub fn counterexample_c(n: usize) -> f64 {
    1.0 - 0.5_f64.powi(n as i32)
}

/// `d_n = c_n + 2^{−n−2}`.
pub fn counterexample_d(n: usize) -> f64 {
    counterexample_c(n) + 0.5_f64.powi(n as i32 + 2)
}

/// `λ_n = 10^{−n}`.
pub fn counterexample_lambda(n: usize) -> f64 {
    10f64.powi(-(n as i32))
}

/// The counterexample field in 𝔾_3 truncated at level `levels`.
///
/// `K` is `[c_1, d_1] ∪ … ∪ [c_N, d_N]` followed by the tagged point
/// `c_{N+1}` standing in for the accumulation point `1`. The jets are
/// `F_1 = t`, `F_2 = 0`, `F_3 = −t`, `F_21 = λ_n` on the `n`-th interval and
/// `F_31 = F_32 = 0`.
pub fn counterexample_field(levels: usize, m: usize) -> Result<WhitneyField> {
    if levels == 0 {
        return Err(Error::InvalidInput("the counterexample needs at least one level".into()));
    }
    if m == 0 {
        return Err(Error::InvalidInput("the counterexample needs m >= 1".into()));
    }
    let mut intervals: Vec<[f64; 2]> = (1..=levels).map(|n| [counterexample_c(n), counterexample_d(n)]).collect();
    let tag = counterexample_c(levels + 1);
    intervals.push([tag, tag]);
    let count = intervals.len();
    let same = |p: Polynomial| ComponentData::PerIntervalPoly(vec![p; count]);
    let t = Polynomial::new(vec![0.0, 1.0]);
    let horizontal = vec![same(t.clone()), same(Polynomial::zero()), same(t.scale(-1.0))];
    let f21 = ComponentData::PerIntervalPoly((1..=count).map(|n| Polynomial::constant(counterexample_lambda(n))).collect());
    let vertical = vec![f21, same(Polynomial::zero()), same(Polynomial::zero())];
    WhitneyField::new(3, m, CompactSet::intervals(intervals, true)?, horizontal, vertical)
}

/// A lifted curve on `[0, 1]` with random horizontal polynomials of the
/// given degree (coefficients uniform in `[−1, 1]`) and a random start.
pub fn random_lifted_curve(r: usize, m: usize, degree: usize, rng: &mut impl Rng) -> Result<HorizontalCurve> {
    let horizontal = (0..r)
        .map(|_| {
            let p = Polynomial::new((0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect());
            PiecewiseFunction::from_polynomial(&p, 0.0, 1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let x0 = horizontal.iter().map(|f| f.value(0.0)).collect::<Result<Vec<_>>>()?;
    let xv = (0..pair_count(r)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let start = GroupElement::new(r, x0, xv)?;
    vertical_lift(horizontal, &start, m)
}

/// `n` distinct uniform random points of `[0, 1]`, sorted.
pub fn random_points(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(n);
    while pts.len() < n {
        let t: f64 = rng.gen_range(0.0..=1.0);
        if pts.iter().all(|p| (p - t).abs() > 1e-6) {
            pts.push(t);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// A seeded random lifted polynomial curve and its field on `points` random
/// points of `[0, 1]`.
pub fn lifted_polynomial_field(r: usize, m: usize, degree: usize, points: usize, seed: u64) -> Result<(HorizontalCurve, WhitneyField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curve = random_lifted_curve(r, m, degree, &mut rng)?;
    let pts = random_points(points, &mut rng);
    let field = WhitneyField::from_curve(&curve, pts)?;
    Ok((curve, field))
}

/// The field with `F_ij(t_n)` increased by `delta`, where `t_n` is the
/// `n`-th point of a finite `K`.
pub fn shift_vertical_value(field: &WhitneyField, i: usize, j: usize, n: usize, delta: f64) -> Result<WhitneyField> {
    if !(j >= 1 && i > j && i <= field.r) {
        return Err(Error::InvalidInput(format!("({i},{j}) is not a vertical pair of G_{}", field.r)));
    }
    let mut out = field.clone();
    match out.data_mut(Component::V(i, j)) {
        ComponentData::Pointwise(jets) => {
            let jet = jets
                .get_mut(n)
                .ok_or_else(|| Error::InvalidInput(format!("point index {n} is out of range")))?;
            jet.values[0] += delta;
        }
        ComponentData::PerIntervalPoly(_) => {
            return Err(Error::InvalidInput("value shifts need a finite point set".into()));
        }
    }
    Ok(out)
}

/// The zero field of `G_r` on the given points.
pub fn zero_field(r: usize, m: usize, points: Vec<f64>) -> Result<WhitneyField> {
    let k = CompactSet::points(points)?;
    let n = k.len();
    let zero = || ComponentData::Pointwise(vec![crate::jets::Jet::new(vec![0.0; m + 1]); n]);
    WhitneyField::new(r, m, k, (0..r).map(|_| zero()).collect(), (0..pair_count(r)).map(|_| zero()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_intervals() {
        let f = counterexample_field(2, 2).unwrap();
        assert_eq!(f.k.element(0), [0.5, 0.625]);
        assert_eq!(f.k.element(1), [0.75, 0.8125]);
        assert!(f.k.is_tag(2));
        assert_eq!(f.value(Component::V(2, 1), 0, 0.6).unwrap(), 0.1);
        assert_eq!(f.value(Component::V(2, 1), 0, 0.8).unwrap(), 0.01);
    }

    #[test]
    fn shifted_value_changes_one_entry() {
        let (_, f) = lifted_polynomial_field(3, 1, 1, 4, 7).unwrap();
        let g = shift_vertical_value(&f, 3, 2, 3, 0.5).unwrap();
        let CompactSet::Points(p) = &f.k else { panic!() };
        let before = f.value(Component::V(3, 2), 0, p[3]).unwrap();
        let after = g.value(Component::V(3, 2), 0, p[3]).unwrap();
        assert!((after - before - 0.5).abs() < 1e-15);
        assert_eq!(f.value(Component::V(2, 1), 0, p[3]).unwrap(), g.value(Component::V(2, 1), 0, p[3]).unwrap());
    }
}
