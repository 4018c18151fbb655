//! Greedy ordering of the horizontal components on a gap.

use serde::Serialize;

use crate::group::Component;
use crate::jets::WhitneyField;
use crate::poly::{l2_least_squares_poly, Polynomial};
use crate::Result;

/// A greedy ordering and the L¹ distances that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentOrder {
    /// Original indices (1-based) in chosen order.
    pub permutation: Vec<usize>,
    /// `d_k`: L¹ distance of `TF_{π(k)}'` to the span of the earlier
    /// `TF_{π(l)}'`, unnormalised (`d_1 = ∫|TF_{π(1)}'|`).
    pub distances: Vec<f64>,
}

/// `(T_a^m F_i)'` in powers of `(x − a)`, `i = 1..r`.
pub fn taylor_derivatives(field: &WhitneyField, a: f64) -> Result<Vec<Polynomial>> {
    (1..=field.r)
        .map(|i| Ok(field.taylor_local(Component::H(i), a)?.derivative()))
        .collect()
}

/// L¹ distance on `[0, h]` of `target` to the span of `basis`, computed
/// from the L² projection coefficients.
pub fn l1_distance(target: &Polynomial, basis: &[Polynomial], h: f64) -> f64 {
    if basis.is_empty() {
        return target.integrate_abs(0.0, h);
    }
    l2_least_squares_poly(target, basis, 0.0, h).residual_l1 * h
}

/// Distances `d_k` for a given order.
pub fn distances_for(derivs: &[Polynomial], order: &[usize], h: f64) -> Vec<f64> {
    (0..order.len())
        .map(|k| {
            let basis: Vec<Polynomial> = order[..k].iter().map(|&i| derivs[i - 1].clone()).collect();
            l1_distance(&derivs[order[k] - 1], &basis, h)
        })
        .collect()
}

fn greedy(derivs: &[Polynomial], h: f64) -> ComponentOrder {
    let r = derivs.len();
    let mut remaining: Vec<usize> = (1..=r).collect();
    let mut permutation = Vec::with_capacity(r);
    let mut distances = Vec::with_capacity(r);
    while !remaining.is_empty() {
        let basis: Vec<Polynomial> = permutation.iter().map(|&i: &usize| derivs[i - 1].clone()).collect();
        let mut best: Option<(usize, f64)> = None;
        for (pos, &i) in remaining.iter().enumerate() {
            let d = l1_distance(&derivs[i - 1], &basis, h);
            let better = match best {
                None => true,
                Some((_, bd)) => d > bd + 1e-12 * bd.abs().max(f64::MIN_POSITIVE),
            };
            if better {
                best = Some((pos, d));
            }
        }
        let (pos, d) = best.expect("nonempty");
        permutation.push(remaining.remove(pos));
        distances.push(d);
    }
    ComponentOrder { permutation, distances }
}

/// Greedy ordering on the gap `(a, b)`: the first index maximises
/// `∫|TF'|`, each next index maximises the L¹ distance to the span of the
/// chosen Taylor derivatives. Ties go to the smallest index.
pub fn order_components(field: &WhitneyField, a: f64, b: f64) -> Result<ComponentOrder> {
    let derivs = taylor_derivatives(field, a)?;
    Ok(greedy(&derivs, b - a))
}

/// Greedy ordering from explicit derivative polynomials on `[0, h]`.
pub fn order_from_derivatives(derivs: &[Polynomial], h: f64) -> ComponentOrder {
    greedy(derivs, h)
}
