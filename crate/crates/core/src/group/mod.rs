//! Arithmetic of the free step-2 Carnot group 𝔾_r.
//!
//! A point has horizontal coordinates `x_1..x_r` and vertical coordinates
//! `x_ij` for `1 ≤ j < i ≤ r`. Vertical coordinates are always stored in the
//! canonical order produced by [`pairs`] and addressed through
//! [`pair_index`].

mod curve;

pub(crate) use curve::lift_segment;
pub use curve::{
    horizontality_check, signed_area, vertical_lift, Component, CurvePiece, HorizontalCurve, HorizontalityReport,
    PairHorizontality, VerticalComponent,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of vertical coordinates of 𝔾_r.
pub fn pair_count(r: usize) -> usize {
    r * r.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)` with `1 ≤ j < i` in the canonical order.
///
/// The order is lexicographic by `i`, then `j`: `(2,1), (3,1), (3,2), (4,1), …`.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(j >= 1 && j < i, "pair ({i},{j}) is not canonical");
    (i - 1) * (i - 2) / 2 + (j - 1)
}

/// All pairs `(i, j)` with `1 ≤ j < i ≤ r` in canonical order.
pub fn pairs(r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(r));
    for i in 2..=r {
        for j in 1..i {
            out.push((i, j));
        }
    }
    out
}

/// A point of 𝔾_r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    /// Number of generators.
    pub r: usize,
    /// Horizontal coordinates `x_1..x_r`.
    #[serde(rename = "x")]
    pub horizontal: Vec<f64>,
    /// Vertical coordinates in canonical pair order.
    #[serde(rename = "xv")]
    pub vertical: Vec<f64>,
}

impl GroupElement {
    /// Builds a point after checking lengths and finiteness.
    pub fn new(r: usize, horizontal: Vec<f64>, vertical: Vec<f64>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput(format!("r must be at least 2, got {r}")));
        }
        if horizontal.len() != r || vertical.len() != pair_count(r) {
            return Err(Error::Dimension(format!(
                "expected {} horizontal and {} vertical coordinates, got {} and {}",
                r,
                pair_count(r),
                horizontal.len(),
                vertical.len()
            )));
        }
        if horizontal.iter().chain(&vertical).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        Ok(Self {
            r,
            horizontal,
            vertical,
        })
    }

    /// The identity element of 𝔾_r.
    pub fn identity(r: usize) -> Self {
        Self {
            r,
            horizontal: vec![0.0; r],
            vertical: vec![0.0; pair_count(r)],
        }
    }

    /// Vertical coordinate `x_ij` for `i > j`.
    pub fn vertical_at(&self, i: usize, j: usize) -> f64 {
        self.vertical[pair_index(i, j)]
    }

    /// Largest absolute coordinate plus one, used for relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self
            .horizontal
            .iter()
            .chain(&self.vertical)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Group product `x · y`.
///
/// Horizontal parts add; the vertical `(i,j)` part is
/// `x_ij + y_ij + ½(x_i y_j − y_i x_j)`.
pub fn multiply(x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
    if x.r != y.r {
        return Err(Error::Dimension(format!(
            "cannot multiply elements of G_{} and G_{}",
            x.r, y.r
        )));
    }
    let horizontal = x
        .horizontal
        .iter()
        .zip(&y.horizontal)
        .map(|(a, b)| a + b)
        .collect();
    let vertical = pairs(x.r)
        .into_iter()
        .map(|(i, j)| {
            let p = pair_index(i, j);
            x.vertical[p]
                + y.vertical[p]
                + 0.5
                    * (x.horizontal[i - 1] * y.horizontal[j - 1]
                        - y.horizontal[i - 1] * x.horizontal[j - 1])
        })
        .collect();
    Ok(GroupElement {
        r: x.r,
        horizontal,
        vertical,
    })
}

/// Group inverse; in a step-2 group this is coordinate negation.
pub fn inverse(x: &GroupElement) -> GroupElement {
    GroupElement {
        r: x.r,
        horizontal: x.horizontal.iter().map(|v| -v).collect(),
        vertical: x.vertical.iter().map(|v| -v).collect(),
    }
}

/// Binomial coefficient as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc.round()
}

/// 𝒫^k evaluated on the jets `x = (x_0..x_k)` of `γ_i` and `y = (y_0..y_k)`
/// of `γ_j`: `½ Σ_{l<k} C(k−1,l)(x_l y_{k−l} − y_l x_{k−l})`.
///
/// This is the k-th derivative of a horizontal lift `γ_ij` for `k ≥ 1`.
/// Both slices must hold at least `k + 1` entries.
pub fn pcal(k: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for l in 0..k {
        acc += binomial(k - 1, l) * (x[l] * y[k - l] - y[l] * x[k - l]);
    }
    0.5 * acc
}

/// 𝒫^k with arguments interleaved as `(x_0, y_0, …, x_k, y_k)`.
pub fn horizontal_polynomial(k: usize, args: &[f64]) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput(
            "the horizontality polynomial is defined for k >= 1".into(),
        ));
    }
    if args.len() != 2 * (k + 1) {
        return Err(Error::Dimension(format!(
            "P^{k} takes {} arguments, got {}",
            2 * (k + 1),
            args.len()
        )));
    }
    let x: Vec<f64> = args.iter().step_by(2).copied().collect();
    let y: Vec<f64> = args.iter().skip(1).step_by(2).copied().collect();
    Ok(pcal(k, &x, &y))
}
