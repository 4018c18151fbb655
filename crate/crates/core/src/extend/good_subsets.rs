//! Uniform `(r, R)`-good subsets of a gap interval.
//!
//! The gap `[a, b]` is cut into `L₁` equal blocks and every block into
//! `r(r−1)/2` equal slots, one per pair. Pair `(i, j)` owns one slot in every
//! block, so `Q_ij` is a union of `L₁` slots of length `L₂ (b − a)` with
//! `L₂ = 2 / (L₁ r (r−1))`.

use serde::Serialize;

use crate::group::{pair_count, pair_index, pairs};
use crate::{Error, Result};

/// Slot families `Q_ij = ⊔_k I_ij(k)` on one gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodSubsets {
    /// Number of labels.
    pub r: usize,
    /// Number of auxiliary functions the family is sized for.
    #[serde(rename = "R")]
    pub big_r: usize,
    /// Order `m` used in the Markov containment bound.
    pub m: usize,
    /// The gap `[a, b]`.
    pub gap: [f64; 2],
    /// Slots per pair.
    pub l1: usize,
    /// Slot length relative to `b − a`.
    pub l2: f64,
    /// Slots of each pair in canonical pair order.
    pub families: Vec<Vec<[f64; 2]>>,
}

/// The least `L₁` with `L₁ > 2(r + R)` and `L₁ > 8m²`.
pub fn minimal_l1(r: usize, big_r: usize, m: usize) -> usize {
    (2 * (r + big_r)).max(8 * m * m) + 1
}

/// Builds the standard good subsets of `[a, b]`.
pub fn build_good_subsets(r: usize, big_r: usize, m: usize, a: f64, b: f64) -> Result<GoodSubsets> {
    if r < 2 {
        return Err(Error::InvalidInput("good subsets need r >= 2".into()));
    }
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("degenerate gap [{a}, {b}]")));
    }
    let l1 = minimal_l1(r, big_r, m);
    let np = pair_count(r);
    let len = b - a;
    let slot = len / (l1 * np) as f64;
    let mut families = vec![Vec::with_capacity(l1); np];
    for block in 0..l1 {
        for (p, fam) in families.iter_mut().enumerate() {
            let n = block * np + p;
            let u = a + n as f64 * slot;
            let v = if n + 1 == l1 * np { b } else { a + (n + 1) as f64 * slot };
            fam.push([u, v]);
        }
    }
    Ok(GoodSubsets {
        r,
        big_r,
        m,
        gap: [a, b],
        l1,
        l2: 1.0 / (l1 * np) as f64,
        families,
    })
}

fn split(slot: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let mid = 0.5 * (slot[0] + slot[1]);
    ([slot[0], mid], [mid, slot[1]])
}

impl GoodSubsets {
    /// Slots of pair `(i, j)`, `i > j`.
    pub fn slots(&self, i: usize, j: usize) -> &[[f64; 2]] {
        &self.families[pair_index(i, j)]
    }

    /// Every slot of every pair.
    pub fn all_slots(&self) -> Vec<[f64; 2]> {
        self.families.iter().flatten().copied().collect()
    }

    /// Splits every slot in two; the left halves form the first family and
    /// the right halves the second. Both keep `L₁` and halve `L₂`.
    pub fn halve(&self) -> (Self, Self) {
        let mut left = self.clone();
        let mut right = self.clone();
        for (p, fam) in self.families.iter().enumerate() {
            let (l, r): (Vec<_>, Vec<_>) = fam.iter().map(|s| split(*s)).unzip();
            left.families[p] = l;
            right.families[p] = r;
        }
        left.l2 /= 2.0;
        right.l2 /= 2.0;
        (left, right)
    }

    /// Sub-families sized for `R' ≥ R`: slots are halved (both halves kept)
    /// until `2(r + R') < L₁`.
    pub fn refine(&self, big_r: usize) -> Self {
        let mut out = self.clone();
        out.big_r = big_r.max(self.big_r);
        while 2 * (out.r + out.big_r) >= out.l1 {
            for fam in out.families.iter_mut() {
                let (l, r): (Vec<_>, Vec<_>) = fam.iter().map(|s| split(*s)).unzip();
                *fam = l.into_iter().chain(r).collect();
            }
            out.l1 *= 2;
            out.l2 /= 2.0;
        }
        out
    }

    /// Same as [`refine`](Self::refine); returns the input unchanged when it
    /// already has enough slots.
    pub fn ensure_capacity(&self, big_r: usize) -> Self {
        self.refine(big_r)
    }

    /// Drops label `k` and renumbers the remaining labels `1..r−1` in order.
    pub fn relabel_drop(&self, k: usize) -> Result<Self> {
        if self.r < 3 || k == 0 || k > self.r {
            return Err(Error::InvalidInput(format!("cannot drop label {k} from r = {}", self.r)));
        }
        let old = |x: usize| if x < k { x } else { x + 1 };
        let families = pairs(self.r - 1)
            .into_iter()
            .map(|(i, j)| self.families[pair_index(old(i), old(j))].clone())
            .collect();
        Ok(Self {
            r: self.r - 1,
            families,
            ..self.clone()
        })
    }
}
