//! Constructive C^m horizontal extension of a Whitney field.
//!
//! On every gap `(a, b)` of `K` the classical Hermite extension `f_i` is
//! corrected by bump perturbations `φ_i` so that the vertical increments
//! `F_ij(b) − F_ij(a)` equal the signed areas of `f_i + φ_i`. The corrected
//! horizontal components are then lifted and checked.

mod assemble;
mod good_subsets;
mod ordering;
mod perturb;

use serde::{Deserialize, Serialize};

pub use assemble::{
    assemble_curve, extend_field, extend_field_partial, verify_extension, Extension, GapRecord, JetCheck, KnotCheck, Tolerances, VerificationReport,
};
pub use good_subsets::{build_good_subsets, minimal_l1, GoodSubsets};
pub use ordering::{distances_for, l1_distance, order_components, order_from_derivatives, taylor_derivatives, ComponentOrder};
pub use perturb::{extend_gap, GapPerturbation, NullspaceDims, OrthoCheck, StageKind, StageRecord};

/// Tolerances and thresholds of an extension run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtendConfig {
    /// Residual areas below `zero_area · scale` are treated as zero.
    pub zero_area: f64,
    /// Admissible residual area after a stage, relative to `max(1, |target|)`.
    pub area_tol: f64,
    /// Admissible declared inner product `∫ φ_x f_y'`, relative to the field
    /// scale.
    pub ortho_tol: f64,
    /// Admissible one-sided derivative jump at knots, relative.
    pub smooth_tol: f64,
    /// Admissible jet mismatch on `K`, relative.
    pub jet_tol: f64,
    /// Admissible horizontality residual, relative.
    pub horiz_tol: f64,
    /// Gaps shorter than `gap_floor · diam K` are not perturbed.
    pub gap_floor: f64,
    /// The linear method falls back to products when the projected moment
    /// vector is shorter than this fraction of the full one.
    pub linear_floor: f64,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        Self {
            zero_area: 1e-12,
            area_tol: 1e-9,
            ortho_tol: 1e-9,
            smooth_tol: 1e-9,
            jet_tol: 1e-9,
            horiz_tol: 1e-8,
            gap_floor: 1e-8,
            linear_floor: 1e-3,
        }
    }
}

impl ExtendConfig {
    /// Tolerances of [`verify_extension`].
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            jet: self.jet_tol,
            horizontality: self.horiz_tol,
            smoothness: self.smooth_tol,
        }
    }
}
