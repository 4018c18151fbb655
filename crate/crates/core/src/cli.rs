//! Batch commands behind the `cw` binary.
//!
//! Each command reads and writes the formats of [`crate::io`] and returns a
//! report whose `pass` flag decides the exit status.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::conditions::{audit_componentwise, audit_generalized, default_pairs, AuditConfig, ComponentwiseAudit, GeneralizedAudit, GeneralizedSample};
use crate::extend::{extend_field_partial, verify_extension, ExtendConfig, GapPerturbation, StageKind, VerificationReport};
use crate::fixtures::counterexample_field;
use crate::io::{format_float, join_floats, read_curve, read_field, write_csv, write_extension, write_field, write_json, AuditCsvRow};
use crate::jets::{check_horizontal_compatibility, remainder_audit, CompatibilityReport, RemainderAudit, Trend, WhitneyField};
use crate::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CW_THREADS";

/// Options shared by the commands.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Jet order of generated fields.
    pub m: usize,
    /// Generators of generated fields.
    pub r: usize,
    /// Candidate set of the generalized audit.
    pub audit: AuditConfig,
    /// Extension tolerances, including the gap floor.
    pub extend: ExtendConfig,
    /// Truncation depth of the counterexample.
    pub levels: usize,
    /// Input field file.
    pub input: Option<PathBuf>,
    /// Primary output file (field or curve).
    pub output: Option<PathBuf>,
    /// Report file.
    pub report: Option<PathBuf>,
    /// CSV mirror of the audit report.
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: 2,
            r: 3,
            audit: AuditConfig::default(),
            extend: ExtendConfig::default(),
            levels: 8,
            input: None,
            output: None,
            report: None,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Checks that every tolerance is positive and `N ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        let e = &self.extend;
        let tolerances = [
            ("area", e.area_tol),
            ("ortho", e.ortho_tol),
            ("smooth", e.smooth_tol),
            ("jet", e.jet_tol),
            ("horizontality", e.horiz_tol),
            ("gap floor", e.gap_floor),
            ("cbound", self.audit.cbound),
            ("grid step", self.audit.grid_step),
        ];
        for (name, v) in tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.levels == 0 {
            return Err(Error::InvalidInput("the truncation depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n: &usize| *n > 0)
}

/// Runs `f` on a thread pool capped by [`THREADS_ENV`].
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Writes the truncated counterexample field.
pub fn cmd_counterexample(levels: usize, m: usize, out: &Path) -> Result<WhitneyField> {
    let field = counterexample_field(levels, m)?;
    write_field(out, &field)?;
    Ok(field)
}

/// Per-pair summary of the audit.
#[derive(Clone, Debug, Serialize)]
pub struct PairRecord {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Left point.
    pub a: f64,
    /// Right point.
    pub b: f64,
    /// `A_ij`.
    #[serde(rename = "A")]
    pub a_value: f64,
    /// `V_ij`.
    #[serde(rename = "V")]
    pub v: f64,
    /// `|A/V|`.
    pub ratio: f64,
    /// Best `c`.
    pub best_c: Vec<f64>,
    /// Best `c̃`.
    pub best_c_tilde: Vec<f64>,
    /// `E_ij` at the best candidate.
    #[serde(rename = "E")]
    pub e: f64,
    /// `Δ_i` at the best candidate.
    pub delta_i: f64,
    /// `Δ_j` at the best candidate.
    pub delta_j: f64,
    /// Best generalized ratio.
    pub gen_ratio: f64,
}

/// Output of [`cmd_audit`].
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    /// Generators.
    pub r: usize,
    /// Order.
    pub m: usize,
    /// Pairs of points audited.
    pub point_pairs: Vec<(f64, f64)>,
    /// Horizontal compatibility of the jets.
    pub compatibility: CompatibilityReport,
    /// Taylor remainders per component.
    pub remainders: Vec<RemainderAudit>,
    /// Component-wise A/V audit.
    pub componentwise: ComponentwiseAudit,
    /// Generalized A/V audit.
    pub generalized: GeneralizedAudit,
    /// Per-pair summary.
    pub pairs: Vec<PairRecord>,
    /// Compatibility passes and neither A/V trend is growing.
    pub pass: bool,
}

/// Runs every audit on a field.
pub fn audit_field(field: &WhitneyField, config: &AuditConfig) -> Result<AuditReport> {
    let point_pairs = default_pairs(field);
    let compatibility = check_horizontal_compatibility(field)?;
    let remainders = field
        .components()
        .into_iter()
        .map(|c| remainder_audit(field, c, &point_pairs))
        .collect::<Result<Vec<_>>>()?;
    let componentwise = audit_componentwise(field, &point_pairs)?;
    let generalized = audit_generalized(field, &point_pairs, config)?;
    let pairs = componentwise
        .samples
        .iter()
        .zip(&generalized.records)
        .map(|(s, g)| PairRecord {
            i: s.i,
            j: s.j,
            a: s.a,
            b: s.b,
            a_value: s.a_value,
            v: s.v,
            ratio: s.ratio,
            best_c: g.best.c.clone(),
            best_c_tilde: g.best.c_tilde.clone(),
            e: g.best.e,
            delta_i: g.best.delta_i,
            delta_j: g.best.delta_j,
            gen_ratio: g.best.ratio,
        })
        .collect();
    let pass = compatibility.pass && componentwise.trend != Trend::Growing && generalized.trend != Trend::Growing;
    Ok(AuditReport {
        r: field.r,
        m: field.m,
        point_pairs,
        compatibility,
        remainders,
        componentwise,
        generalized,
        pairs,
        pass,
    })
}

/// CSV rows of an audit: one per pair of points, `(i, j)` and candidate.
pub fn audit_csv_rows(report: &AuditReport) -> Vec<AuditCsvRow> {
    let mut rows = Vec::new();
    for (s, g) in report.componentwise.samples.iter().zip(&report.generalized.records) {
        let mut candidates: Vec<(&str, &GeneralizedSample)> = vec![("zero", &g.zero), ("minimizer", &g.minimizer)];
        if let Some(grid) = &g.grid_best {
            candidates.push(("grid_best", grid));
        }
        candidates.push(("best", &g.best));
        for (label, c) in candidates {
            rows.push(AuditCsvRow {
                a: format_float(s.a),
                b: format_float(s.b),
                i: s.i,
                j: s.j,
                a_value: format_float(s.a_value),
                v: format_float(s.v),
                ratio: format_float(s.ratio),
                candidate: label.to_string(),
                c: join_floats(&c.c),
                c_tilde: join_floats(&c.c_tilde),
                e: format_float(c.e),
                delta_i: format_float(c.delta_i),
                delta_j: format_float(c.delta_j),
                denom: format_float(c.denom),
                gen_ratio: format_float(c.ratio),
            });
        }
    }
    rows
}

/// Audits a field file and writes the JSON report and optional CSV.
pub fn cmd_audit(input: &Path, report: &Path, csv: Option<&Path>, config: &AuditConfig) -> Result<AuditReport> {
    let field = read_field(input)?;
    let out = audit_field(&field, config)?;
    write_json(report, &out)?;
    if let Some(path) = csv {
        write_csv(path, &audit_csv_rows(&out))?;
    }
    Ok(out)
}

/// Summary of one gap in the extension report.
#[derive(Clone, Debug, Serialize)]
pub struct GapSummary {
    /// Left end.
    pub a: f64,
    /// Right end.
    pub b: f64,
    /// Skipped below the gap floor.
    pub skipped: bool,
    /// Warning or failure message.
    pub warning: Option<String>,
    /// Case classification.
    pub case_tag: Option<String>,
    /// Pairs changed by a non-trivial stage.
    pub perturbed_pairs: Vec<(usize, usize)>,
    /// `max |𝒜| / (b − a)^{2m}`.
    pub area_to_budget: Option<f64>,
    /// Largest `|D^k φ_i|` per order over all components.
    pub sup_norms: Vec<f64>,
    /// Full perturbation record.
    pub perturbation: Option<GapPerturbation>,
}

/// Output of [`cmd_extend`].
#[derive(Clone, Debug, Serialize)]
pub struct ExtendReport {
    /// Configuration used.
    pub config: ExtendConfig,
    /// Per-gap summaries.
    pub gaps: Vec<GapSummary>,
    /// Gaps whose perturbation failed, with the diagnostic.
    pub failures: Vec<String>,
    /// Verification of the assembled curve.
    pub verification: VerificationReport,
    /// No failures and verification passes.
    pub pass: bool,
}

/// Pairs touched by a non-skipped stage.
pub fn perturbed_pairs(p: &GapPerturbation) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = p.stages.iter().filter(|s| s.kind != StageKind::Skip).map(|s| s.pair).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Extends a field, verifies the curve and builds the report.
pub fn extend_and_verify(field: &WhitneyField, config: &ExtendConfig) -> Result<(crate::extend::Extension, ExtendReport)> {
    let (ext, failures) = extend_field_partial(field, config)?;
    let verification = verify_extension(&ext.curve, field, &config.tolerances())?;
    let gaps = ext
        .gaps
        .iter()
        .map(|g| {
            let p = g.perturbation.as_ref();
            let sup_norms = p
                .map(|p| {
                    let mut out = vec![0.0_f64; field.m + 1];
                    for row in &p.sup_norms {
                        for (o, v) in out.iter_mut().zip(row) {
                            *o = o.max(*v);
                        }
                    }
                    out
                })
                .unwrap_or_default();
            GapSummary {
                a: g.a,
                b: g.b,
                skipped: g.skipped,
                warning: g.warning.clone(),
                case_tag: p.map(|p| p.case_tag.clone()),
                perturbed_pairs: p.map(perturbed_pairs).unwrap_or_default(),
                area_to_budget: p.map(|p| p.area_to_budget),
                sup_norms,
                perturbation: g.perturbation.clone(),
            }
        })
        .collect();
    let failures: Vec<String> = failures.iter().map(|e| e.to_string()).collect();
    let pass = failures.is_empty() && verification.pass;
    let report = ExtendReport {
        config: config.clone(),
        gaps,
        failures,
        verification,
        pass,
    };
    Ok((ext, report))
}

/// Extends a field file, writing the curve and the report.
///
/// Failed gaps keep their Hermite extension and are listed in the report,
/// so outputs are written even when the run fails.
pub fn cmd_extend(input: &Path, curve: &Path, report: &Path, config: &ExtendConfig) -> Result<ExtendReport> {
    let field = read_field(input)?;
    let (ext, out) = extend_and_verify(&field, config)?;
    write_extension(curve, &ext, &field)?;
    write_json(report, &out)?;
    Ok(out)
}

/// Verifies a curve file against a field file.
pub fn cmd_verify(curve: &Path, input: &Path, report: Option<&Path>, config: &ExtendConfig) -> Result<VerificationReport> {
    let field = read_field(input)?;
    let c = read_curve(curve)?;
    if c.r != field.r || c.m != field.m {
        return Err(Error::Dimension(format!(
            "curve has (r, m) = ({}, {}) but the field has ({}, {})",
            c.r, c.m, field.r, field.m
        )));
    }
    let out = verify_extension(&c, &field, &config.tolerances())?;
    if let Some(path) = report {
        write_json(path, &out)?;
    }
    Ok(out)
}
