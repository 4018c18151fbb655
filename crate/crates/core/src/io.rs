//! File formats.
//!
//! JSON is normative. Every float is written as decimal text with 17
//! significant digits (`{:.16e}`), non-finite values as `null`, and object
//! keys in sorted order, so identical data produce identical bytes.
//!
//! Component keys are `"i"` for `F_i` and `"ij"` for `F_ij` (`"i,j"` when
//! `r ≥ 10`); the form `"i,j"` is accepted on input for every `r`.
//!
//! - Field: `{"r", "m", "K": {"points": [...]} | {"intervals": [[u, v], ...],
//!   "tail_tag": bool}, "F": {key: {"pointwise": [[F⁰, …, F^m], ...]} |
//!   {"per_interval_poly": [[c₀, …, c_m], ...]}}}`. Interval polynomials
//!   are in the global variable `t`.
//! - Curve: `{"r", "m", "K", "domain", "horizontal": [piecewise, ...],
//!   "vertical": [{"i", "j", "breakpoints", "pieces": [{"poly": [...]} |
//!   {"lift": anchor}]}], "gaps": [...], "intervals": [...]}`. A piecewise
//!   function is `{"breakpoints", "pieces": [[...], ...], "bumps": [{"kind",
//!   "interval", "amplitude"}]}` with pieces in powers of
//!   `(t − breakpoint)`. `gaps` and `intervals` are descriptive metadata.
//! - Audit CSV: one row per pair of points, `(i, j)` and candidate, with
//!   the columns of [`AuditCsvRow`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::extend::{Extension, GapRecord};
use crate::group::{pair_count, pairs, Component, CurvePiece, HorizontalCurve, VerticalComponent};
use crate::jets::{CompactSet, ComponentData, Jet, WhitneyField};
use crate::poly::{make_bump, BumpKind, PiecewiseFunction, Polynomial};
use crate::{Error, Result};

/// A float as fixed-format decimal text, or `null` when not finite.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|x| matches!(x, Value::Number(_) | Value::Null)) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 2);
                if k + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Deterministic JSON text of any serialisable value.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// Writes [`to_json_string`] to a file.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, source: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_error(format!("{source}:{}:{}", e.line(), e.column()), e.to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| parse_error(path.display().to_string(), e.to_string()))
}

/// Key of a component in the field and curve formats.
pub fn component_key(c: Component, r: usize) -> String {
    match c {
        Component::H(i) => i.to_string(),
        Component::V(i, j) if r >= 10 => format!("{i},{j}"),
        Component::V(i, j) => format!("{i}{j}"),
    }
}

/// Parses a component key for `G_r`.
pub fn parse_component_key(key: &str, r: usize) -> Option<Component> {
    let num = |s: &str| s.trim().parse::<usize>().ok();
    let c = if let Some((a, b)) = key.split_once(',') {
        Component::V(num(a)?, num(b)?)
    } else if r < 10 && key.len() == 2 {
        Component::V(num(&key[..1])?, num(&key[1..])?)
    } else {
        Component::H(num(key)?)
    };
    let ok = match c {
        Component::H(i) => (1..=r).contains(&i),
        Component::V(i, j) => j >= 1 && i > j && i <= r,
    };
    ok.then_some(c)
}

/// `K` in the file formats.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CompactSetFile {
    /// Finite points.
    Points {
        /// The points.
        points: Vec<f64>,
    },
    /// Intervals.
    Intervals {
        /// The intervals.
        intervals: Vec<[f64; 2]>,
        /// The last interval marks an accumulation point.
        #[serde(default)]
        tail_tag: bool,
    },
}

impl From<&CompactSet> for CompactSetFile {
    fn from(k: &CompactSet) -> Self {
        match k {
            CompactSet::Points(p) => Self::Points { points: p.clone() },
            CompactSet::Intervals { intervals, tail_tag } => Self::Intervals {
                intervals: intervals.clone(),
                tail_tag: *tail_tag,
            },
        }
    }
}

impl CompactSetFile {
    fn build(self) -> Result<CompactSet> {
        match self {
            Self::Points { points } => CompactSet::points(points),
            Self::Intervals { intervals, tail_tag } => CompactSet::intervals(intervals, tail_tag),
        }
    }
}

/// One field component in the file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentFile {
    /// Jets aligned with the points of `K`.
    Pointwise(Vec<Vec<f64>>),
    /// Coefficients in `t`, one polynomial per interval.
    PerIntervalPoly(Vec<Vec<f64>>),
}

/// The field file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldFile {
    /// Generators.
    pub r: usize,
    /// Jet order.
    pub m: usize,
    /// The compact set.
    #[serde(rename = "K")]
    pub k: CompactSetFile,
    /// Components by key.
    #[serde(rename = "F")]
    pub f: BTreeMap<String, ComponentFile>,
}

impl From<&WhitneyField> for FieldFile {
    fn from(field: &WhitneyField) -> Self {
        let f = field
            .components()
            .into_iter()
            .map(|c| {
                let data = match field.data(c) {
                    ComponentData::Pointwise(j) => ComponentFile::Pointwise(j.iter().map(|x| x.values.clone()).collect()),
                    ComponentData::PerIntervalPoly(p) => ComponentFile::PerIntervalPoly(p.iter().map(|q| padded(q, field.m)).collect()),
                };
                (component_key(c, field.r), data)
            })
            .collect();
        Self {
            r: field.r,
            m: field.m,
            k: (&field.k).into(),
            f,
        }
    }
}

fn padded(p: &Polynomial, m: usize) -> Vec<f64> {
    let mut c = p.coeffs().to_vec();
    c.resize(c.len().max(m + 1), 0.0);
    c
}

impl FieldFile {
    /// Validates and converts to a field; `source` names the input in errors.
    pub fn build(self, source: &str) -> Result<WhitneyField> {
        let r = self.r;
        if r < 2 {
            return Err(parse_error(format!("{source}: r"), format!("r must be at least 2, got {r}")));
        }
        let k = self.k.build().map_err(|e| parse_error(format!("{source}: K"), e.to_string()))?;
        let mut horizontal: Vec<Option<ComponentData>> = vec![None; r];
        let mut vertical: Vec<Option<ComponentData>> = vec![None; pair_count(r)];
        for (key, comp) in self.f {
            let c = parse_component_key(&key, r)
                .ok_or_else(|| parse_error(format!("{source}: F.{key}"), format!("not a component of G_{r}")))?;
            let data = match comp {
                ComponentFile::Pointwise(v) => ComponentData::Pointwise(v.into_iter().map(Jet::new).collect()),
                ComponentFile::PerIntervalPoly(v) => ComponentData::PerIntervalPoly(v.into_iter().map(Polynomial::new).collect()),
            };
            let slot = match c {
                Component::H(i) => &mut horizontal[i - 1],
                Component::V(i, j) => &mut vertical[crate::group::pair_index(i, j)],
            };
            if slot.replace(data).is_some() {
                return Err(parse_error(format!("{source}: F.{key}"), "component given twice"));
            }
        }
        let take = |v: Vec<Option<ComponentData>>, keys: Vec<Component>| -> Result<Vec<ComponentData>> {
            v.into_iter()
                .zip(keys)
                .map(|(d, c)| d.ok_or_else(|| parse_error(format!("{source}: F"), format!("missing component {}", component_key(c, r)))))
                .collect()
        };
        let horizontal = take(horizontal, (1..=r).map(Component::H).collect())?;
        let vertical = take(vertical, pairs(r).into_iter().map(|(i, j)| Component::V(i, j)).collect())?;
        WhitneyField::new(r, self.m, k, horizontal, vertical).map_err(|e| parse_error(source.to_string(), e.to_string()))
    }
}

/// Field JSON text.
pub fn field_to_json(field: &WhitneyField) -> Result<String> {
    to_json_string(&FieldFile::from(field))
}

/// Parses field JSON text; `source` names the input in errors.
pub fn field_from_json(text: &str, source: &str) -> Result<WhitneyField> {
    parse_json::<FieldFile>(text, source)?.build(source)
}

/// Reads a field file.
pub fn read_field(path: &Path) -> Result<WhitneyField> {
    field_from_json(&read_text(path)?, &path.display().to_string())
}

/// Writes a field file.
pub fn write_field(path: &Path, field: &WhitneyField) -> Result<()> {
    std::fs::write(path, field_to_json(field)?)?;
    Ok(())
}

/// A bump descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpFile {
    /// `eta` or `xi`.
    pub kind: BumpKind,
    /// Support.
    pub interval: [f64; 2],
    /// Signed amplitude.
    pub amplitude: f64,
}

/// A piecewise function in the file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiecewiseFile {
    /// Breakpoints.
    pub breakpoints: Vec<f64>,
    /// Local coefficients per piece.
    pub pieces: Vec<Vec<f64>>,
    /// Bump terms.
    #[serde(default)]
    pub bumps: Vec<BumpFile>,
}

impl From<&PiecewiseFunction> for PiecewiseFile {
    fn from(f: &PiecewiseFunction) -> Self {
        Self {
            breakpoints: f.breakpoints().to_vec(),
            pieces: f.pieces().iter().map(|p| p.coeffs().to_vec()).collect(),
            bumps: f
                .bumps()
                .iter()
                .map(|b| BumpFile {
                    kind: b.kind,
                    interval: b.interval,
                    amplitude: b.amplitude,
                })
                .collect(),
        }
    }
}

impl PiecewiseFile {
    fn build(self, m: usize) -> Result<PiecewiseFunction> {
        let bumps = self
            .bumps
            .into_iter()
            .map(|b| make_bump(b.kind, b.interval, b.amplitude, m))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseFunction::new(self.breakpoints, self.pieces.into_iter().map(Polynomial::new).collect(), bumps)
    }
}

/// A vertical piece in the file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceFile {
    /// Local polynomial coefficients.
    Poly(Vec<f64>),
    /// Lifted from the given anchor value.
    Lift(f64),
}

/// A vertical component in the file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerticalFile {
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// Breakpoints.
    pub breakpoints: Vec<f64>,
    /// Pieces.
    pub pieces: Vec<PieceFile>,
}

/// Metadata of one gap in the curve file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapFile {
    /// Left end.
    pub a: f64,
    /// Right end.
    pub b: f64,
    /// Hermite coefficients in `(t − a)` by component key.
    pub hermite: BTreeMap<String, Vec<f64>>,
    /// Bumps by component key.
    pub bumps: BTreeMap<String, Vec<BumpFile>>,
    /// Case classification.
    pub case_tag: Option<String>,
    /// Skipped below the gap floor.
    pub skipped: bool,
    /// Warning or failure message.
    pub warning: Option<String>,
}

/// Field polynomials of one interval of `K` in the curve file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalFile {
    /// The interval.
    pub interval: [f64; 2],
    /// Coefficients in `t` by component key.
    pub polys: BTreeMap<String, Vec<f64>>,
}

/// The curve file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFile {
    /// Generators.
    pub r: usize,
    /// Order.
    pub m: usize,
    /// The compact set of the field.
    #[serde(rename = "K")]
    pub k: Option<CompactSetFile>,
    /// Domain.
    pub domain: [f64; 2],
    /// Horizontal components.
    pub horizontal: Vec<PiecewiseFile>,
    /// Vertical components in canonical order.
    pub vertical: Vec<VerticalFile>,
    /// Per-gap metadata.
    #[serde(default)]
    pub gaps: Vec<GapFile>,
    /// Per-interval metadata.
    #[serde(default)]
    pub intervals: Vec<IntervalFile>,
}

fn gap_file(g: &GapRecord, r: usize) -> GapFile {
    let key = |i: usize| component_key(Component::H(i), r);
    GapFile {
        a: g.a,
        b: g.b,
        hermite: g.hermite.iter().enumerate().map(|(n, p)| (key(n + 1), p.coeffs().to_vec())).collect(),
        bumps: g
            .perturbation
            .iter()
            .flat_map(|p| p.bumps.iter().enumerate())
            .map(|(n, list)| {
                let list = list
                    .iter()
                    .map(|b| BumpFile {
                        kind: b.kind,
                        interval: b.interval,
                        amplitude: b.amplitude,
                    })
                    .collect();
                (key(n + 1), list)
            })
            .collect(),
        case_tag: g.perturbation.as_ref().map(|p| p.case_tag.clone()),
        skipped: g.skipped,
        warning: g.warning.clone(),
    }
}

impl CurveFile {
    /// The curve alone, without metadata.
    pub fn from_curve(curve: &HorizontalCurve) -> Self {
        Self {
            r: curve.r,
            m: curve.m,
            k: None,
            domain: [curve.domain.0, curve.domain.1],
            horizontal: curve.components.iter().map(PiecewiseFile::from).collect(),
            vertical: curve
                .vertical
                .iter()
                .map(|v| VerticalFile {
                    i: v.i,
                    j: v.j,
                    breakpoints: v.breakpoints.clone(),
                    pieces: v
                        .pieces
                        .iter()
                        .map(|p| match p {
                            CurvePiece::Poly(q) => PieceFile::Poly(q.coeffs().to_vec()),
                            CurvePiece::Lift { anchor } => PieceFile::Lift(*anchor),
                        })
                        .collect(),
                })
                .collect(),
            gaps: Vec::new(),
            intervals: Vec::new(),
        }
    }

    /// The curve of an extension with its gap and interval metadata.
    pub fn from_extension(ext: &Extension, field: &WhitneyField) -> Self {
        let mut out = Self::from_curve(&ext.curve);
        out.k = Some((&field.k).into());
        out.gaps = ext.gaps.iter().map(|g| gap_file(g, field.r)).collect();
        for n in 0..field.k.len() {
            let iv = field.k.element(n);
            if iv[1] > iv[0] {
                let polys = field
                    .components()
                    .into_iter()
                    .filter_map(|c| match field.data(c) {
                        ComponentData::PerIntervalPoly(p) => Some((component_key(c, field.r), padded(&p[n], field.m))),
                        ComponentData::Pointwise(_) => None,
                    })
                    .collect();
                out.intervals.push(IntervalFile { interval: iv, polys });
            }
        }
        out
    }

    /// Converts to a curve; `source` names the input in errors.
    pub fn build(self, source: &str) -> Result<HorizontalCurve> {
        let m = self.m;
        let wrap = |what: String, e: Error| parse_error(format!("{source}: {what}"), e.to_string());
        let horizontal = self
            .horizontal
            .into_iter()
            .enumerate()
            .map(|(n, f)| f.build(m).map_err(|e| wrap(format!("horizontal[{n}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        let vertical = self
            .vertical
            .into_iter()
            .map(|v| VerticalComponent {
                i: v.i,
                j: v.j,
                breakpoints: v.breakpoints,
                pieces: v
                    .pieces
                    .into_iter()
                    .map(|p| match p {
                        PieceFile::Poly(c) => CurvePiece::Poly(Polynomial::new(c)),
                        PieceFile::Lift(anchor) => CurvePiece::Lift { anchor },
                    })
                    .collect(),
            })
            .collect();
        HorizontalCurve::new(self.r, m, horizontal, vertical).map_err(|e| wrap("curve".into(), e))
    }
}

/// Writes a curve file with extension metadata.
pub fn write_extension(path: &Path, ext: &Extension, field: &WhitneyField) -> Result<()> {
    write_json(path, &CurveFile::from_extension(ext, field))
}

/// Writes a bare curve file.
pub fn write_curve(path: &Path, curve: &HorizontalCurve) -> Result<()> {
    write_json(path, &CurveFile::from_curve(curve))
}

/// Parses curve JSON text.
pub fn curve_from_json(text: &str, source: &str) -> Result<HorizontalCurve> {
    parse_json::<CurveFile>(text, source)?.build(source)
}

/// Reads a curve file.
pub fn read_curve(path: &Path) -> Result<HorizontalCurve> {
    curve_from_json(&read_text(path)?, &path.display().to_string())
}

/// One row of the audit CSV.
///
/// Columns: `a, b, i, j, A, V, ratio` (component-wise quantities),
/// `candidate` (`zero`, `minimizer`, `grid_best` or `best`), `c` and
/// `c_tilde` (semicolon-separated, aligned with the ascending indices
/// `{1..r} \ {i, j}`), `E, delta_i, delta_j, denom, gen_ratio`.
#[derive(Clone, Debug, Serialize)]
pub struct AuditCsvRow {
    /// Left point.
    pub a: String,
    /// Right point.
    pub b: String,
    /// First index.
    pub i: usize,
    /// Second index.
    pub j: usize,
    /// `A_ij`.
    #[serde(rename = "A")]
    pub a_value: String,
    /// `V_ij`.
    #[serde(rename = "V")]
    pub v: String,
    /// Signed `A/V`.
    pub ratio: String,
    /// Candidate label.
    pub candidate: String,
    /// `c`.
    pub c: String,
    /// `c̃`.
    pub c_tilde: String,
    /// `E_ij`.
    #[serde(rename = "E")]
    pub e: String,
    /// `Δ_i`.
    pub delta_i: String,
    /// `Δ_j`.
    pub delta_j: String,
    /// Denominator of the generalized ratio.
    pub denom: String,
    /// `|E|/denom`.
    pub gen_ratio: String,
}

/// Joins a coefficient vector for the CSV.
pub fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(";")
}

/// Writes CSV rows with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{counterexample_field, lifted_polynomial_field};

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(f64::NAN), "null");
        assert_eq!(to_json_string(&vec![1.5, f64::INFINITY]).unwrap(), "[1.5000000000000000e0, null]\n");
    }

    #[test]
    fn keys_round_trip() {
        assert_eq!(parse_component_key("21", 3), Some(Component::V(2, 1)));
        assert_eq!(parse_component_key("3,1", 3), Some(Component::V(3, 1)));
        assert_eq!(parse_component_key("3", 3), Some(Component::H(3)));
        assert_eq!(parse_component_key("12", 3), None);
        assert_eq!(parse_component_key("10", 12), Some(Component::H(10)));
        assert_eq!(component_key(Component::V(11, 2), 12), "11,2");
    }

    #[test]
    fn field_json_round_trip() {
        for field in [counterexample_field(3, 2).unwrap(), lifted_polynomial_field(3, 2, 2, 5, 1).unwrap().1] {
            let text = field_to_json(&field).unwrap();
            let back = field_from_json(&text, "test").unwrap();
            assert_eq!(back, field);
            assert_eq!(field_to_json(&back).unwrap(), text);
        }
    }

    #[test]
    fn malformed_field_reports_location() {
        let err = field_from_json("{\"r\": 2, \"m\": 1,\n \"K\": {\"points\": [0, 1]}, \"F\": {\"7\": {\"pointwise\": []}}}", "f.json").unwrap_err();
        assert!(err.to_string().contains("F.7"), "{err}");
        let err = field_from_json("{\"r\": 2,\n \"m\": }", "f.json").unwrap_err();
        assert!(err.to_string().contains("f.json:2"), "{err}");
    }
}
