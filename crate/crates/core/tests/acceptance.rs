//! Acceptance criteria: each criterion prints one PASS/FAIL line with its
//! measurements; the process fails if any criterion fails.

mod common;

use std::panic::{catch_unwind, UnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_area, oracle_residuals, perturbed};
use cw_core::cli::{cmd_extend, cmd_verify, extend_and_verify};
use cw_core::conditions::{
    algebraic_identity_residual, assemble_e, audit_generalized, compute_av, compute_generalized, free_indices, AuditConfig,
};
use cw_core::extend::{build_good_subsets, minimal_l1, ExtendConfig, GapPerturbation, GapRecord};
use cw_core::fixtures::{
    counterexample_c, counterexample_d, counterexample_field, lifted_polynomial_field, random_lifted_curve,
    shift_vertical_value,
};
use cw_core::group::{pair_count, pairs, Component};
use cw_core::io::{read_curve, write_field};
use cw_core::jets::{CompactSet, WhitneyField};
use cw_core::poly::{markov_bound_check, markov_subinterval, sup_l1_l2_norms, PiecewiseFunction, Polynomial, Side};

/// Result of one criterion.
struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Accumulates failures with a short description of the first few.
#[derive(Default)]
struct Failures {
    count: usize,
    notes: Vec<String>,
}

impl Failures {
    fn check(&mut self, ok: bool, note: impl FnOnce() -> String) {
        if !ok {
            self.count += 1;
            if self.notes.len() < 3 {
                self.notes.push(note());
            }
        }
    }

    fn summary(&self) -> String {
        if self.count == 0 {
            String::new()
        } else {
            format!("; {} failures, first: {}", self.count, self.notes.join(" | "))
        }
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

// Criterion 1.

fn counterexample_rates() -> Outcome {
    let start = Instant::now();
    let field = counterexample_field(8, 2).unwrap();
    let mut fails = Failures::default();
    let mut componentwise = Vec::new();
    let mut generalized = Vec::new();
    for n in 1..=8usize {
        let (a, b) = (counterexample_d(n), counterexample_c(n + 1));
        let h = 0.5_f64.powi(n as i32 + 2);
        let jump = 0.9 * 10f64.powi(-(n as i32));
        let want_cw = jump / (h.powi(4) + h.powi(3));
        let want_gen = jump / h.powi(4);
        let got_cw = compute_av(&field, 2, 1, a, b).unwrap().ratio.abs();
        let got_gen = compute_generalized(&field, 2, 1, a, b, &[-1.0], &[0.0]).unwrap().ratio;
        fails.check(rel_err(got_cw, want_cw) <= 1e-6, || format!("n={n}: component-wise {got_cw} vs {want_cw}"));
        fails.check(rel_err(got_gen, want_gen) <= 1e-6, || format!("n={n}: generalized {got_gen} vs {want_gen}"));
        componentwise.push(got_cw);
        generalized.push(got_gen);
    }
    fails.check(rel_err(componentwise[0], 40.96) <= 1e-6, || format!("n=1 ratio {}", componentwise[0]));
    fails.check(round2(componentwise[1]) == 34.70, || format!("n=2 ratio {}", componentwise[1]));
    fails.check(rel_err(generalized[0], 368.64) <= 1e-6, || format!("n=1 generalized {}", generalized[0]));
    fails.check(round2(generalized[1]) == 589.82, || format!("n=2 generalized {}", generalized[1]));
    let cw_steps: Vec<f64> = componentwise.windows(2).map(|w| w[1] / w[0]).collect();
    let gen_steps: Vec<f64> = generalized.windows(2).map(|w| w[1] / w[0]).collect();
    // Step n-1 -> n is at index n-2; n >= 6 starts at index 4.
    for (k, s) in cw_steps.iter().enumerate().skip(4) {
        fails.check((s - 0.8).abs() <= 0.02, || format!("component-wise step to n={} is {s}", k + 2));
    }
    for (k, s) in gen_steps.iter().enumerate().skip(4) {
        fails.check((s - 1.6).abs() <= 0.02, || format!("generalized step to n={} is {s}", k + 2));
    }
    let elapsed = start.elapsed();
    fails.check(elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"));
    Outcome::new(
        fails.count == 0,
        format!(
            "ratios n=1,2: {:.4}, {:.4}; generalized {:.4}, {:.4}; last steps {:.4}, {:.4}; {:.1?}{}",
            componentwise[0],
            componentwise[1],
            generalized[0],
            generalized[1],
            cw_steps[cw_steps.len() - 1],
            gen_steps[gen_steps.len() - 1],
            elapsed,
            fails.summary()
        ),
    )
}

// Criteria 2 and 9.

fn round_trip(r: usize) -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = ExtendConfig::default();
    let mut fails = Failures::default();
    let (mut worst_jet, mut worst_horiz, mut worst_knot) = (0.0_f64, 0.0_f64, 0.0_f64);
    for seed in 0..100u64 {
        let m = 1 + (seed % 3) as usize;
        let (curve, field) = lifted_polynomial_field(r, m, m, 5, seed).unwrap();
        let input = dir.path().join(format!("field_{seed}.json"));
        let output = dir.path().join(format!("curve_{seed}.json"));
        let report = dir.path().join(format!("report_{seed}.json"));
        write_field(&input, &field).unwrap();
        let ext = cmd_extend(&input, &output, &report, &config).unwrap();
        let verified = cmd_verify(&output, &input, None, &config).unwrap();
        let scale = verified.scale;
        worst_jet = worst_jet.max(verified.max_jet_residual / scale);
        worst_horiz = worst_horiz.max(verified.horizontality.max_residual / verified.horizontality.scale);
        worst_knot = worst_knot.max(verified.max_knot_jump / scale);
        fails.check(ext.pass && verified.pass, || format!("seed {seed}: extend {} verify {}", ext.pass, verified.pass));
        fails.check(verified.max_jet_residual <= 1e-9 * scale, || format!("seed {seed}: jet {:e}", verified.max_jet_residual));
        fails.check(
            verified.horizontality.max_residual <= 1e-8 * verified.horizontality.scale,
            || format!("seed {seed}: horizontality {:e}", verified.horizontality.max_residual),
        );
        fails.check(verified.max_knot_jump <= 1e-9 * scale, || format!("seed {seed}: knot {:e}", verified.max_knot_jump));
        // The lifted curve itself is the oracle on K.
        let rebuilt = read_curve(&output).unwrap();
        let CompactSet::Points(pts) = &field.k else { unreachable!() };
        let mut worst = 0.0_f64;
        for &t in pts {
            for c in field.components() {
                for k in 0..=m {
                    let want = curve.eval(c, k, t, Side::Right).unwrap();
                    for side in [Side::Left, Side::Right] {
                        worst = worst.max((rebuilt.eval(c, k, t, side).unwrap() - want).abs());
                    }
                }
            }
        }
        fails.check(worst <= 1e-9 * scale, || format!("seed {seed}: oracle mismatch {worst:e}"));
    }
    let elapsed = start.elapsed();
    fails.check(elapsed < Duration::from_secs(30), || format!("runtime {elapsed:?}"));
    Outcome::new(
        fails.count == 0,
        format!(
            "r={r}, 100 instances: max jet {worst_jet:.1e}, horizontality {worst_horiz:.1e}, knots {worst_knot:.1e} (relative); {elapsed:.1?}{}",
            fails.summary()
        ),
    )
}

/// Scale used by the extension for orthogonality tolerances.
fn gap_scale(field: &WhitneyField, p: &GapPerturbation) -> f64 {
    p.initial_residuals.iter().fold(field.jet_scale(), |a, x| a.max(x.abs()))
}

/// Properties 1 and 3 and the declared orthogonalities of one gap.
fn check_gap_properties(field: &WhitneyField, g: &GapRecord, p: &GapPerturbation, config: &ExtendConfig, fails: &mut Failures) -> f64 {
    let (a, b) = (g.a, g.b);
    let m = field.m;
    let endpoints: Vec<f64> = p.good_subsets.all_slots().iter().flat_map(|s| [s[0], s[1]]).collect();
    let declared: Vec<[f64; 2]> = p.stages.iter().flat_map(|s| s.slots.iter().copied()).collect();
    let grid: Vec<f64> = (0..=2000).map(|k| a + (b - a) * k as f64 / 2000.0).collect();
    for i in 1..=field.r {
        let phi = p.phi(i).unwrap();
        let flat = endpoints.iter().all(|&t| {
            [Side::Left, Side::Right]
                .iter()
                .all(|&side| phi.jet_side(t, m, side).unwrap().iter().all(|v| v.abs() <= 1e-300))
        });
        fails.check(flat, || format!("gap [{a}, {b}]: φ_{i} not flat at a slot endpoint"));
        let outside_zero = grid
            .iter()
            .filter(|&&t| !declared.iter().any(|s| t > s[0] && t < s[1]))
            .all(|&t| phi.jet_side(t, m, Side::Right).unwrap().iter().all(|v| *v == 0.0));
        fails.check(outside_zero, || format!("gap [{a}, {b}]: φ_{i} nonzero outside its slots"));
        let contained = phi
            .bumps()
            .iter()
            .all(|bt| p.good_subsets.all_slots().iter().any(|s| s[0] <= bt.u() && bt.v() <= s[1]));
        fails.check(contained, || format!("gap [{a}, {b}]: a bump of φ_{i} crosses a slot boundary"));
    }
    let scale = gap_scale(field, p);
    let mut worst = 0.0_f64;
    for s in &p.stages {
        for o in &s.orthogonality {
            let bumps: Vec<_> = s.bumps.iter().filter(|(c, _)| *c == o.component).map(|(_, bt)| bt.clone()).collect();
            let phi = PiecewiseFunction::zero(a, b).unwrap().with_bumps(&bumps);
            let value = common::oracle_moment(&phi, &g.hermite[o.against - 1], a, b);
            worst = worst.max(value.abs() / scale);
            fails.check(value.abs() <= config.ortho_tol * scale, || {
                format!("gap [{a}, {b}] stage {}: <φ_{}, f_{}'> = {value:e}", s.path, o.component, o.against)
            });
        }
    }
    worst
}

// Criteria 3 and 9.

fn shifted_area(r: usize) -> Outcome {
    let start = Instant::now();
    let config = ExtendConfig::default();
    let mut fails = Failures::default();
    let (i, j) = (r, r - 1);
    let (mut worst_hit, mut worst_other, mut worst_ortho) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut instances = 0;
    for seed in 0..100u64 {
        let m = 1 + (seed % 3) as usize;
        let (_, field) = lifted_polynomial_field(r, m, m, 5, seed).unwrap();
        let CompactSet::Points(pts) = field.k.clone() else { unreachable!() };
        for delta in [1e-4, 1e-2, 1e-1] {
            instances += 1;
            let shifted = shift_vertical_value(&field, i, j, 4, delta).unwrap();
            let (ext, report) = extend_and_verify(&shifted, &config).unwrap();
            fails.check(report.pass, || format!("seed {seed} δ={delta}: report fails {:?}", report.failures));
            let tol = 1e-9 * delta.max(1.0);
            let target = shifted.value(Component::V(i, j), 0, pts[4]).unwrap();
            let hit = (ext.curve.eval(Component::V(i, j), 0, pts[4], Side::Left).unwrap() - target).abs();
            worst_hit = worst_hit.max(hit / delta.max(1.0));
            fails.check(hit <= tol, || format!("seed {seed} δ={delta}: target missed by {hit:e}"));
            for (p, q) in pairs(r) {
                for &t in &pts {
                    let want = field.value(Component::V(p, q), 0, t).unwrap();
                    let got = ext.curve.eval(Component::V(p, q), 0, t, Side::Left).unwrap();
                    if (p, q) != (i, j) || t != pts[4] {
                        worst_other = worst_other.max((got - want).abs());
                        fails.check((got - want).abs() <= 1e-9, || format!("seed {seed} δ={delta}: x_{p}{q}({t}) moved by {:e}", got - want));
                    }
                }
            }
            for g in &ext.gaps {
                let Some(p) = &g.perturbation else { continue };
                let funcs: Vec<PiecewiseFunction> = (1..=r).map(|c| perturbed(&g.hermite[c - 1], &p.phi(c).unwrap(), g.a, g.b)).collect();
                let residuals = oracle_residuals(&shifted, &funcs, g.a, g.b);
                let worst = residuals.iter().fold(0.0_f64, |x, y| x.max(y.abs()));
                fails.check(worst <= tol, || format!("seed {seed} δ={delta}: gap residual {worst:e}"));
                worst_ortho = worst_ortho.max(check_gap_properties(&shifted, g, p, &config, &mut fails));
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        fails.count == 0,
        format!(
            "r={r}, {instances} instances: target error {worst_hit:.1e}, other areas {worst_other:.1e}, orthogonality {worst_ortho:.1e} (relative); {elapsed:.1?}{}",
            fails.summary()
        ),
    )
}

// Criterion 4.

fn induction() -> Outcome {
    let start = Instant::now();
    let config = ExtendConfig::default();
    let mut fails = Failures::default();
    let (mut worst_area, mut worst_drift) = (0.0_f64, 0.0_f64);
    let mut pipeline = Duration::ZERO;
    let mut stages = 0;
    for r in [4usize, 5] {
        for seed in 0..20u64 {
            let (_, field) = lifted_polynomial_field(r, 1, 5, 5, 1000 + seed).unwrap();
            let t0 = Instant::now();
            let (ext, report) = extend_and_verify(&field, &config).unwrap();
            pipeline += t0.elapsed();
            fails.check(report.pass, || format!("r={r} seed {seed}: report fails {:?}", report.failures));
            for g in &ext.gaps {
                let Some(p) = &g.perturbation else { continue };
                let scale = gap_scale(&field, p);
                let (a, b) = (g.a, g.b);
                let funcs: Vec<PiecewiseFunction> = (1..=r).map(|c| perturbed(&g.hermite[c - 1], &p.phi(c).unwrap(), a, b)).collect();
                let residuals = oracle_residuals(&field, &funcs, a, b);
                fails.check(residuals.len() == pair_count(r), || "residual count".into());
                for (n, x) in residuals.iter().enumerate() {
                    worst_area = worst_area.max(x.abs());
                    fails.check(x.abs() <= 1e-8, || format!("r={r} seed {seed} gap [{a}, {b}] pair #{n}: residual {x:e}"));
                }
                // Stage s changes the integrands only on the supports of its
                // own bumps, so the drift of a pair is the change of its area
                // over those supports.
                for (s, stage) in p.stages.iter().enumerate().skip(1) {
                    if stage.bumps.is_empty() {
                        continue;
                    }
                    stages += 1;
                    let before: Vec<PiecewiseFunction> = (1..=r)
                        .map(|c| perturbed(&g.hermite[c - 1], &p.phi_after_stage(c, s - 1).unwrap(), a, b))
                        .collect();
                    let after: Vec<PiecewiseFunction> = (1..=r)
                        .map(|c| perturbed(&g.hermite[c - 1], &p.phi_after_stage(c, s).unwrap(), a, b))
                        .collect();
                    let mut supports: Vec<[f64; 2]> = stage.bumps.iter().map(|(_, bt)| bt.interval).collect();
                    supports.sort_by(|x, y| x[0].total_cmp(&y[0]));
                    supports.dedup();
                    for &(pi, pj) in &p.stages[s - 1].fixed_pairs {
                        let drift: f64 = supports
                            .iter()
                            .map(|sup| {
                                oracle_area(&after[pi - 1], &after[pj - 1], sup[0], sup[1])
                                    - oracle_area(&before[pi - 1], &before[pj - 1], sup[0], sup[1])
                            })
                            .sum();
                        worst_drift = worst_drift.max(drift.abs() / scale);
                        fails.check(drift.abs() <= 1e-9 * scale, || {
                            format!("r={r} seed {seed} stage {}: pair ({pi},{pj}) drifted by {drift:e}", stage.path)
                        });
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    fails.check(pipeline < Duration::from_secs(120), || format!("runtime {pipeline:?}"));
    Outcome::new(
        fails.count == 0,
        format!(
            "r=4,5 x 20: max area residual {worst_area:.1e}, max staged drift {worst_drift:.1e} (relative) over {stages} stages; extension {pipeline:.1?}, with audits {elapsed:.1?}{}",
            fails.summary()
        ),
    )
}

// Criterion 5.

fn random_polynomial(degree: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    if c[degree].abs() < 1e-3 {
        c[degree] = 0.5;
    }
    Polynomial::new(c)
}

fn dense_abs(p: &Polynomial, a: f64, b: f64, n: usize) -> (f64, f64) {
    (0..=n).map(|k| p.eval(a + (b - a) * k as f64 / n as f64).abs()).fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn markov_toolkit() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fails = Failures::default();
    let mut worst_cheb = 0.0_f64;
    for degree in 1..=8usize {
        for _ in 0..1000 {
            let p = random_polynomial(degree, &mut rng);
            let a = rng.gen_range(-2.0..1.0);
            let b = a + rng.gen_range(0.1..3.0);
            let report = markov_bound_check(&p, a, b);
            fails.check(report.pass, || format!("Markov violated for degree {degree}: {report:?}"));
            let n = sup_l1_l2_norms(&p, a, b);
            let slack = 1e-12 * n.sup;
            let chain = n.l1avg <= n.l2avg + slack && n.l2avg <= n.sup + slack && n.sup <= 8.0 * (degree * degree) as f64 * n.l1avg + slack;
            fails.check(chain, || format!("norm chain violated for degree {degree}: {n:?}"));
            let w = markov_subinterval(&p, a, b);
            let min_width = (b - a) / (4.0 * (degree * degree) as f64);
            let (_, dense_max) = dense_abs(&p, a, b, 20_000);
            let (window_min, _) = dense_abs(&p, w.start, w.end, 2_000);
            let ok = w.start >= a && w.end <= b + 1e-12 && w.end - w.start >= min_width * (1.0 - 1e-12) && window_min >= 0.5 * dense_max * (1.0 - 1e-9);
            fails.check(ok, || format!("Markov window for degree {degree}: {w:?}, dense max {dense_max}"));
        }
        let t = Polynomial::chebyshev(degree);
        let report = markov_bound_check(&t, -1.0, 1.0);
        let gap = (report.max_derivative - report.bound).abs() / report.bound;
        worst_cheb = worst_cheb.max(gap);
        fails.check(gap <= 1e-12, || format!("Chebyshev T_{degree}: {report:?}"));
    }
    Outcome::new(
        fails.count == 0,
        format!("8000 polynomials, Chebyshev equality gap {worst_cheb:.1e}; {:.1?}{}", start.elapsed(), fails.summary()),
    )
}

// Criterion 6.

fn algebraic_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut fails = Failures::default();
    let mut worst = 0.0_f64;
    for instance in 0..500 {
        let r = 3 + instance % 3;
        let i = rng.gen_range(2..=r);
        let j = rng.gen_range(1..i);
        let f: Vec<PiecewiseFunction> = (0..r)
            .map(|_| {
                let deg = rng.gen_range(0..=5);
                PiecewiseFunction::from_polynomial(&random_polynomial(deg, &mut rng).scale(rng.gen_range(0.1..10.0)), 0.0, 1.0).unwrap()
            })
            .collect();
        let free = free_indices(r, i, j);
        let c: Vec<f64> = free.iter().map(|_| rng.gen_range(-4.0..4.0)).collect();
        let ct: Vec<f64> = free.iter().map(|_| rng.gen_range(-4.0..4.0)).collect();
        let points: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        let residual = algebraic_identity_residual(&f, &c, &ct, i, j, &points).unwrap();
        // Expansion of ε_i ε_j' − ε_i' ε_j written out term by term.
        let mut magnitude = 0.0_f64;
        let mut expansion_gap = 0.0_f64;
        for &t in &points {
            let jets: Vec<Vec<f64>> = f.iter().map(|g| g.jet_side(t, 1, Side::Right).unwrap()).collect();
            magnitude = jets.iter().flatten().fold(magnitude, |m, v| m.max(v.abs()));
            let a = |k: usize, n: usize| jets[k - 1][0] * jets[n - 1][1] - jets[k - 1][1] * jets[n - 1][0];
            let mut expanded = a(i, j);
            for (pos, &k) in free.iter().enumerate() {
                expanded -= c[pos] * a(i, k) + ct[pos] * a(k, j);
                for (pos2, &n) in free.iter().enumerate() {
                    expanded += ct[pos] * c[pos2] * a(k, n);
                }
            }
            let library = assemble_e(r, i, j, &c, &ct, a);
            expansion_gap = expansion_gap.max((library - expanded).abs());
        }
        let l1 = |v: &[f64]| 1.0 + v.iter().map(|x| x.abs()).sum::<f64>();
        let scale = l1(&c) * l1(&ct) * magnitude * magnitude;
        worst = worst.max(residual.max(expansion_gap) / scale);
        fails.check(residual <= 1e-10 * scale, || format!("instance {instance}: residual {residual:e} at scale {scale:e}"));
        fails.check(expansion_gap <= 1e-10 * scale, || format!("instance {instance}: expansion differs by {expansion_gap:e}"));
    }
    Outcome::new(
        fails.count == 0,
        format!("500 instances, max residual / scale {worst:.1e}; {:.1?}{}", start.elapsed(), fails.summary()),
    )
}

// Criterion 7.

fn necessity_decay() -> Outcome {
    let start = Instant::now();
    let mut fails = Failures::default();
    let config = AuditConfig::default();
    let mut worst_fraction = 0.0_f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let curve = random_lifted_curve(3, 1, 4, &mut rng).unwrap();
        let x0 = 0.1 + 0.7 * rng.gen::<f64>();
        let scales: Vec<i32> = (3..=10).collect();
        let mut points = vec![x0];
        points.extend(scales.iter().map(|s| x0 + 0.5_f64.powi(*s)));
        let field = WhitneyField::from_curve(&curve, points).unwrap();
        let point_pairs: Vec<(f64, f64)> = scales.iter().map(|s| (x0, x0 + 0.5_f64.powi(*s))).collect();
        let audit = audit_generalized(&field, &point_pairs, &config).unwrap();
        let per_scale: Vec<f64> = point_pairs
            .iter()
            .map(|&(a, b)| {
                audit
                    .records
                    .iter()
                    .filter(|rec| rec.best.a == a && rec.best.b == b)
                    .fold(0.0_f64, |m, rec| m.max(rec.best.ratio))
            })
            .collect();
        for k in 0..per_scale.len() - 3 {
            let (coarse, fine) = (per_scale[k], per_scale[k + 3]);
            fails.check(fine < coarse, || format!("seed {seed}: scale 2^-{} ratio {fine:e} not below 2^-{} ratio {coarse:e}", k + 6, k + 3));
        }
        let fraction = per_scale[per_scale.len() - 1] / per_scale[0];
        worst_fraction = worst_fraction.max(fraction);
        fails.check(fraction < 0.1, || format!("seed {seed}: finest / coarsest = {fraction}"));
    }
    Outcome::new(
        fails.count == 0,
        format!("20 fields, worst finest/coarsest {worst_fraction:.2e}; {:.1?}{}", start.elapsed(), fails.summary()),
    )
}

// Criterion 8.

fn good_subsets() -> Outcome {
    let start = Instant::now();
    let mut fails = Failures::default();
    let mut families = 0;
    let (a, b) = (0.3, 1.7);
    let len = b - a;
    let disjoint = |slots: &mut Vec<[f64; 2]>| {
        slots.sort_by(|x, y| x[0].total_cmp(&y[0]));
        slots.windows(2).all(|w| w[0][1] <= w[1][0] + 1e-15)
    };
    for r in 3..=6usize {
        for big_r in 0..=3usize {
            for m in 1..=3usize {
                families += 1;
                let gs = build_good_subsets(r, big_r, m, a, b).unwrap();
                let l1 = gs.l1;
                let bounds = l1 > 2 * (r + big_r) && l1 > 8 * m * m;
                let minimal = !((l1 - 1) > 2 * (r + big_r) && (l1 - 1) > 8 * m * m);
                fails.check(bounds && minimal && l1 == minimal_l1(r, big_r, m), || format!("L1 = {l1} for r={r} R={big_r} m={m}"));
                let l2 = 2.0 / (l1 as f64 * (r * (r - 1)) as f64);
                fails.check((gs.l2 - l2).abs() <= 1e-15, || format!("L2 = {} for r={r} R={big_r} m={m}", gs.l2));
                let mut all = gs.all_slots();
                fails.check(all.len() == l1 * pair_count(r), || "slot count".into());
                fails.check(disjoint(&mut all), || format!("overlapping slots for r={r} R={big_r} m={m}"));
                let widths_ok = gs.families.iter().flatten().all(|s| ((s[1] - s[0]) - l2 * len).abs() <= 1e-12 * len);
                fails.check(widths_ok, || format!("slot widths for r={r} R={big_r} m={m}"));
                // Sliding-window scan of the Markov containment property.
                let w = len / (4.0 * (m * m) as f64);
                let contained = (0..=1000).all(|k| {
                    let s = a + (len - w) * k as f64 / 1000.0;
                    gs.families.iter().all(|fam| fam.iter().any(|slot| slot[0] >= s - 1e-12 && slot[1] <= s + w + 1e-12))
                });
                fails.check(contained, || format!("Markov containment fails for r={r} R={big_r} m={m}"));
                // Halving: both halves are disjoint families of half width
                // that tile the original slots.
                let (left, right) = gs.halve();
                let mut halves: Vec<[f64; 2]> = left.all_slots().into_iter().chain(right.all_slots()).collect();
                fails.check(disjoint(&mut halves), || "halves overlap".into());
                let halves_ok = left.families.iter().zip(&right.families).zip(&gs.families).all(|((lf, rf), of)| {
                    lf.iter().zip(rf).zip(of).all(|((l, rr), o)| l[0] == o[0] && rr[1] == o[1] && l[1] == rr[0] && ((l[1] - l[0]) - 0.5 * (o[1] - o[0])).abs() <= 1e-15)
                });
                fails.check(halves_ok && left.l2 == 0.5 * gs.l2, || format!("halving for r={r} R={big_r} m={m}"));
                // Relabeling: dropping a label keeps the families of the
                // remaining pairs.
                for k in 1..=r {
                    let dropped = gs.relabel_drop(k).unwrap();
                    let old = |x: usize| if x < k { x } else { x + 1 };
                    let ok = dropped.r == r - 1
                        && pairs(r - 1).into_iter().all(|(i, j)| dropped.slots(i, j) == gs.slots(old(i), old(j)));
                    fails.check(ok, || format!("relabel_drop({k}) for r={r}"));
                }
            }
        }
    }
    let example = build_good_subsets(3, 0, 1, 0.0, 1.0).unwrap();
    fails.check(example.l1 == 9 && (example.l2 - 1.0 / 27.0).abs() <= 1e-15, || format!("r=3 R=0 m=1: L1 = {}", example.l1));
    let example = build_good_subsets(3, 0, 2, 0.0, 1.0).unwrap();
    fails.check(example.l1 == 33 && (example.l2 - 1.0 / 99.0).abs() <= 1e-15, || format!("r=3 R=0 m=2: L1 = {}", example.l1));
    Outcome::new(
        fails.count == 0,
        format!("{families} families; r=3 R=0 m=1 gives L1 = 9; {:.1?}{}", start.elapsed(), fails.summary()),
    )
}

// Criterion 9.

fn heisenberg_regression() -> Outcome {
    let trip = round_trip(2);
    let shift = shifted_area(2);
    Outcome::new(trip.pass && shift.pass, format!("round trip: {} | shifted: {}", trip.detail, shift.detail))
}

fn run(f: impl FnOnce() -> Outcome + UnwindSafe) -> Outcome {
    catch_unwind(f).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::new(false, format!("panicked: {msg}"))
    })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("counterexample rates", counterexample_rates),
        ("round-trip extension", || round_trip(3)),
        ("perturbed-area extension", || shifted_area(3)),
        ("G_r induction", induction),
        ("Markov and norm toolkit", markov_toolkit),
        ("algebraic identity", algebraic_identity),
        ("necessity decay", necessity_decay),
        ("good subsets", good_subsets),
        ("G_2 regression", heisenberg_regression),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.into_iter().enumerate() {
        let out = run(f);
        if !out.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if out.pass { "PASS" } else { "FAIL" }, n + 1, out.detail);
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
