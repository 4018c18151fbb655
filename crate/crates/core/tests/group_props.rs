//! Group law, horizontal lifts and signed areas against independent oracles.

mod common;

use proptest::prelude::*;

use common::oracle_area;
use cw_core::group::{
    horizontality_check, inverse, multiply, pair_count, pair_index, pairs, pcal, signed_area, vertical_lift, Component, CurvePiece, GroupElement,
};
use cw_core::poly::{make_bump, BumpKind, PiecewiseFunction, Polynomial, Side};

fn element(r: usize) -> impl Strategy<Value = GroupElement> {
    (
        prop::collection::vec(-10.0..10.0_f64, r),
        prop::collection::vec(-10.0..10.0_f64, pair_count(r)),
    )
        .prop_map(move |(x, v)| GroupElement::new(r, x, v).unwrap())
}

fn triple() -> impl Strategy<Value = (GroupElement, GroupElement, GroupElement)> {
    (2usize..=6).prop_flat_map(|r| (element(r), element(r), element(r)))
}

fn close(x: &GroupElement, y: &GroupElement, tol: f64) -> bool {
    x.horizontal.iter().zip(&y.horizontal).chain(x.vertical.iter().zip(&y.vertical)).all(|(a, b)| (a - b).abs() <= tol)
}

proptest! {
    #[test]
    fn product_is_associative((x, y, z) in triple()) {
        let left = multiply(&multiply(&x, &y).unwrap(), &z).unwrap();
        let right = multiply(&x, &multiply(&y, &z).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12 * 1e3));
    }

    #[test]
    fn identity_and_inverse((x, _, _) in triple()) {
        let e = GroupElement::identity(x.r);
        prop_assert_eq!(multiply(&x, &e).unwrap(), x.clone());
        prop_assert_eq!(multiply(&e, &x).unwrap(), x.clone());
        prop_assert!(close(&multiply(&x, &inverse(&x)).unwrap(), &e, 0.0));
        prop_assert!(close(&multiply(&inverse(&x), &x).unwrap(), &e, 0.0));
    }

    /// The lift of a polygon starting at the identity ends at the product of
    /// its straight steps, each step being the element `(Δx, 0)`.
    #[test]
    fn polygon_lift_is_product_of_steps(
        r in 2usize..=4,
        steps in prop::collection::vec(prop::collection::vec(-2.0..2.0_f64, 4), 1..6),
    ) {
        let n = steps.len();
        let breaks: Vec<f64> = (0..=n).map(|k| k as f64).collect();
        let mut expected = GroupElement::identity(r);
        let mut position = vec![0.0; r];
        let mut pieces: Vec<Vec<Polynomial>> = vec![Vec::new(); r];
        for step in &steps {
            let delta: Vec<f64> = step[..r].to_vec();
            for i in 0..r {
                pieces[i].push(Polynomial::new(vec![position[i], delta[i]]));
                position[i] += delta[i];
            }
            let increment = GroupElement::new(r, delta, vec![0.0; pair_count(r)]).unwrap();
            expected = multiply(&expected, &increment).unwrap();
        }
        let horizontal: Vec<PiecewiseFunction> =
            pieces.into_iter().map(|p| PiecewiseFunction::new(breaks.clone(), p, Vec::new()).unwrap()).collect();
        let curve = vertical_lift(horizontal, &GroupElement::identity(r), 1).unwrap();
        let end = curve.point(n as f64).unwrap();
        prop_assert!(close(&end, &expected, 1e-11));
    }

    /// `pcal(k)` is the k-th derivative of the exact lift of two polynomials.
    #[test]
    fn pcal_differentiates_the_lift(
        p in prop::collection::vec(-3.0..3.0_f64, 1..6),
        q in prop::collection::vec(-3.0..3.0_f64, 1..6),
        t in -1.0..1.0_f64,
    ) {
        let (p, q) = (Polynomial::new(p), Polynomial::new(q));
        let (dp, dq) = (p.derivative(), q.derivative());
        // ½(p q' − p' q) as an explicit polynomial product.
        let mut w = vec![0.0; p.coeffs().len() + q.coeffs().len()];
        for (a, x) in p.coeffs().iter().enumerate() {
            for (b, y) in dq.coeffs().iter().enumerate() {
                w[a + b] += 0.5 * x * y;
            }
        }
        for (a, x) in dp.coeffs().iter().enumerate() {
            for (b, y) in q.coeffs().iter().enumerate() {
                w[a + b] -= 0.5 * x * y;
            }
        }
        let lift = Polynomial::new(w).antiderivative();
        for k in 1..=6 {
            let x: Vec<f64> = (0..=k).map(|l| p.eval_derivative(l, t)).collect();
            let y: Vec<f64> = (0..=k).map(|l| q.eval_derivative(l, t)).collect();
            let want = lift.eval_derivative(k, t);
            prop_assert!((pcal(k, &x, &y) - want).abs() <= 1e-9 * (1.0 + want.abs()), "k = {}", k);
        }
    }

    /// Semi-analytic signed areas agree with brute-force quadrature on
    /// functions carrying overlapping bumps of both kinds.
    #[test]
    fn signed_area_matches_quadrature(
        p in prop::collection::vec(-2.0..2.0_f64, 1..7),
        q in prop::collection::vec(-2.0..2.0_f64, 1..7),
        raw in prop::collection::vec((0.0..0.9_f64, 0.01..0.3_f64, -50.0..50.0_f64, any::<bool>(), any::<bool>()), 0..6),
        window in (0.0..0.5_f64, 0.5..1.0_f64),
    ) {
        let mut f = PiecewiseFunction::from_polynomial(&Polynomial::new(p), 0.0, 1.0).unwrap();
        let mut g = PiecewiseFunction::new(
            vec![0.0, 0.4, 1.0],
            vec![Polynomial::new(q.clone()), Polynomial::new(q.iter().rev().copied().collect())],
            Vec::new(),
        ).unwrap();
        for (u, w, amp, eta, first) in raw {
            let kind = if eta { BumpKind::Eta } else { BumpKind::Xi };
            let b = make_bump(kind, [u, (u + w).min(1.0)], amp, 3).unwrap();
            if first { f = f.with_bumps(&[b]); } else { g = g.with_bumps(&[b]); }
        }
        let (x, y) = window;
        let want = oracle_area(&f, &g, x, y);
        let got = signed_area(&f, &g, x, y).unwrap();
        let scale = 1.0 + oracle_area(&f, &f.with_bumps(&[]), x, y).abs() + want.abs();
        prop_assert!((got - want).abs() <= 1e-10 * scale, "library {} oracle {}", got, want);
    }
}

#[test]
fn lifted_curve_is_horizontal_and_corruption_is_located() {
    let f1 = PiecewiseFunction::from_polynomial(&Polynomial::new(vec![0.0, 1.0, -0.5, 0.25]), 0.0, 1.0).unwrap();
    let f2 = PiecewiseFunction::from_polynomial(&Polynomial::new(vec![1.0, 0.0, 2.0]), 0.0, 1.0)
        .unwrap()
        .with_bumps(&[make_bump(BumpKind::Xi, [0.2, 0.5], 3.0, 3).unwrap()]);
    let f3 = PiecewiseFunction::from_polynomial(&Polynomial::new(vec![-1.0, 0.5]), 0.0, 1.0).unwrap();
    let start = GroupElement::new(3, vec![0.0, 1.0, -1.0], vec![0.1, 0.2, 0.3]).unwrap();
    let curve = vertical_lift(vec![f1.clone(), f2.clone(), f3], &start, 3).unwrap();
    let report = horizontality_check(&curve, 1e-8).unwrap();
    assert!(report.pass, "{report:?}");
    // The lift at the end matches the start plus the brute-force area.
    let want = start.vertical_at(2, 1) + oracle_area(&f2, &f1, 0.0, 1.0);
    let got = curve.eval(Component::V(2, 1), 0, 1.0, Side::Left).unwrap();
    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    for (i, j) in pairs(3) {
        let t = 0.7;
        let v = curve.eval(Component::V(i, j), 1, t, Side::Right).unwrap();
        let fi = curve.eval(Component::H(i), 0, t, Side::Right).unwrap();
        let fj = curve.eval(Component::H(j), 0, t, Side::Right).unwrap();
        let dfi = curve.eval(Component::H(i), 1, t, Side::Right).unwrap();
        let dfj = curve.eval(Component::H(j), 1, t, Side::Right).unwrap();
        assert!((v - 0.5 * (fi * dfj - dfi * fj)).abs() <= 1e-12);
    }
    // A jump of 0.01 in γ_31 at t = 0.6 is reported for that pair only.
    let mut broken = curve.clone();
    let anchor = curve.eval(Component::V(3, 1), 0, 0.6, Side::Left).unwrap() + 0.01;
    let v31 = &mut broken.vertical[pair_index(3, 1)];
    let first = v31.pieces[0].clone();
    v31.breakpoints = vec![0.0, 0.6, 1.0];
    v31.pieces = vec![first, CurvePiece::Lift { anchor }];
    let report = horizontality_check(&broken, 1e-8).unwrap();
    assert!(!report.pass);
    for pair in &report.pairs {
        let bad = pair.increment_residual > 1e-3;
        assert_eq!(bad, (pair.i, pair.j) == (3, 1), "{pair:?}");
        if bad {
            assert!((pair.increment_residual - 0.01).abs() < 1e-12 && pair.increment_at >= 0.6, "{pair:?}");
        }
    }
}
