//! Piecewise polynomials with added bump terms.

use super::bump::BumpTerm;
use super::polynomial::Polynomial;
use super::quadrature::{integrate_panels, DEFAULT_QUAD_TOL};
use crate::{Error, Result};

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Limit from the left.
    Left,
    /// Limit from the right.
    Right,
}

/// A function on `[breakpoints[0], breakpoints[last]]` equal to one polynomial
/// per sub-interval plus a sum of bump terms.
///
/// Piece `k` is expressed in powers of `(x − breakpoints[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
    bumps: Vec<BumpTerm>,
    max_bump_width: f64,
}

impl PiecewiseFunction {
    /// Builds a function from breakpoints, local pieces and bumps.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Polynomial>, bumps: Vec<BumpTerm>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::Dimension(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        let mut f = Self {
            breakpoints,
            pieces,
            bumps: Vec::new(),
            max_bump_width: 0.0,
        };
        f.set_bumps(bumps);
        Ok(f)
    }

    /// One global polynomial `p` (in the variable `x`) on `[a, b]`.
    pub fn from_polynomial(p: &Polynomial, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![p.shift(a)], Vec::new())
    }

    /// One polynomial already expressed in powers of `(x − a)` on `[a, b]`.
    pub fn from_local_polynomial(p: Polynomial, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![p], Vec::new())
    }

    /// The zero function on `[a, b]`.
    pub fn zero(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![Polynomial::zero()], Vec::new())
    }

    fn set_bumps(&mut self, mut bumps: Vec<BumpTerm>) {
        bumps.sort_by(|x, y| x.u().total_cmp(&y.u()));
        self.max_bump_width = bumps.iter().map(BumpTerm::width).fold(0.0, f64::max);
        self.bumps = bumps;
    }

    /// Returns a copy with extra bump terms added.
    pub fn with_bumps(&self, extra: &[BumpTerm]) -> Self {
        let mut out = self.clone();
        let mut all = out.bumps.clone();
        all.extend_from_slice(extra);
        out.set_bumps(all);
        out
    }

    /// Domain `[t0, t1]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().expect("nonempty"))
    }

    /// Breakpoints.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Local pieces.
    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    /// Bump terms sorted by left endpoint.
    pub fn bumps(&self) -> &[BumpTerm] {
        &self.bumps
    }

    /// Piece containing `t`; breakpoints belong to the piece on their right
    /// (left for the final breakpoint) unless `side` says otherwise.
    pub fn piece_index(&self, t: f64, side: Side) -> usize {
        let n = self.pieces.len();
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        let mut k = idx.saturating_sub(1).min(n - 1);
        if side == Side::Left && k > 0 && t == self.breakpoints[k] {
            k -= 1;
        }
        k
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain();
        let slack = 1e-12 * (b - a).max(1.0);
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain {
                point: t,
                what: format!("the domain [{a}, {b}]"),
            });
        }
        Ok(())
    }

    /// Bumps whose open support contains `t`.
    fn active_bumps(&self, t: f64) -> impl Iterator<Item = &BumpTerm> {
        let end = self.bumps.partition_point(|b| b.u() < t);
        let lower = t - self.max_bump_width;
        let start = self.bumps[..end].partition_point(|b| b.u() < lower);
        self.bumps[start..end].iter().filter(move |b| b.v() > t)
    }

    /// Exact `k`-th derivative at `t`, using the piece to the right of a
    /// breakpoint.
    pub fn eval_derivative(&self, k: usize, t: f64) -> Result<f64> {
        self.eval_side(k, t, Side::Right)
    }

    /// Exact `k`-th derivative at `t` from the given side.
    pub fn eval_side(&self, k: usize, t: f64, side: Side) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.eval_unchecked(k, t, side))
    }

    /// Value at `t` (right-continuous at breakpoints).
    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval_derivative(0, t)
    }

    pub(crate) fn eval_unchecked(&self, k: usize, t: f64, side: Side) -> f64 {
        let p = self.piece_index(t, side);
        let mut v = self.pieces[p].eval_derivative(k, t - self.breakpoints[p]);
        for b in self.active_bumps(t) {
            v += b.derivative(k, t);
        }
        v
    }

    /// Derivatives `0..=n` at `t` from the right.
    pub(crate) fn jet_unchecked(&self, t: f64, n: usize, side: Side) -> Vec<f64> {
        let p = self.piece_index(t, side);
        let local = t - self.breakpoints[p];
        let mut out: Vec<f64> = (0..=n).map(|k| self.pieces[p].eval_derivative(k, local)).collect();
        for b in self.active_bumps(t) {
            for (o, d) in out.iter_mut().zip(b.derivatives(t, n)) {
                *o += d;
            }
        }
        out
    }

    /// Derivatives `0..=n` at `t` from the given side.
    pub fn jet_side(&self, t: f64, n: usize, side: Side) -> Result<Vec<f64>> {
        self.check_domain(t)?;
        Ok(self.jet_unchecked(t, n, side))
    }

    /// True if some bump overlaps `(a, b)`.
    pub fn has_bumps_in(&self, a: f64, b: f64) -> bool {
        let end = self.bumps.partition_point(|x| x.u() < b);
        let lower = a - self.max_bump_width;
        let start = self.bumps[..end].partition_point(|x| x.u() < lower);
        self.bumps[start..end].iter().any(|x| x.v() > a)
    }

    /// Breakpoints and bump endpoints, used to align quadrature panels.
    pub fn all_knots(&self) -> Vec<f64> {
        let mut k = self.breakpoints.clone();
        for b in &self.bumps {
            k.push(b.u());
            k.push(b.v());
        }
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// The polynomial of piece `k` re-expanded about `x0`.
    pub fn piece_about(&self, k: usize, x0: f64) -> Polynomial {
        self.pieces[k].shift(x0 - self.breakpoints[k])
    }

    /// `Σ c_l f_l` over functions sharing a domain; breakpoints are merged.
    pub fn linear_combination(terms: &[(f64, &PiecewiseFunction)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("empty linear combination".into()))?;
        let (a, b) = first.1.domain();
        let mut knots: Vec<f64> = Vec::new();
        for (_, f) in terms {
            let (fa, fb) = f.domain();
            if (fa - a).abs() > 1e-12 * (b - a).max(1.0) || (fb - b).abs() > 1e-12 * (b - a).max(1.0) {
                return Err(Error::Dimension("functions have different domains".into()));
            }
            knots.extend_from_slice(f.breakpoints());
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (b - a).max(1.0));
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut acc = Polynomial::zero();
            for (c, f) in terms {
                let k = f.piece_index(mid, Side::Right);
                acc = &acc + &f.piece_about(k, w[0]).scale(*c);
            }
            pieces.push(acc);
        }
        let bumps = terms
            .iter()
            .flat_map(|(c, f)| f.bumps().iter().map(move |bt| bt.scaled(*c)))
            .collect();
        Self::new(knots, pieces, bumps)
    }
}

/// Integrates `g(t)` over `[a, b]`, with panels split at `knots` and
/// adaptive refinement wherever `bumpy(u, v)` holds.
pub fn integrate_with<F, B>(g: &F, a: f64, b: f64, knots: &[f64], bumpy: B) -> Result<f64>
where
    F: Fn(f64) -> f64,
    B: Fn(f64, f64) -> bool,
{
    integrate_panels(g, a, b, knots, bumpy, DEFAULT_QUAD_TOL)
}

/// `∫_a^b f`.
pub fn integrate(f: &PiecewiseFunction, a: f64, b: f64) -> Result<f64> {
    let g = |t: f64| f.eval_unchecked(0, t, Side::Right);
    integrate_with(&g, a, b, &f.all_knots(), |u, v| f.has_bumps_in(u, v))
}

/// `∫_a^b |f|`: exact root isolation on bump-free panels, adaptive
/// quadrature elsewhere.
pub fn integrate_abs(f: &PiecewiseFunction, a: f64, b: f64) -> Result<f64> {
    f.check_domain(a)?;
    f.check_domain(b)?;
    if !(b > a) {
        return Ok(0.0);
    }
    let mut knots: Vec<f64> = vec![a, b];
    knots.extend(f.all_knots().into_iter().filter(|t| *t > a && *t < b));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (u, v) = (w[0], w[1]);
        if f.has_bumps_in(u, v) {
            let g = |t: f64| f.eval_unchecked(0, t, Side::Right).abs();
            total += super::quadrature::adaptive(&g, u, v, DEFAULT_QUAD_TOL, 1e-300)?;
        } else {
            let k = f.piece_index(0.5 * (u + v), Side::Right);
            let p = f.piece_about(k, u);
            total += p.integrate_abs(0.0, v - u);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::bump::{make_bump, BumpKind};
    use super::*;

    #[test]
    fn evaluation_and_sides() {
        let f = PiecewiseFunction::new(
            vec![0.0, 1.0, 2.0],
            vec![Polynomial::new(vec![0.0, 1.0]), Polynomial::new(vec![2.0])],
            vec![],
        )
        .unwrap();
        assert_eq!(f.eval_side(0, 1.0, Side::Left).unwrap(), 1.0);
        assert_eq!(f.eval_side(0, 1.0, Side::Right).unwrap(), 2.0);
        assert!(f.value(3.0).is_err());
    }

    #[test]
    fn abs_integrals() {
        let f = PiecewiseFunction::from_polynomial(&Polynomial::new(vec![0.0, 1.0]), -1.0, 1.0).unwrap();
        assert!((integrate_abs(&f, -1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let c = PiecewiseFunction::from_polynomial(&Polynomial::constant(-3.0), 2.0, 5.0).unwrap();
        assert!((integrate_abs(&c, 2.0, 5.0).unwrap() - 9.0).abs() < 1e-14);
    }

    #[test]
    fn bump_integral() {
        let eta = make_bump(BumpKind::Eta, [0.25, 0.75], 2.0, 2).unwrap();
        let f = PiecewiseFunction::zero(0.0, 1.0).unwrap().with_bumps(&[eta]);
        let expected = 2.0 * 0.5 * super::super::bump::profile_integral() * 4.0_f64.exp();
        let got = integrate(&f, 0.0, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    }
}
