//! Real roots of quartic polynomials by two Ferrari-type factorizations.
//!
//! Both variants reduce the quartic to a difference of squares
//! `(x² + l x + k)² − (P x + Q)²` using one real root of a cubic solvent,
//! then read the roots off the two quadratic factors. Any root whose
//! computation would need the square root of a negative number is dropped;
//! no complex arithmetic is performed and no root is polished afterwards.

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|c4| < LEADING_REL_TOL · max|c_i|` counts as a vanishing leading term.
pub const LEADING_REL_TOL: f64 = 1e-12;

/// Coefficients at or below this magnitude are all treated as zero.
pub const ZERO_POLY_TOL: f64 = 1e-300;

/// Method 1 is used above this `|c3 / c4|` ratio.
pub const DISPATCH_RATIO: f64 = 10.0;

/// `c4 x⁴ + c3 x³ + c2 x² + c1 x + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    pub const fn new(c4: f64, c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        QuarticCoeffs { c4, c3, c2, c1, c0 }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.c4, self.c3, self.c2, self.c1, self.c0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((self.c4 * x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array()
            .iter()
            .fold(0.0, |m, c| f64::max(m, c.abs()))
    }

    /// `|p(r)| / (max|c_i| · max(1, |r|)⁴)`.
    pub fn relative_residual(&self, r: f64) -> f64 {
        let scale = r.abs().max(1.0).powi(4) * self.max_abs();
        self.eval(r).abs() / scale
    }

    pub fn scaled(&self, k: f64) -> Self {
        QuarticCoeffs::new(
            self.c4 * k,
            self.c3 * k,
            self.c2 * k,
            self.c1 * k,
            self.c0 * k,
        )
    }

    fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    fn leading_is_negligible(&self) -> bool {
        !(self.c4.abs() >= LEADING_REL_TOL * self.max_abs()) || self.c4 == 0.0
    }
}

/// Up to four real roots, sorted ascending. Repeated roots may appear more
/// than once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealRoots {
    roots: ArrayVec<f64, 4>,
}

impl RealRoots {
    fn from_unsorted(mut roots: ArrayVec<f64, 4>) -> Self {
        roots.retain(|r| r.is_finite());
        roots.sort_unstable_by(f64::total_cmp);
        RealRoots { roots }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().copied()
    }
}

/// Which quartic method to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarticMethod {
    /// Ferrari–Lagrange when `|c3/c4| > 10`, classical Ferrari otherwise.
    #[default]
    Adaptive,
    FerrariLagrange,
    Classical,
}

/// The code path that produced a set of roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    FerrariLagrange,
    Classical,
    /// Leading coefficient negligible; solved as a lower-degree polynomial.
    Reduced,
}

/// Discriminants within this fraction of their terms' magnitude count as
/// zero, so a rounded double root still takes the trigonometric branch.
const CUBIC_TIE_REL_TOL: f64 = 1e-12;

/// Square-root arguments of the factorization that are negative by less
/// than this fraction of their terms' magnitude are taken as zero, so
/// tangent (double) roots survive rounding.
const SQRT_TIE_REL_TOL: f64 = 1e-10;

/// `v`, or 0 when it is negative only within the tie band around `scale`.
fn snap_negative(v: f64, scale: f64) -> f64 {
    if v < 0.0 && -v <= SQRT_TIE_REL_TOL * scale {
        0.0
    } else {
        v
    }
}

/// `t³ + p t + q` with `y = t + shift`.
struct Depressed {
    shift: f64,
    p: f64,
    q: f64,
    /// `(q/2)² + (p/3)³`, snapped to zero inside the tie band.
    disc: f64,
}

impl Depressed {
    fn new(a3: f64, a2: f64, a1: f64, a0: f64) -> Self {
        let (a, b, c) = (a2 / a3, a1 / a3, a0 / a3);
        let p = b - a * a / 3.0;
        let q = (2.0 * a * a * a - 9.0 * a * b) / 27.0 + c;
        let half_q2 = 0.25 * q * q;
        let third_p3 = p * p * p / 27.0;
        let mut disc = half_q2 + third_p3;
        if disc.abs() <= CUBIC_TIE_REL_TOL * (half_q2 + third_p3.abs()) {
            disc = 0.0;
        }
        Depressed {
            shift: -a / 3.0,
            p,
            q,
            disc,
        }
    }
}

/// One real root of `a3 y³ + a2 y² + a1 y + a0`. With three real roots the
/// largest is returned, which is the one both solvents need.
pub fn solve_cubic_one_real(a3: f64, a2: f64, a1: f64, a0: f64) -> f64 {
    let Depressed { shift, p, q, disc } = Depressed::new(a3, a2, a1, a0);
    let t = if disc > 0.0 {
        let u = (-0.5 * q - disc.sqrt().copysign(q)).cbrt();
        u - p / (3.0 * u)
    } else if p == 0.0 {
        0.0
    } else {
        let r = (-p / 3.0).sqrt();
        let cos3 = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        2.0 * r * (cos3.acos() / 3.0).cos()
    };
    t + shift
}

/// All real roots of a cubic with non-zero leading coefficient.
pub fn solve_cubic_real_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> ArrayVec<f64, 3> {
    let Depressed { shift, p, q, disc } = Depressed::new(a3, a2, a1, a0);
    let mut out = ArrayVec::new();
    if disc > 0.0 {
        let u = (-0.5 * q - disc.sqrt().copysign(q)).cbrt();
        out.push(u - p / (3.0 * u) + shift);
    } else if p == 0.0 {
        out.push(shift);
    } else {
        let r = (-p / 3.0).sqrt();
        let theta = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        for k in 0..3 {
            let phi = (theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0;
            out.push(2.0 * r * phi.cos() + shift);
        }
        // A large shift leaves the smaller roots with only absolute accuracy.
        // Dividing out the largest root from the constant end keeps them
        // relatively accurate; each slot keeps whichever value fits better.
        out.sort_unstable_by(|x, y| y.abs().total_cmp(&x.abs()));
        let big = out[0];
        if big != 0.0 {
            let gamma = -a0 / (a3 * big);
            let beta = (gamma - a1 / a3) / big;
            let qdisc = beta * beta - 4.0 * gamma;
            if qdisc.abs() <= CUBIC_TIE_REL_TOL * (beta * beta + 4.0 * gamma.abs()) {
                out[1] = -0.5 * beta;
                out[2] = -0.5 * beta;
            } else if qdisc < 0.0 {
                // The remaining pair is complex; only the tie band made the
                // depressed cubic look like it had three real roots.
                out.truncate(1);
            } else {
                let mut pair = ArrayVec::<f64, 4>::new();
                monic_quadratic_roots(beta, gamma, &mut pair);
                let p = |y: f64| (((a3 * y + a2) * y + a1) * y + a0).abs();
                let (lo, hi) = if out[1] <= out[2] { (1, 2) } else { (2, 1) };
                let (d_lo, d_hi) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                for (slot, cand) in [(lo, d_lo), (hi, d_hi)] {
                    if cand.is_finite() && p(cand) < p(out[slot]) {
                        out[slot] = cand;
                    }
                }
            }
        }
    }
    out
}

/// Pushes the real roots of `x² + b x + c` into `out`; nothing if the
/// discriminant is negative.
fn monic_quadratic_roots(b: f64, c: f64, out: &mut ArrayVec<f64, 4>) {
    let disc = snap_negative(b * b - 4.0 * c, b * b + 4.0 * c.abs());
    if disc < 0.0 {
        return;
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    if q == 0.0 {
        // b == 0 and c == 0
        out.push(0.0);
        out.push(0.0);
    } else {
        out.push(q);
        out.push(c / q);
    }
}

/// Roots of `(x² + lin·x + cst)² − (P x + Q)²` given `P²`, `Q²` and `2PQ`,
/// each square paired with the magnitude of the terms it was summed from.
fn split_difference_of_squares(
    lin: f64,
    cst: f64,
    (p2, p2_scale): (f64, f64),
    (q2, q2_scale): (f64, f64),
    two_pq: f64,
    out: &mut ArrayVec<f64, 4>,
) {
    let p2 = snap_negative(p2, p2_scale);
    let q2 = snap_negative(q2, q2_scale);
    if p2 < 0.0 {
        return;
    }
    let p = p2.sqrt();
    // Q comes from 2PQ unless P is the smaller of the two (compared as
    // P⁴ against Q²), in which case it gets its own square root.
    let q = if p > 0.0 && p2 * p2 >= q2.abs() {
        two_pq / (2.0 * p)
    } else if q2 >= 0.0 {
        q2.sqrt().copysign(two_pq)
    } else {
        return;
    };
    monic_quadratic_roots(lin - p, cst - q, out);
    monic_quadratic_roots(lin + p, cst + q, out);
}

/// Ferrari–Lagrange: works on the monic quartic directly.
pub fn solve_quartic_ferrari_lagrange(c: &QuarticCoeffs) -> Result<RealRoots> {
    if c.leading_is_negligible() {
        return Err(Error::DegenerateLeading);
    }
    let a = c.c3 / c.c4;
    let b = c.c2 / c.c4;
    let cc = c.c1 / c.c4;
    let d = c.c0 / c.c4;
    let y = solve_cubic_one_real(1.0, -b, a * cc - 4.0 * d, 4.0 * b * d - a * a * d - cc * cc);
    let mut out = ArrayVec::new();
    let quarter_a2 = 0.25 * a * a;
    let quarter_y2 = 0.25 * y * y;
    split_difference_of_squares(
        0.5 * a,
        0.5 * y,
        (quarter_a2 - b + y, quarter_a2 + b.abs() + y.abs()),
        (quarter_y2 - d, quarter_y2 + d.abs()),
        0.5 * a * y - cc,
        &mut out,
    );
    Ok(RealRoots::from_unsorted(out))
}

/// Classical Ferrari: removes the cubic term first, then factors the
/// depressed quartic `u⁴ + α u² + β u + γ`.
pub fn solve_quartic_classical(c: &QuarticCoeffs) -> Result<RealRoots> {
    if c.leading_is_negligible() {
        return Err(Error::DegenerateLeading);
    }
    let a3 = c.c3 / c.c4;
    let a2 = c.c2 / c.c4;
    let a1 = c.c1 / c.c4;
    let a0 = c.c0 / c.c4;
    let shift = 0.25 * a3;
    let sq = a3 * a3;
    let alpha = a2 - 0.375 * sq;
    let beta = a1 - 0.5 * a3 * a2 + 0.125 * sq * a3;
    let gamma = a0 - 0.25 * a3 * a1 + sq * a2 / 16.0 - 3.0 * sq * sq / 256.0;
    let y = solve_cubic_one_real(
        8.0,
        20.0 * alpha,
        16.0 * alpha * alpha - 8.0 * gamma,
        4.0 * alpha * alpha * alpha - 4.0 * alpha * gamma - beta * beta,
    );
    let k = alpha + y;
    let mut out = ArrayVec::new();
    split_difference_of_squares(
        0.0,
        k,
        (alpha + 2.0 * y, alpha.abs() + 2.0 * y.abs()),
        (k * k - gamma, k * k + gamma.abs()),
        -beta,
        &mut out,
    );
    for r in out.iter_mut() {
        *r -= shift;
    }
    Ok(RealRoots::from_unsorted(out))
}

/// Real roots of the polynomial with the given coefficients (highest degree
/// first, at most cubic), dropping negligible leading terms.
fn solve_low_degree(coeffs: &[f64]) -> RealRoots {
    let scale = coeffs.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
    let start = coeffs
        .iter()
        .position(|c| c.abs() >= LEADING_REL_TOL * scale && *c != 0.0)
        .unwrap_or(coeffs.len());
    let c = &coeffs[start..];
    let mut out = ArrayVec::new();
    match c.len() {
        4 => out.extend(solve_cubic_real_roots(c[0], c[1], c[2], c[3])),
        3 => monic_quadratic_roots(c[1] / c[0], c[2] / c[0], &mut out),
        2 => out.push(-c[1] / c[0]),
        _ => {}
    }
    RealRoots::from_unsorted(out)
}

/// Solves with the requested method. Forced methods fall back to the
/// reduced-degree path when the leading coefficient vanishes.
pub fn solve_quartic_traced(
    c: &QuarticCoeffs,
    method: QuarticMethod,
) -> Result<(RealRoots, Branch)> {
    if !c.is_finite() {
        return Err(Error::NonFinite("quartic coefficient"));
    }
    if c.max_abs() <= ZERO_POLY_TOL {
        return Err(Error::NoPolynomial);
    }
    if c.leading_is_negligible() {
        return Ok((solve_low_degree(&c.to_array()[1..]), Branch::Reduced));
    }
    let use_lagrange = match method {
        QuarticMethod::Adaptive => (c.c3 / c.c4).abs() > DISPATCH_RATIO,
        QuarticMethod::FerrariLagrange => true,
        QuarticMethod::Classical => false,
    };
    if use_lagrange {
        Ok((solve_quartic_ferrari_lagrange(c)?, Branch::FerrariLagrange))
    } else {
        Ok((solve_quartic_classical(c)?, Branch::Classical))
    }
}

pub fn solve_quartic(c: &QuarticCoeffs, method: QuarticMethod) -> Result<RealRoots> {
    solve_quartic_traced(c, method).map(|(r, _)| r)
}

/// Ferrari–Lagrange when `|c3/c4| > 10`, classical Ferrari otherwise, and a
/// direct lower-degree solve when `c4` is negligible.
pub fn solve_quartic_adaptive(c: &QuarticCoeffs) -> Result<RealRoots> {
    solve_quartic(c, QuarticMethod::Adaptive)
}
