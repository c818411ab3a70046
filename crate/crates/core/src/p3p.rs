//! The P3P solver: from three bearing/point pairs to at most four poses via
//! a single quartic in the depth ratio `x = d1 / d3`.
//!
//! Pipeline for one problem:
//!
//! 1. bearing cosines `m_ij` and squared point distances `s_ij`;
//! 2. optional relabeling so that `m13 ≤ m12 ≤ m23`;
//! 3. quartic coefficients in `x`, solved by [`crate::quartic`];
//! 4. for each positive root, `y = d2 / d3` as a rational function of `x`;
//! 5. `d3` from one of the three law-of-cosines identities, then `d1`, `d2`;
//! 6. a few Gauss–Newton steps on the law-of-cosines system;
//! 7. closed-form alignment of the camera-frame points with the world points.

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat3, P3pProblem, Pose, Solution, Vec3};
use crate::quartic::{solve_quartic, QuarticCoeffs, QuarticMethod};

/// Up to four candidate solutions.
pub type Solutions = ArrayVec<Solution, 4>;

pub const MAX_GN_ITERATIONS: u32 = 16;

/// Cosines and squared distances of one problem, in a possibly relabeled
/// index order. `perm[k]` is the caller's index of the correspondence that
/// sits at position `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseData {
    pub m12: f64,
    pub m13: f64,
    pub m23: f64,
    pub s12: f64,
    pub s13: f64,
    pub s23: f64,
    pub perm: [usize; 3],
}

impl PairwiseData {
    fn m(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.m12,
            (0, 2) => self.m13,
            _ => self.m23,
        }
    }

    fn s(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.s12,
            (0, 2) => self.s13,
            _ => self.s23,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.m13 <= self.m12 && self.m12 <= self.m23
    }

    pub fn max_s(&self) -> f64 {
        self.s12.max(self.s13).max(self.s23)
    }
}

/// Depths of the three points along their bearings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthTriple {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl DepthTriple {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Self {
        DepthTriple { d1, d2, d3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    fn is_positive(&self) -> bool {
        self.d1 > 0.0 && self.d2 > 0.0 && self.d3 > 0.0
    }
}

/// Which law-of-cosines identity supplies `d3²` once `x` and `y` are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthSource {
    /// `d3² = s12 / (x² − 2xy·m12 + y²)`
    Distance12,
    /// `d3² = s13 / (x² − 2x·m13 + 1)`
    Distance13,
    /// `d3² = s23 / (y² − 2y·m23 + 1)`
    #[default]
    Distance23,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gn_iterations: u32,
    pub denom_epsilon: f64,
    pub force_variant: QuarticMethod,
    pub reindex_enabled: bool,
    pub d3_source: DepthSource,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gn_iterations: 2,
            denom_epsilon: 1e-14,
            force_variant: QuarticMethod::Adaptive,
            reindex_enabled: true,
            d3_source: DepthSource::Distance23,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gn_iterations > MAX_GN_ITERATIONS {
            return Err(Error::InvalidConfig(format!(
                "gn_iterations {} exceeds {MAX_GN_ITERATIONS}",
                self.gn_iterations
            )));
        }
        if !(self.denom_epsilon > 0.0 && self.denom_epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "denom_epsilon must be positive and finite, got {}",
                self.denom_epsilon
            )));
        }
        Ok(())
    }
}

/// Why a quartic root did not turn into a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// `|m12·x − m23|` too small to divide by.
    VanishingDenominator,
    /// The recovered ratio or depth is not strictly positive.
    NonPositive,
}

pub fn compute_pairwise(problem: &P3pProblem) -> Result<PairwiseData> {
    let (m1, m2, m3) = (problem.bearing(0), problem.bearing(1), problem.bearing(2));
    let (x1, x2, x3) = (problem.point(0), problem.point(1), problem.point(2));
    let data = PairwiseData {
        m12: m1.dot(&m2),
        m13: m1.dot(&m3),
        m23: m2.dot(&m3),
        s12: (x1 - x2).norm_squared(),
        s13: (x1 - x3).norm_squared(),
        s23: (x2 - x3).norm_squared(),
        perm: [0, 1, 2],
    };
    for s in [data.s12, data.s13, data.s23] {
        if !(s >= 1e-24) {
            return Err(Error::DegenerateInput(format!(
                "squared point distance {s:e} is below 1e-24"
            )));
        }
    }
    for m in [data.m12, data.m13, data.m23] {
        if !(m.abs() <= 1.0 + 1e-12) {
            return Err(Error::DegenerateInput(format!(
                "bearing cosine {m} is outside [-1, 1]"
            )));
        }
    }
    Ok(data)
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Relabels the correspondences so that `m13 ≤ m12 ≤ m23`, choosing the
/// lexicographically smallest permutation when several qualify.
pub fn canonical_reindex(data: &PairwiseData, problem: &P3pProblem) -> (PairwiseData, P3pProblem) {
    let p = PERMUTATIONS
        .iter()
        .find(|p| {
            let m12 = data.m(p[0], p[1]);
            data.m(p[0], p[2]) <= m12 && m12 <= data.m(p[1], p[2])
        })
        .copied()
        .unwrap_or([0, 1, 2]);
    if p == [0, 1, 2] {
        return (*data, *problem);
    }
    let relabeled = PairwiseData {
        m12: data.m(p[0], p[1]),
        m13: data.m(p[0], p[2]),
        m23: data.m(p[1], p[2]),
        s12: data.s(p[0], p[1]),
        s13: data.s(p[0], p[2]),
        s23: data.s(p[1], p[2]),
        perm: [data.perm[p[0]], data.perm[p[1]], data.perm[p[2]]],
    };
    (relabeled, problem.permuted(p))
}

/// Coefficients of the quartic in `x`, with the common `s13 / s23` factor
/// already removed.
pub fn quartic_coefficients(d: &PairwiseData) -> QuarticCoeffs {
    let (m12, m13, m23) = (d.m12, d.m13, d.m23);
    let (s12, s13, s23) = (d.s12, d.s13, d.s23);

    let s12_2 = s12 * s12;
    let s13_2 = s13 * s13;
    let s23_2 = s23 * s23;
    let s12s13 = s12 * s13;
    let s12s23 = s12 * s23;
    let s13s23 = s13 * s23;

    let m12_2 = m12 * m12;
    let m13_2 = m13 * m13;
    let m23_2 = m23 * m23;
    let m12m23 = m12 * m23;
    let m12m13m23 = m12m23 * m13;

    let c4 =
        -s12_2 + 2.0 * s12s13 + 2.0 * s12s23 - s13_2 + 4.0 * s13s23 * m12_2 - 2.0 * s13s23 - s23_2;
    let c3 = 4.0 * s12_2 * m13 - 4.0 * s12s13 * m12m23 - 4.0 * s12s13 * m13 - 8.0 * s12s23 * m13
        + 4.0 * s13_2 * m12m23
        - 8.0 * s13s23 * m12_2 * m13
        - 4.0 * s13s23 * m12m23
        + 4.0 * s13s23 * m13
        + 4.0 * s23_2 * m13;
    let c2 = -4.0 * s12_2 * m13_2 - 2.0 * s12_2
        + 8.0 * s12s13 * m12m13m23
        + 4.0 * s12s13 * m23_2
        + 8.0 * s12s23 * m13_2
        + 4.0 * s12s23
        - 4.0 * s13_2 * m12_2
        - 4.0 * s13_2 * m23_2
        + 2.0 * s13_2
        + 4.0 * s13s23 * m12_2
        + 8.0 * s13s23 * m12m13m23
        - 4.0 * s23_2 * m13_2
        - 2.0 * s23_2;
    let c1 = 4.0 * s12_2 * m13 - 4.0 * s12s13 * m12m23 - 8.0 * s12s13 * m13 * m23_2
        + 4.0 * s12s13 * m13
        - 8.0 * s12s23 * m13
        + 4.0 * s13_2 * m12m23
        - 4.0 * s13s23 * m12m23
        - 4.0 * s13s23 * m13
        + 4.0 * s23_2 * m13;
    let c0 =
        -s12_2 + 4.0 * s12s13 * m23_2 - 2.0 * s12s13 + 2.0 * s12s23 - s13_2 + 2.0 * s13s23 - s23_2;
    QuarticCoeffs::new(c4, c3, c2, c1, c0)
}

/// `y = (A x² + B x + C) / (2 s13 (m12 x − m23))`.
pub fn recover_y(x: f64, d: &PairwiseData, denom_epsilon: f64) -> Result<f64, Rejection> {
    let den = d.m12 * x - d.m23;
    if den.abs() < denom_epsilon * x.abs().max(1.0) {
        return Err(Rejection::VanishingDenominator);
    }
    let a = -d.s12 + d.s23 + d.s13;
    let b = 2.0 * (d.s12 - d.s23) * d.m13;
    let c = -d.s12 + d.s23 - d.s13;
    let y = ((a * x + b) * x + c) / (2.0 * d.s13 * den);
    if y > 0.0 && y.is_finite() {
        Ok(y)
    } else {
        Err(Rejection::NonPositive)
    }
}

/// Candidates for `y` when [`recover_y`]'s denominator vanishes: positive
/// roots of the second conic (a proper quadratic in `y`, since `s13 > 0`)
/// that also satisfy the first conic to 1e-6 relative.
pub fn recover_y_fallback(x: f64, d: &PairwiseData) -> ArrayVec<f64, 2> {
    let b = d.s13 / d.s23;
    // -b y² + 2 b m23 y + (x² − 2 m13 x + 1 − b) = 0, made monic.
    let lin = -2.0 * d.m23;
    let cst = -(x * x - 2.0 * d.m13 * x + 1.0 - b) / b;
    let disc = lin * lin - 4.0 * cst;
    let mut out = ArrayVec::new();
    if disc < 0.0 {
        return out;
    }
    let q = -0.5 * (lin + disc.sqrt().copysign(lin));
    let candidates = if q == 0.0 { [0.0, 0.0] } else { [q, cst / q] };
    for (k, y) in candidates.into_iter().enumerate() {
        if !(y > 0.0 && y.is_finite()) || (k == 1 && y == candidates[0]) {
            continue;
        }
        if first_conic_holds(x, y, d) {
            out.push(y);
        }
    }
    out
}

/// `x² − 2 m12 x y + (1 − a) y² + 2 a m23 y − a = 0` with `a = s12 / s23`,
/// to 1e-6 relative to its largest terms.
fn first_conic_holds(x: f64, y: f64, d: &PairwiseData) -> bool {
    let a = d.s12 / d.s23;
    let terms = [
        x * x,
        -2.0 * d.m12 * x * y,
        (1.0 - a) * y * y,
        2.0 * a * d.m23 * y,
        -a,
    ];
    within_tolerance(&terms)
}

/// `x² − 2 m13 x + 1 − b (y² − 2 m23 y + 1) = 0` with `b = s13 / s23`.
fn second_conic_holds(x: f64, y: f64, d: &PairwiseData) -> bool {
    let b = d.s13 / d.s23;
    let terms = [
        x * x,
        -2.0 * d.m13 * x,
        1.0 - b,
        -b * y * y,
        2.0 * b * d.m23 * y,
    ];
    within_tolerance(&terms)
}

fn within_tolerance(terms: &[f64; 5]) -> bool {
    let residual: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    residual.abs() <= 1e-6 * scale
}

pub fn recover_depths(
    x: f64,
    y: f64,
    d: &PairwiseData,
    source: DepthSource,
) -> Result<DepthTriple, Rejection> {
    let (num, den) = match source {
        DepthSource::Distance12 => (d.s12, x * x - 2.0 * x * y * d.m12 + y * y),
        DepthSource::Distance13 => (d.s13, x * x - 2.0 * x * d.m13 + 1.0),
        DepthSource::Distance23 => (d.s23, y * y - 2.0 * y * d.m23 + 1.0),
    };
    if !(den > 0.0) {
        return Err(Rejection::NonPositive);
    }
    let d3 = (num / den).sqrt();
    let depths = DepthTriple::new(x * d3, y * d3, d3);
    if depths.is_positive() && d3.is_finite() && depths.d1.is_finite() && depths.d2.is_finite() {
        Ok(depths)
    } else {
        Err(Rejection::NonPositive)
    }
}

/// Residuals of the three law-of-cosines equations at `d`.
pub fn cosine_residuals(d: &DepthTriple, p: &PairwiseData) -> [f64; 3] {
    let (d1, d2, d3) = (d.d1, d.d2, d.d3);
    [
        d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * p.m12 - p.s12,
        d1 * d1 + d3 * d3 - 2.0 * d1 * d3 * p.m13 - p.s13,
        d2 * d2 + d3 * d3 - 2.0 * d2 * d3 * p.m23 - p.s23,
    ]
}

fn inf_norm(f: &[f64; 3]) -> f64 {
    f[0].abs().max(f[1].abs()).max(f[2].abs())
}

/// Newton iterations on the square law-of-cosines system. A step that would
/// make a depth non-positive or increase the residual is not taken and ends
/// the iteration.
pub fn refine_depths_gauss_newton(d: DepthTriple, p: &PairwiseData, iters: u32) -> DepthTriple {
    let mut d = d;
    let mut f = cosine_residuals(&d, p);
    let mut f_norm = inf_norm(&f);
    let tol = 1e-15 * p.max_s();
    for _ in 0..iters {
        if f_norm < tol {
            break;
        }
        let (d1, d2, d3) = (d.d1, d.d2, d.d3);
        let jac = Mat3::from_rows([
            [
                2.0 * d1 - 2.0 * d2 * p.m12,
                2.0 * d2 - 2.0 * d1 * p.m12,
                0.0,
            ],
            [
                2.0 * d1 - 2.0 * d3 * p.m13,
                0.0,
                2.0 * d3 - 2.0 * d1 * p.m13,
            ],
            [
                0.0,
                2.0 * d2 - 2.0 * d3 * p.m23,
                2.0 * d3 - 2.0 * d2 * p.m23,
            ],
        ]);
        let Some(step) = jac.solve(&Vec3::new(-f[0], -f[1], -f[2]), 1e-300) else {
            break;
        };
        let next = DepthTriple::new(d1 + step.x, d2 + step.y, d3 + step.z);
        if !next.is_positive() {
            break;
        }
        let f_next = cosine_residuals(&next, p);
        let next_norm = inf_norm(&f_next);
        if !(next_norm <= f_norm) {
            break;
        }
        d = next;
        f = f_next;
        f_norm = next_norm;
    }
    d
}

/// World-side frame `[X1−X2, X1−X3, (X1−X2)×(X1−X3)]` and its inverse,
/// shared by every candidate of one problem.
#[derive(Debug, Clone, Copy)]
pub struct PointFrame {
    inverse: Mat3,
}

impl PointFrame {
    /// Fails with [`Error::CollinearPoints`] when the sine of the angle at
    /// `X1` is below 1e-9.
    pub fn new(problem: &P3pProblem) -> Result<Self> {
        let u = problem.point(0) - problem.point(1);
        let v = problem.point(0) - problem.point(2);
        let frame = Mat3::from_cols(u, v, u.cross(&v));
        let det = frame.determinant();
        let scale = u.norm_squared() * v.norm_squared();
        if !(det.abs() >= 1e-18 * scale) || scale == 0.0 {
            return Err(Error::CollinearPoints);
        }
        let inverse = frame.inverse().ok_or(Error::CollinearPoints)?;
        Ok(PointFrame { inverse })
    }

    /// Rotation and translation carrying the world points onto
    /// `d_i · m_i`. The rotation is not re-orthonormalized.
    pub fn align(&self, d: &DepthTriple, problem: &P3pProblem) -> Pose {
        let p1 = d.d1 * problem.bearing(0);
        let y1 = p1 - d.d2 * problem.bearing(1);
        let y2 = p1 - d.d3 * problem.bearing(2);
        let rotation = Mat3::from_cols(y1, y2, y1.cross(&y2)).mul_mat(&self.inverse);
        let translation = p1 - rotation.mul_vec(&problem.point(0));
        Pose::new(rotation, translation)
    }
}

pub fn align_pose(d: &DepthTriple, problem: &P3pProblem) -> Result<Pose> {
    Ok(PointFrame::new(problem)?.align(d, problem))
}

/// All candidate poses for `problem`, with depths in the caller's
/// correspondence order. Candidates are neither deduplicated nor filtered
/// by reprojection; an empty list is a valid answer.
pub fn solve(problem: &P3pProblem, config: &SolverConfig) -> Result<Solutions> {
    config.validate()?;
    let raw = compute_pairwise(problem)?;
    let (data, canon) = if config.reindex_enabled {
        canonical_reindex(&raw, problem)
    } else {
        (raw, *problem)
    };
    let frame = PointFrame::new(&canon)?;
    let coeffs = quartic_coefficients(&data);
    let roots = match solve_quartic(&coeffs, config.force_variant) {
        Ok(r) => r,
        Err(Error::NoPolynomial) => {
            return Err(Error::DegenerateInput(
                "the depth-ratio polynomial vanishes identically".into(),
            ))
        }
        Err(e) => return Err(e),
    };

    let mut out = Solutions::new();
    let mut fallback_x: Option<f64> = None;
    for x in roots.iter().filter(|&x| x > 0.0) {
        let ys: ArrayVec<f64, 2> = match recover_y(x, &data, config.denom_epsilon) {
            Ok(y) if first_conic_holds(x, y, &data) && second_conic_holds(x, y, &data) => {
                std::iter::once(y).collect()
            }
            Err(Rejection::NonPositive) => continue,
            quotient => {
                // a repeated root, even one split by rounding, would only
                // reproduce the same pair of poses
                if fallback_x.is_some_and(|f| (f - x).abs() <= 1e-7 * x.max(1.0)) {
                    continue;
                }
                fallback_x = Some(x);
                let candidates = recover_y_fallback(x, &data);
                // An imprecise quotient still picks the branch; one made of
                // two rounding-level terms matches neither candidate.
                let nearest = quotient.ok().and_then(|q| {
                    candidates
                        .iter()
                        .copied()
                        .filter(|y| (y - q).abs() <= 1e-3 * y)
                        .min_by(|a, b| (a - q).abs().total_cmp(&(b - q).abs()))
                });
                match nearest {
                    Some(y) => std::iter::once(y).collect(),
                    None => candidates,
                }
            }
        };
        for y in ys {
            let Ok(depths) = recover_depths(x, y, &data, config.d3_source) else {
                continue;
            };
            let depths = refine_depths_gauss_newton(depths, &data, config.gn_iterations);
            let pose = frame.align(&depths, &canon);
            let mut ordered = [0.0; 3];
            for (k, d) in depths.to_array().into_iter().enumerate() {
                ordered[data.perm[k]] = d;
            }
            if out
                .try_push(Solution {
                    pose,
                    depths: ordered,
                })
                .is_err()
            {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_problem() -> P3pProblem {
        let e = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        P3pProblem::from_arrays(e, e).unwrap()
    }

    /// Three bearings 60° apart around the optical axis and points at unit
    /// depth along them.
    fn equilateral_problem() -> P3pProblem {
        // unit vectors with pairwise dot 0.5: cone half-angle with cos² = 2/3
        let c = (2.0f64 / 3.0).sqrt();
        let s = (1.0f64 / 3.0).sqrt();
        let b: [Vec3; 3] = std::array::from_fn(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            Vec3::new(s * a.cos(), s * a.sin(), c)
        });
        P3pProblem::from_arrays(b, b).unwrap()
    }

    fn pairwise(m: [f64; 3], s: [f64; 3]) -> PairwiseData {
        PairwiseData {
            m12: m[0],
            m13: m[1],
            m23: m[2],
            s12: s[0],
            s13: s[1],
            s23: s[2],
            perm: [0, 1, 2],
        }
    }

    #[test]
    fn pairwise_axis_frame() {
        let d = compute_pairwise(&axis_problem()).unwrap();
        assert_eq!((d.m12, d.m13, d.m23), (0.0, 0.0, 0.0));
        assert_eq!((d.s12, d.s13, d.s23), (2.0, 2.0, 2.0));
        assert_eq!(d.perm, [0, 1, 2]);
    }

    #[test]
    fn pairwise_equilateral() {
        let d = compute_pairwise(&equilateral_problem()).unwrap();
        for m in [d.m12, d.m13, d.m23] {
            assert!((m - 0.5).abs() < 1e-15, "{m}");
        }
        for s in [d.s12, d.s13, d.s23] {
            assert!((s - 1.0).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn pairwise_rejects_tiny_distance() {
        let b = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
        ];
        let p = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(5e-13, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
        ];
        // the problem invariant already implies s_ij > 1e-24
        assert!(matches!(
            P3pProblem::from_arrays(b, p),
            Err(Error::CoincidentPoints(1, 2))
        ));
    }

    #[test]
    fn reindex_noop_and_ties() {
        let prob = axis_problem();
        let d = pairwise([0.5, 0.2, 0.7], [1.0, 2.0, 3.0]);
        let (r, _) = canonical_reindex(&d, &prob);
        assert_eq!(r, d);
        let d = pairwise([0.5, 0.5, 0.5], [1.0, 2.0, 3.0]);
        assert_eq!(canonical_reindex(&d, &prob).0.perm, [0, 1, 2]);
    }

    #[test]
    fn reindex_relabels_consistently() {
        let prob = axis_problem();
        let d = pairwise([0.9, 0.95, 0.1], [1.0, 2.0, 3.0]);
        let (r, p) = canonical_reindex(&d, &prob);
        assert_eq!((r.m13, r.m12, r.m23), (0.1, 0.9, 0.95));
        assert!(r.is_canonical());
        // every relabeled scalar must come from the same index pair
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(r.m(i, j), d.m(r.perm[i], r.perm[j]));
            assert_eq!(r.s(i, j), d.s(r.perm[i], r.perm[j]));
        }
        assert_eq!(p.bearing(0), prob.bearing(r.perm[0]));
    }

    #[test]
    fn equilateral_quartic_has_unit_root() {
        let d = pairwise([0.5, 0.5, 0.5], [1.0, 1.0, 1.0]);
        let c = quartic_coefficients(&d);
        assert!(c.eval(1.0).abs() < 1e-14, "{c:?}");
        let d = pairwise([0.3, 0.3, 0.3], [4.0, 4.0, 4.0]);
        assert!(quartic_coefficients(&d).eval(1.0).abs() < 1e-13);
    }

    #[test]
    fn coefficients_scale_with_fourth_power() {
        let d = pairwise([0.31, 0.12, 0.77], [1.5, 2.25, 0.75]);
        let c = quartic_coefficients(&d);
        let scaled = quartic_coefficients(&pairwise([0.31, 0.12, 0.77], [150.0, 225.0, 75.0]));
        for (a, b) in c.to_array().iter().zip(scaled.to_array()) {
            assert!((a * 1e4 - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn recover_y_equilateral_is_vanishing_then_fallback() {
        let d = pairwise([0.75, 0.75, 0.75], [1.0, 1.0, 1.0]);
        assert_eq!(
            recover_y(1.0, &d, 1e-14),
            Err(Rejection::VanishingDenominator)
        );
        // y = 1 and y = 2m − 1 = 0.5 both satisfy the two conics
        let ys = recover_y_fallback(1.0, &d);
        let mut ys = ys.to_vec();
        ys.sort_by(f64::total_cmp);
        assert_eq!(ys.len(), 2);
        assert!(
            (ys[0] - 0.5).abs() < 1e-14 && (ys[1] - 1.0).abs() < 1e-14,
            "{ys:?}"
        );
    }

    #[test]
    fn recover_y_positivity_filter() {
        // A x² + B x + C = -1 at x = 0 with positive denominator at m12 = 0.5, m23 = -0.5
        let d = pairwise([0.5, 0.0, -0.5], [1.0, 1.0, 1.0]);
        assert_eq!(recover_y(1e-9, &d, 1e-14), Err(Rejection::NonPositive));
    }

    #[test]
    fn depths_axis_frame() {
        let d = pairwise([0.0, 0.0, 0.0], [2.0, 2.0, 2.0]);
        for src in [
            DepthSource::Distance12,
            DepthSource::Distance13,
            DepthSource::Distance23,
        ] {
            let t = recover_depths(1.0, 1.0, &d, src).unwrap();
            assert_eq!(t, DepthTriple::new(1.0, 1.0, 1.0));
        }
        let bad = pairwise([0.0, 0.0, 1.0], [2.0, 2.0, 2.0]);
        assert_eq!(
            recover_depths(1.0, 1.0, &bad, DepthSource::Distance23),
            Err(Rejection::NonPositive)
        );
    }

    #[test]
    fn gauss_newton_noop_cases() {
        let d = pairwise([0.0, 0.0, 0.0], [2.0, 2.0, 2.0]);
        let exact = DepthTriple::new(1.0, 1.0, 1.0);
        assert_eq!(refine_depths_gauss_newton(exact, &d, 5), exact);
        let off = DepthTriple::new(1.1, 0.9, 1.05);
        assert_eq!(refine_depths_gauss_newton(off, &d, 0), off);
        let r = refine_depths_gauss_newton(off, &d, 8);
        assert!(inf_norm(&cosine_residuals(&r, &d)) < 1e-14);
    }

    #[test]
    fn align_identity() {
        let prob = axis_problem();
        let pose = align_pose(&DepthTriple::new(1.0, 1.0, 1.0), &prob).unwrap();
        assert!(pose.rotation.l1_distance(&Mat3::IDENTITY) < 1e-15);
        assert!(pose.translation.norm() < 1e-15);
    }

    #[test]
    fn align_rejects_collinear() {
        let b = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
        ];
        let p = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 2.0, 1.0),
        ];
        let prob = P3pProblem::from_arrays(b, p).unwrap();
        assert!(matches!(
            align_pose(&DepthTriple::new(1.0, 1.0, 1.0), &prob),
            Err(Error::CollinearPoints)
        ));
        assert!(matches!(
            solve(&prob, &SolverConfig::default()),
            Err(Error::CollinearPoints)
        ));
    }

    #[test]
    fn solve_axis_frame() {
        let sols = solve(&axis_problem(), &SolverConfig::default()).unwrap();
        let hit = sols
            .iter()
            .find(|s| s.pose.l1_distance(&Pose::IDENTITY) < 1e-9)
            .expect("identity pose among solutions");
        for d in hit.depths {
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_equilateral_does_not_fail() {
        // x = 1 is a double root here, so the denominator of y is only
        // approximately zero; whatever comes back must still be consistent.
        let prob = equilateral_problem();
        let d = compute_pairwise(&prob).unwrap();
        let sols = solve(&prob, &SolverConfig::default()).unwrap();
        for s in &sols {
            let t = DepthTriple::new(s.depths[0], s.depths[1], s.depths[2]);
            assert!(inf_norm(&cosine_residuals(&t, &d)) < 1e-8);
        }
    }

    #[test]
    fn tangent_root_with_vanishing_denominator_keeps_true_pose() {
        // The true depth ratio is a double root and the y quotient is 0/0
        // there up to rounding.
        let bearings = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.2, 0.0, 1.0),
            Vec3::new(0.0, 0.3, 1.0),
        ];
        let points = [
            Vec3::new(0.0, 0.0, 4.0),
            Vec3::new(1.0, 0.0, 5.0),
            Vec3::new(0.0, 1.5, 5.0),
        ];
        let prob = P3pProblem::from_arrays(bearings, points).unwrap();
        let sols = solve(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(sols.len(), 2);
        let truth = sols
            .iter()
            .find(|s| (s.depths[0] - 4.0).abs() < 1e-9)
            .expect("identity pose missing");
        assert!(
            truth.pose.rotation.l1_distance(&Mat3::from([
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0]
            ])) < 1e-12
        );
        assert!(truth.pose.translation.norm() < 1e-12);
    }

    #[test]
    fn solve_is_deterministic() {
        let prob = equilateral_problem();
        let a = solve(&prob, &SolverConfig::default()).unwrap();
        let b = solve(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.gn_iterations = 17;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        c.gn_iterations = 2;
        c.denom_epsilon = 0.0;
        assert!(matches!(
            solve(&axis_problem(), &c),
            Err(Error::InvalidConfig(_))
        ));
    }
}
