//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use nalgebra::{Complex, DMatrix};
use p3p_core::geometry::{Mat3, Vec3};

/// All eigenvalues of the companion matrix of `coeffs` (highest degree
/// first, leading coefficient non-zero).
pub fn companion_eigenvalues(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    // Unshifted QR can cycle forever on permutation-like companions such as
    // x⁴ + 1; a real shift breaks the symmetry and is undone afterwards.
    for shift in [0.0, 0.123_456_789, -0.987_654_321] {
        let shifted = &m + DMatrix::<f64>::identity(n, n) * shift;
        if let Some(schur) = shifted.try_schur(f64::EPSILON, 10_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z - Complex::new(shift, 0.0))
                .collect();
        }
    }
    panic!("eigenvalue iteration did not converge for {coeffs:?}");
}

/// Real eigenvalues of the companion matrix, keeping those whose imaginary
/// part is below `1e-10 ·` spectral radius. Sorted ascending.
pub fn oracle_real_roots(coeffs: &[f64]) -> Vec<f64> {
    let eig = companion_eigenvalues(coeffs);
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut real: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-10 * radius)
        .map(|z| z.re)
        .collect();
    real.sort_by(f64::total_cmp);
    real
}

/// Smallest pairwise distance between eigenvalues.
pub fn min_separation(eig: &[Complex<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..eig.len() {
        for j in i + 1..eig.len() {
            best = best.min((eig[i] - eig[j]).norm());
        }
    }
    best
}

/// Neumaier-compensated sum.
pub fn compensated_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// Exact product split `a·b = p + e` (Dekker/FMA).
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// ‖a − b‖² evaluated with error-free differences and products.
pub fn squared_distance_precise(a: Vec3, b: Vec3) -> f64 {
    let mut terms = Vec::with_capacity(12);
    for (x, y) in [(a.x, b.x), (a.y, b.y), (a.z, b.z)] {
        // two-sum of x − y
        let d = x - y;
        let bb = d - x;
        let err = (x - (d - bb)) + (-y - bb);
        let (p, e) = two_product(d, d);
        let (p2, e2) = two_product(2.0 * d, err);
        terms.extend_from_slice(&[p, e, p2, e2, err * err]);
    }
    compensated_sum(&terms)
}

/// Straightforward L1 pose distance written out entry by entry.
pub fn l1_pose_distance(r1: &Mat3, t1: &Vec3, r2: &Mat3, t2: &Vec3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += (r1.rows[i][j] - r2.rows[i][j]).abs();
        }
    }
    s + (t1.x - t2.x).abs() + (t1.y - t2.y).abs() + (t1.z - t2.z).abs()
}

/// Rotation about a unit axis (Rodrigues).
pub fn axis_angle(axis: Vec3, angle: f64) -> Mat3 {
    let k = axis * (1.0 / axis.norm());
    let (s, c) = angle.sin_cos();
    let v = 1.0 - c;
    Mat3::from_rows([
        [
            c + k.x * k.x * v,
            k.x * k.y * v - k.z * s,
            k.x * k.z * v + k.y * s,
        ],
        [
            k.y * k.x * v + k.z * s,
            c + k.y * k.y * v,
            k.y * k.z * v - k.x * s,
        ],
        [
            k.z * k.x * v - k.y * s,
            k.z * k.y * v + k.x * s,
            c + k.z * k.z * v,
        ],
    ])
}

/// Outcome of comparing the adaptive solver with the eigenvalue oracle on
/// random quartics with coefficients uniform in (−1, 1).
#[derive(Debug, Default)]
pub struct QuarticSweep {
    pub total: usize,
    pub well_separated: usize,
    pub count_mismatches: usize,
    pub worst_root_error: f64,
    pub false_roots: usize,
    pub worst_residual: f64,
}

pub fn quartic_oracle_sweep(n: usize, seed: u64) -> QuarticSweep {
    use p3p_core::quartic::{solve_quartic_adaptive, QuarticCoeffs};
    use rand::{RngExt, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = QuarticSweep::default();
    while out.total < n {
        let c: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if c[0] == 0.0 {
            continue;
        }
        out.total += 1;
        let q = QuarticCoeffs::new(c[0], c[1], c[2], c[3], c[4]);
        let roots = solve_quartic_adaptive(&q).expect("finite non-zero coefficients");
        for r in roots.iter() {
            let res = q.relative_residual(r);
            out.worst_residual = out.worst_residual.max(res);
            if res > 1e-6 {
                out.false_roots += 1;
            }
        }
        let eig = companion_eigenvalues(&c);
        if min_separation(&eig) <= 1e-3 {
            continue;
        }
        out.well_separated += 1;
        let oracle = oracle_real_roots(&c);
        if oracle.len() != roots.len() {
            out.count_mismatches += 1;
            continue;
        }
        for (a, b) in roots.iter().zip(&oracle) {
            out.worst_root_error = out.worst_root_error.max((a - b).abs());
        }
    }
    out
}
