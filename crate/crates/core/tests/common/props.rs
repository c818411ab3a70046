//! Checks for the solver's structural invariants on one generated problem.
//! Each returns the worst observed deviation so callers can both assert and
//! report it.

use p3p_core::bench::{generate_problem, TrialSpec};
use p3p_core::geometry::{Mat3, P3pProblem, Pose, Vec3};
use p3p_core::p3p::{compute_pairwise, cosine_residuals, solve, DepthTriple, SolverConfig};
use p3p_core::Solution;

pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn solutions(problem: &P3pProblem) -> Vec<Solution> {
    solve(problem, &SolverConfig::default())
        .unwrap()
        .into_iter()
        .collect()
}

/// Largest law-of-cosines residual over all solutions, relative to max s.
pub fn cosine_residual(spec: &TrialSpec, idx: u64) -> f64 {
    let (problem, _) = generate_problem(spec, idx);
    let data = compute_pairwise(&problem).unwrap();
    solutions(&problem)
        .iter()
        .map(|s| {
            let d = DepthTriple::new(s.depths[0], s.depths[1], s.depths[2]);
            assert!(s.depths.iter().all(|&v| v > 0.0), "non-positive depth");
            cosine_residuals(&d, &data)
                .iter()
                .fold(0.0f64, |m, f| m.max(f.abs()))
                / data.max_s()
        })
        .fold(0.0, f64::max)
}

/// Worst distance from each pose in `a` to its nearest pose in `b` and back,
/// after mapping `b` through `map`. Infinite if the counts differ.
fn set_distance(a: &[Pose], b: &[Pose]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let one_way = |x: &[Pose], y: &[Pose]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| p.l1_distance(q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn poses(s: &[Solution]) -> Vec<Pose> {
    s.iter().map(|s| s.pose).collect()
}

/// Pose-set distance between every input ordering and the original.
pub fn permutation_deviation(spec: &TrialSpec, idx: u64) -> f64 {
    let (problem, _) = generate_problem(spec, idx);
    let base = poses(&solutions(&problem));
    PERMUTATIONS
        .iter()
        .map(|&p| set_distance(&base, &poses(&solutions(&problem.permuted(p)))))
        .fold(0.0, f64::max)
}

/// Scaling the world by `lambda`: rotations unchanged, translations scaled.
/// Returns the worst of the rotation L1 error and the relative translation
/// error.
pub fn similarity_deviation(spec: &TrialSpec, idx: u64, lambda: f64) -> f64 {
    let (problem, _) = generate_problem(spec, idx);
    let scaled = P3pProblem::from_arrays(
        std::array::from_fn(|i| problem.bearing(i)),
        std::array::from_fn(|i| problem.point(i) * lambda),
    )
    .unwrap();
    let base = poses(&solutions(&problem));
    let mapped: Vec<Pose> = poses(&solutions(&scaled))
        .into_iter()
        .map(|p| Pose::new(p.rotation, p.translation * (1.0 / lambda)))
        .collect();
    let scale = base
        .iter()
        .map(|p| p.translation.l1_norm())
        .fold(1.0, f64::max);
    set_distance(&base, &mapped) / scale
}

/// Rotating the world by `q`: each R becomes R·qᵀ, t unchanged.
pub fn rigid_deviation(spec: &TrialSpec, idx: u64, q: &Mat3) -> f64 {
    let (problem, _) = generate_problem(spec, idx);
    let rotated = P3pProblem::from_arrays(
        std::array::from_fn(|i| problem.bearing(i)),
        std::array::from_fn(|i| q.mul_vec(&problem.point(i))),
    )
    .unwrap();
    let expected: Vec<Pose> = poses(&solutions(&problem))
        .into_iter()
        .map(|p| Pose::new(p.rotation.mul_mat(&q.transpose()), p.translation))
        .collect();
    set_distance(&expected, &poses(&solutions(&rotated)))
}

/// ‖(R X_i + t)/d_i − m_i‖ for the generated ground truth.
pub fn construction_identity(spec: &TrialSpec, idx: u64) -> f64 {
    let (problem, gt) = generate_problem(spec, idx);
    (0..3)
        .map(|i| {
            let p: Vec3 = gt.rotation.mul_vec(&problem.point(i)) + gt.translation;
            (p * (1.0 / gt.depths[i]) - problem.bearing(i)).norm()
        })
        .fold(0.0, f64::max)
}
