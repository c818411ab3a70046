//! Synthetic evaluation: problem generation, the pose error ξ, per-trial
//! solution classification, and the accuracy / ablation / timing drivers.
//!
//! Every trial draws from its own RNG stream keyed by `(seed, trial_index)`
//! and trials are folded into the report in index order, so a report depends
//! only on `(spec, trials, config)` and never on the worker count.

use std::hint::black_box;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{
    rotation_to_quaternion, BearingVector, Correspondence, Mat3, P3pProblem, Pose, Quaternion,
    Solution, Vec3,
};
use crate::p3p::{solve, DepthSource, SolverConfig};
use crate::quartic::QuarticMethod;

/// Two solutions closer than this (L1 over R and t) are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-5;
pub const DET_TOL: f64 = 1e-6;
pub const ORTHOGONALITY_TOL: f64 = 1e-6;
pub const QUATERNION_NORM_TOL: f64 = 1e-5;
/// Reprojection residual bound in normalized image coordinates.
pub const REPROJECTION_TOL: f64 = 1e-4;
/// A solution with ξ below this recovers the ground truth.
pub const GROUND_TRUTH_TOL: f64 = 1e-6;

/// Solves run before any timing measurement.
pub const TIMING_WARMUP_SOLVES: usize = 10_000;

const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub seed: u64,
    pub depth_min: f64,
    pub depth_max: f64,
    pub image_range: f64,
}

impl Default for TrialSpec {
    fn default() -> Self {
        TrialSpec {
            seed: 0,
            depth_min: 0.1,
            depth_max: 10.0,
            image_range: 1.0,
        }
    }
}

impl TrialSpec {
    pub fn with_seed(seed: u64) -> Self {
        TrialSpec {
            seed,
            ..TrialSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth_min > 0.0 && self.depth_min < self.depth_max && self.depth_max.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < depth_min < depth_max, got {} and {}",
                self.depth_min, self.depth_max
            )));
        }
        if !(self.image_range > 0.0 && self.image_range.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "image_range must be positive, got {}",
                self.image_range
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub rotation: Mat3,
    pub translation: Vec3,
    pub depths: [f64; 3],
}

impl GroundTruth {
    pub fn pose(&self) -> Pose {
        Pose::new(self.rotation, self.translation)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for one trial: ChaCha8 keyed by `splitmix64(seed ⊕ splitmix64(index))`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial_index)))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniformly distributed rotation from a normalized 4-D Gaussian.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    loop {
        let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
        if q.norm() >= 1e-6 {
            return q.normalized().to_rotation_matrix();
        }
    }
}

/// Uniformly distributed unit vector from a normalized 3-D Gaussian.
pub fn random_unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(normal(rng), normal(rng), normal(rng));
        let n = v.norm();
        if n >= 1e-6 {
            return v * (1.0 / n);
        }
    }
}

/// Image points uniform in `[-r, r]²`, depths uniform in
/// `[depth_min, depth_max]`, a uniform random rotation and a unit-length
/// translation; world points are the camera-frame points mapped back
/// through the inverse transform.
pub fn generate_problem(spec: &TrialSpec, trial_index: u64) -> (P3pProblem, GroundTruth) {
    let mut rng = trial_rng(spec.seed, trial_index);
    let r = spec.image_range;
    loop {
        let mut bearings = [Vec3::default(); 3];
        let mut depths = [0.0; 3];
        for (b, d) in bearings.iter_mut().zip(depths.iter_mut()) {
            let u: f64 = rng.random_range(-r..r);
            let v: f64 = rng.random_range(-r..r);
            *b = Vec3::new(u, v, 1.0);
            *d = rng.random_range(spec.depth_min..spec.depth_max);
        }
        let rotation = random_rotation(&mut rng);
        let translation = random_unit_vector(&mut rng);
        let rt = rotation.transpose();

        let corr: std::result::Result<Vec<_>, _> = (0..3)
            .map(|i| {
                let bearing = BearingVector::new(bearings[i])?;
                let camera_point = depths[i] * bearing.dir();
                Ok::<_, Error>(Correspondence {
                    bearing,
                    point: rt.mul_vec(&(camera_point - translation)),
                })
            })
            .collect();
        let Ok(corr) = corr else { continue };
        let Ok(problem) = P3pProblem::new([corr[0], corr[1], corr[2]]) else {
            continue;
        };
        return (
            problem,
            GroundTruth {
                rotation,
                translation,
                depths,
            },
        );
    }
}

/// ξ = ‖R_gt − R‖₁ + ‖t_gt − t‖₁ over all twelve entries.
pub fn pose_error(pose: &Pose, gt: &GroundTruth) -> f64 {
    pose.l1_distance(&gt.pose())
}

/// Determinant, orthogonality and quaternion-norm tests.
pub fn rotation_is_valid(r: &Mat3) -> bool {
    let det_ok = (r.determinant() - 1.0).abs() < DET_TOL;
    let ortho_ok = r.transpose().mul_mat(r).l1_distance(&Mat3::IDENTITY) < ORTHOGONALITY_TOL;
    let quat_ok = (1.0 - rotation_to_quaternion(r).norm()).abs() < QUATERNION_NORM_TOL;
    det_ok && ortho_ok && quat_ok
}

/// Every point lies in front of the camera along its bearing and reprojects
/// within [`REPROJECTION_TOL`] of the observed normalized image point.
pub fn reprojection_ok(pose: &Pose, problem: &P3pProblem) -> bool {
    problem.correspondences().iter().all(|c| {
        let Some((u, v)) = c.bearing.image_point() else {
            return false;
        };
        let p = pose.transform(&c.point);
        if !(c.bearing.dir().dot(&p) > 0.0 && p.z > 0.0) {
            return false;
        }
        let du = p.x / p.z - u;
        let dv = p.y / p.z - v;
        (du * du + dv * dv).sqrt() < REPROJECTION_TOL
    })
}

/// Outcome of one trial. `valid = unique + duplicate + incorrect`, where
/// `incorrect` counts non-duplicate solutions that fail a uniqueness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub valid_count: u32,
    pub unique_count: u32,
    pub duplicate_count: u32,
    pub incorrect_count: u32,
    pub found_good: bool,
    pub found_ground_truth: bool,
    /// Number of solutions with ξ below the ground-truth threshold.
    pub ground_truth_solutions: u32,
    /// ξ of those solutions, in returned order; the first
    /// `ground_truth_solutions` entries are meaningful.
    #[serde(skip)]
    pub ground_truth_xi: [f64; 4],
    /// Smallest ξ over all solutions; `None` when there are none.
    #[serde(serialize_with = "ser_opt_sig17")]
    pub best_xi: Option<f64>,
    pub solver_failed: bool,
    /// Only filled by the timing driver.
    #[serde(serialize_with = "ser_opt_sig17")]
    pub solver_time_ns: Option<f64>,
}

pub fn classify(solutions: &[Solution], problem: &P3pProblem, gt: &GroundTruth) -> TrialRecord {
    let mut rec = TrialRecord {
        valid_count: solutions.len() as u32,
        unique_count: 0,
        duplicate_count: 0,
        incorrect_count: 0,
        found_good: false,
        found_ground_truth: false,
        ground_truth_solutions: 0,
        ground_truth_xi: [0.0; 4],
        best_xi: None,
        solver_failed: false,
        solver_time_ns: None,
    };
    for (j, s) in solutions.iter().enumerate() {
        let is_dup = solutions[..j]
            .iter()
            .any(|e| e.pose.l1_distance(&s.pose) < DUPLICATE_TOL);
        if is_dup {
            rec.duplicate_count += 1;
        } else if rotation_is_valid(&s.pose.rotation) && reprojection_ok(&s.pose, problem) {
            rec.unique_count += 1;
        } else {
            rec.incorrect_count += 1;
        }
        let xi = pose_error(&s.pose, gt);
        if xi < GROUND_TRUTH_TOL {
            if let Some(slot) = rec
                .ground_truth_xi
                .get_mut(rec.ground_truth_solutions as usize)
            {
                *slot = xi;
            }
            rec.ground_truth_solutions += 1;
        }
        rec.best_xi = Some(match rec.best_xi {
            Some(b) if !(xi < b) => b,
            _ => xi,
        });
    }
    rec.found_good = rec.unique_count >= 1;
    rec.found_ground_truth = rec.ground_truth_solutions >= 1;
    rec
}

/// Generates, solves and classifies trial `index`.
pub fn run_trial(spec: &TrialSpec, index: u64, config: &SolverConfig) -> TrialRecord {
    let (problem, gt) = generate_problem(spec, index);
    match solve(&problem, config) {
        Ok(sols) => classify(&sols, &problem, &gt),
        Err(_) => {
            let mut rec = classify(&[], &problem, &gt);
            rec.solver_failed = true;
            rec
        }
    }
}

/// ξ statistics over every solution in the ground-truth category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiStats {
    pub count: u64,
    #[serde(serialize_with = "ser_opt_sig17")]
    pub mean: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig17")]
    pub median: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig17")]
    pub max: Option<f64>,
}

impl XiStats {
    fn from_values(mut values: Vec<f64>) -> Self {
        let count = values.len() as u64;
        if values.is_empty() {
            return XiStats {
                count,
                mean: None,
                median: None,
                max: None,
            };
        }
        // summed in trial order before sorting
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.sort_unstable_by(f64::total_cmp);
        XiStats {
            count,
            mean: Some(mean),
            median: Some(median_of_sorted(&values)),
            max: values.last().copied(),
        }
    }
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Totals over a benchmark run, laid out after the accuracy table rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub trials: u64,
    pub valid: u64,
    pub unique: u64,
    pub duplicates: u64,
    pub good: u64,
    pub no_solution: u64,
    pub ground_truth: u64,
    /// Non-duplicate solutions failing a uniqueness test; with `unique` and
    /// `duplicates` this partitions `valid`.
    pub incorrect: u64,
    /// `valid − unique`: the same quantity with duplicates folded in.
    pub incorrect_including_duplicates: u64,
    /// Solutions (not trials) with ξ below the ground-truth threshold.
    pub ground_truth_solutions: u64,
    pub solver_failures: u64,
    pub xi: XiStats,
}

#[derive(Debug, Default)]
struct Accumulator {
    trials: u64,
    valid: u64,
    unique: u64,
    duplicates: u64,
    incorrect: u64,
    good: u64,
    ground_truth: u64,
    ground_truth_solutions: u64,
    solver_failures: u64,
    gt_xi: Vec<f64>,
}

impl Accumulator {
    fn push(&mut self, r: &TrialRecord) {
        self.trials += 1;
        self.valid += r.valid_count as u64;
        self.unique += r.unique_count as u64;
        self.duplicates += r.duplicate_count as u64;
        self.incorrect += r.incorrect_count as u64;
        self.good += r.found_good as u64;
        self.ground_truth += r.found_ground_truth as u64;
        self.ground_truth_solutions += r.ground_truth_solutions as u64;
        self.solver_failures += r.solver_failed as u64;
        self.gt_xi
            .extend_from_slice(&r.ground_truth_xi[..(r.ground_truth_solutions as usize).min(4)]);
    }

    fn finish(self) -> AggregateReport {
        AggregateReport {
            trials: self.trials,
            valid: self.valid,
            unique: self.unique,
            duplicates: self.duplicates,
            good: self.good,
            no_solution: self.trials - self.good,
            ground_truth: self.ground_truth,
            incorrect: self.incorrect,
            incorrect_including_duplicates: self.valid - self.unique,
            ground_truth_solutions: self.ground_truth_solutions,
            solver_failures: self.solver_failures,
            xi: XiStats::from_values(self.gt_xi),
        }
    }
}

impl AggregateReport {
    /// Folds records given in trial order.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut acc = Accumulator::default();
        for r in records {
            acc.push(r);
        }
        acc.finish()
    }

    /// Values in accuracy-table row order, see [`TABLE_ROWS`].
    pub fn table_column(&self) -> [u64; 7] {
        [
            self.valid,
            self.unique,
            self.duplicates,
            self.good,
            self.no_solution,
            self.ground_truth,
            self.incorrect,
        ]
    }
}

pub const TABLE_ROWS: [&str; 7] = [
    "Valid",
    "Unique",
    "Duplicates",
    "Good",
    "No solution",
    "Ground truth",
    "Incorrect",
];

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    let n = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {n} worker threads: {e}")))
}

/// Like [`run_benchmark`], handing every record to `sink` in trial order.
pub fn run_benchmark_with(
    spec: &TrialSpec,
    trials: u64,
    config: &SolverConfig,
    threads: usize,
    mut sink: impl FnMut(u64, &TrialRecord) -> Result<()>,
) -> Result<AggregateReport> {
    spec.validate()?;
    config.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let pool = thread_pool(threads)?;
    let mut acc = Accumulator::default();
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let records: Vec<TrialRecord> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_trial(spec, i, config))
                .collect()
        });
        for (i, r) in (start..end).zip(&records) {
            sink(i, r)?;
            acc.push(r);
        }
        start = end;
    }
    Ok(acc.finish())
}

/// Generates, solves and classifies `trials` problems. `threads == 0` uses
/// all available cores; the result is the same for every thread count.
pub fn run_benchmark(
    spec: &TrialSpec,
    trials: u64,
    config: &SolverConfig,
    threads: usize,
) -> Result<AggregateReport> {
    run_benchmark_with(spec, trials, config, threads, |_, _| Ok(()))
}

/// One ablation column: a named solver configuration and its report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationColumn {
    pub name: &'static str,
    pub config: SolverConfig,
    pub report: AggregateReport,
}

/// Baseline followed by the five single-heuristic ablations.
pub fn ablation_configs(base: &SolverConfig) -> [(&'static str, SolverConfig); 6] {
    let with = |f: fn(&mut SolverConfig)| {
        let mut c = *base;
        f(&mut c);
        c
    };
    [
        ("baseline", *base),
        (
            "ferrari_lagrange_only",
            with(|c| c.force_variant = QuarticMethod::FerrariLagrange),
        ),
        (
            "classical_only",
            with(|c| c.force_variant = QuarticMethod::Classical),
        ),
        ("no_reindex", with(|c| c.reindex_enabled = false)),
        (
            "d3_from_s12",
            with(|c| c.d3_source = DepthSource::Distance12),
        ),
        (
            "d3_from_s13",
            with(|c| c.d3_source = DepthSource::Distance13),
        ),
    ]
}

pub fn run_ablation(
    spec: &TrialSpec,
    trials: u64,
    base: &SolverConfig,
    threads: usize,
) -> Result<Vec<AblationColumn>> {
    ablation_configs(base)
        .into_iter()
        .map(|(name, config)| {
            Ok(AblationColumn {
                name,
                config,
                report: run_benchmark(spec, trials, &config, threads)?,
            })
        })
        .collect()
}

/// Per-call solve time, averaged over `repeats` calls per problem and then
/// summarized across problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingStats {
    pub trials: u64,
    pub repeats: u32,
    pub warmup_solves: usize,
    #[serde(serialize_with = "ser_sig17")]
    pub mean_ns: f64,
    #[serde(serialize_with = "ser_sig17")]
    pub median_ns: f64,
    #[serde(serialize_with = "ser_sig17")]
    pub min_ns: f64,
    #[serde(serialize_with = "ser_sig17")]
    pub max_ns: f64,
    /// True when every timed call returned exactly what an untimed call
    /// on the same problem returned.
    pub outputs_identical: bool,
    /// Sum over all timed outputs, kept so the calls cannot be optimized out.
    #[serde(serialize_with = "ser_sig17")]
    pub checksum: f64,
}

fn checksum(result: &Result<crate::p3p::Solutions>) -> f64 {
    match result {
        Ok(sols) => sols
            .iter()
            .map(|s| {
                s.pose.rotation.rows.iter().flatten().sum::<f64>() + s.pose.translation.l1_norm()
            })
            .sum(),
        Err(_) => -1.0,
    }
}

fn same_output(a: &Result<crate::p3p::Solutions>, b: &Result<crate::p3p::Solutions>) -> bool {
    match (a, b) {
        (Ok(a), Ok(b)) => a.as_slice() == b.as_slice(),
        (Err(a), Err(b)) => a.to_string() == b.to_string(),
        _ => false,
    }
}

/// Single-threaded timing run. Problems are generated outside the timed
/// region; each problem is solved `repeats` times back to back.
pub fn run_timing(
    spec: &TrialSpec,
    trials: u64,
    repeats: u32,
    config: &SolverConfig,
) -> Result<TimingStats> {
    spec.validate()?;
    config.validate()?;
    if trials == 0 || repeats == 0 {
        return Err(Error::InvalidConfig(
            "trials and repeats must be at least 1".into(),
        ));
    }
    let (warm, _) = generate_problem(spec, u64::MAX);
    let mut sink = 0.0;
    for _ in 0..TIMING_WARMUP_SOLVES {
        sink += checksum(&solve(black_box(&warm), config));
    }

    let mut times = Vec::with_capacity(trials as usize);
    let mut identical = true;
    for i in 0..trials {
        let (problem, _) = generate_problem(spec, i);
        let reference = solve(&problem, config);
        let mut last = None;
        let start = Instant::now();
        for _ in 0..repeats {
            last = Some(black_box(solve(black_box(&problem), black_box(config))));
        }
        let elapsed = start.elapsed().as_nanos() as f64;
        times.push(elapsed / repeats as f64);
        let last = last.expect("repeats >= 1");
        identical &= same_output(&reference, &last);
        sink += checksum(&last);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    times.sort_unstable_by(f64::total_cmp);
    Ok(TimingStats {
        trials,
        repeats,
        warmup_solves: TIMING_WARMUP_SOLVES,
        mean_ns: mean,
        median_ns: median_of_sorted(&times),
        min_ns: times[0],
        max_ns: times[times.len() - 1],
        outputs_identical: identical,
        checksum: black_box(sink),
    })
}

/// Formats a float with 17 significant digits, `null` when not finite.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_owned()
    }
}

fn ser_sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw =
        serde_json::value::RawValue::from_string(sig17(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn ser_opt_sig17<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    ser_sig17(&x.unwrap_or(f64::NAN), s)
}
