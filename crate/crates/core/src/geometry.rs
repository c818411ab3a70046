//! Fixed-size value types shared by the solver and the benchmark.
//!
//! Only the handful of 3-vector and 3×3 operations the solver needs live
//! here; nothing in this module allocates.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Bearings shorter than this are rejected instead of normalized.
pub const MIN_BEARING_NORM: f64 = 1e-9;

/// Two bearings (or two points) closer than this are considered identical.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(&self, other: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl From<[[f64; 3]; 3]> for Mat3 {
    fn from(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { rows }
    }
}

impl From<Mat3> for [[f64; 3]; 3] {
    fn from(m: Mat3) -> Self {
        m.rows
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            rows: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Mat3 {
            rows: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r][c]
    }

    pub fn col(&self, c: usize) -> Vec3 {
        Vec3::new(self.rows[0][c], self.rows[1][c], self.rows[2][c])
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Transposed cofactor matrix; `self * adjugate() == det * I`.
    pub fn adjugate(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [
                    r[1][1] * r[2][2] - r[1][2] * r[2][1],
                    r[0][2] * r[2][1] - r[0][1] * r[2][2],
                    r[0][1] * r[1][2] - r[0][2] * r[1][1],
                ],
                [
                    r[1][2] * r[2][0] - r[1][0] * r[2][2],
                    r[0][0] * r[2][2] - r[0][2] * r[2][0],
                    r[0][2] * r[1][0] - r[0][0] * r[1][2],
                ],
                [
                    r[1][0] * r[2][1] - r[1][1] * r[2][0],
                    r[0][1] * r[2][0] - r[0][0] * r[2][1],
                    r[0][0] * r[1][1] - r[0][1] * r[1][0],
                ],
            ],
        }
    }

    /// Inverse through the adjugate. Returns `None` when the determinant is zero
    /// or not finite; callers with a scale-aware singularity test should check
    /// the determinant themselves first.
    pub fn inverse(&self) -> Option<Mat3> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / det))
    }

    pub fn scale(&self, k: f64) -> Mat3 {
        let mut out = *self;
        for row in out.rows.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let a = &self.rows;
        let b = &other.rows;
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3 { rows }
    }

    /// Sum of absolute element-wise differences.
    pub fn l1_distance(&self, other: &Mat3) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` if a pivot magnitude drops below `min_pivot`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &Vec3, min_pivot: f64) -> Option<Vec3> {
        let mut a = self.rows;
        let mut b = rhs.to_array();
        for k in 0..3 {
            let mut p = k;
            for i in (k + 1)..3 {
                if a[i][k].abs() > a[p][k].abs() {
                    p = i;
                }
            }
            if !(a[p][k].abs() >= min_pivot) {
                return None;
            }
            if p != k {
                a.swap(p, k);
                b.swap(p, k);
            }
            for i in (k + 1)..3 {
                let f = a[i][k] / a[k][k];
                for j in k..3 {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = [0.0; 3];
        for i in (0..3).rev() {
            let mut acc = b[i];
            for j in (i + 1)..3 {
                acc -= a[i][j] * x[j];
            }
            x[i] = acc / a[i][i];
        }
        Some(Vec3::from(x))
    }
}

/// Quaternion stored scalar-first as `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Quaternion {
        let n = self.norm();
        Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Rotation matrix of a unit quaternion.
    pub fn to_rotation_matrix(&self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat3::from_rows([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }
}

/// Extracts a quaternion from `r` using whichever of the four standard
/// formulas has the largest denominator (trace or one of the diagonal
/// entries). The result is deliberately not normalized: for a matrix that is
/// not a rotation its norm drifts away from one, and that drift is what the
/// validity check measures.
pub fn rotation_to_quaternion(r: &Mat3) -> Quaternion {
    let m = &r.rows;
    let trace = m[0][0] + m[1][1] + m[2][2];
    if trace >= m[0][0] && trace >= m[1][1] && trace >= m[2][2] {
        let s = 2.0 * (1.0 + trace).sqrt();
        Quaternion::new(
            0.25 * s,
            (m[2][1] - m[1][2]) / s,
            (m[0][2] - m[2][0]) / s,
            (m[1][0] - m[0][1]) / s,
        )
    } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
        let s = 2.0 * (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt();
        Quaternion::new(
            (m[2][1] - m[1][2]) / s,
            0.25 * s,
            (m[0][1] + m[1][0]) / s,
            (m[0][2] + m[2][0]) / s,
        )
    } else if m[1][1] >= m[2][2] {
        let s = 2.0 * (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt();
        Quaternion::new(
            (m[0][2] - m[2][0]) / s,
            (m[0][1] + m[1][0]) / s,
            0.25 * s,
            (m[1][2] + m[2][1]) / s,
        )
    } else {
        let s = 2.0 * (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt();
        Quaternion::new(
            (m[1][0] - m[0][1]) / s,
            (m[0][2] + m[2][0]) / s,
            (m[1][2] + m[2][1]) / s,
            0.25 * s,
        )
    }
}

/// Unit direction from the camera center toward an observed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingVector(Vec3);

impl BearingVector {
    /// Normalizes `v`. Inputs that are not finite or shorter than
    /// [`MIN_BEARING_NORM`] are rejected.
    pub fn new(v: Vec3) -> Result<Self, Error> {
        if !v.is_finite() {
            return Err(Error::NonFinite("bearing"));
        }
        let n = v.norm();
        if n < MIN_BEARING_NORM {
            return Err(Error::ZeroBearing(n));
        }
        Ok(BearingVector(v * (1.0 / n)))
    }

    /// Normalized image coordinates `(x/z, y/z)`; `None` unless `z > 0`.
    pub fn image_point(&self) -> Option<(f64, f64)> {
        let d = self.0;
        (d.z > 0.0).then(|| (d.x / d.z, d.y / d.z))
    }

    #[inline]
    pub fn dir(&self) -> Vec3 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub bearing: BearingVector,
    pub point: Vec3,
}

impl Correspondence {
    pub fn new(bearing: Vec3, point: Vec3) -> Result<Self, Error> {
        if !point.is_finite() {
            return Err(Error::NonFinite("point"));
        }
        Ok(Correspondence {
            bearing: BearingVector::new(bearing)?,
            point,
        })
    }
}

/// Three bearing/point correspondences: the complete solver input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P3pProblem {
    corr: [Correspondence; 3],
}

impl P3pProblem {
    pub fn new(corr: [Correspondence; 3]) -> Result<Self, Error> {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (corr[i].bearing.dir() - corr[j].bearing.dir()).norm() <= COINCIDENCE_TOL {
                return Err(Error::DuplicateBearings(i + 1, j + 1));
            }
            if (corr[i].point - corr[j].point).norm() <= COINCIDENCE_TOL {
                return Err(Error::CoincidentPoints(i + 1, j + 1));
            }
        }
        Ok(P3pProblem { corr })
    }

    /// Builds a problem from raw bearings (normalized here) and points.
    pub fn from_arrays(bearings: [Vec3; 3], points: [Vec3; 3]) -> Result<Self, Error> {
        P3pProblem::new([
            Correspondence::new(bearings[0], points[0])?,
            Correspondence::new(bearings[1], points[1])?,
            Correspondence::new(bearings[2], points[2])?,
        ])
    }

    pub fn correspondences(&self) -> &[Correspondence; 3] {
        &self.corr
    }

    #[inline]
    pub fn bearing(&self, i: usize) -> Vec3 {
        self.corr[i].bearing.dir()
    }

    #[inline]
    pub fn point(&self, i: usize) -> Vec3 {
        self.corr[i].point
    }

    /// Same correspondences reordered so that entry `k` of the result is
    /// entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> P3pProblem {
        P3pProblem {
            corr: [self.corr[perm[0]], self.corr[perm[1]], self.corr[perm[2]]],
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: ProblemFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from(self)).expect("problem serializes")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceRecord {
    pub bearing: Vec3,
    pub point: Vec3,
}

/// On-disk form of a [`P3pProblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub correspondences: Vec<CorrespondenceRecord>,
}

impl TryFrom<ProblemFile> for P3pProblem {
    type Error = Error;

    fn try_from(file: ProblemFile) -> Result<Self, Error> {
        let records: [CorrespondenceRecord; 3] = file
            .correspondences
            .try_into()
            .map_err(|v: Vec<_>| Error::CorrespondenceCount(v.len()))?;
        let [a, b, c] = records;
        P3pProblem::new([
            Correspondence::new(a.bearing, a.point)?,
            Correspondence::new(b.bearing, b.point)?,
            Correspondence::new(c.bearing, c.point)?,
        ])
    }
}

impl From<&P3pProblem> for ProblemFile {
    fn from(p: &P3pProblem) -> Self {
        ProblemFile {
            correspondences: p
                .corr
                .iter()
                .map(|c| CorrespondenceRecord {
                    bearing: c.bearing.dir(),
                    point: c.point,
                })
                .collect(),
        }
    }
}

/// Rigid transform mapping world points into the camera frame: `R X + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    #[serde(rename = "R")]
    pub rotation: Mat3,
    #[serde(rename = "t")]
    pub translation: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: Mat3::IDENTITY,
        translation: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    pub fn transform(&self, p: &Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    /// `‖R_a − R_b‖₁ + ‖t_a − t_b‖₁`.
    pub fn l1_distance(&self, other: &Pose) -> f64 {
        self.rotation.l1_distance(&other.rotation)
            + (self.translation - other.translation).l1_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.is_finite() && self.translation.is_finite()
    }
}

/// A pose together with the positive depths of the three points, listed in
/// the caller's correspondence order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(flatten)]
    pub pose: Pose,
    pub depths: [f64; 3],
}
