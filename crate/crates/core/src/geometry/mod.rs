//! Camera poses on SO(3) x T(3), pinhole intrinsics and pose-error metrics.
//!
//! A [`Pose`] is stored as a camera center and a unit quaternion that rotates
//! world-frame vectors into the camera frame: `x_cam = R(q) * (x_world - c)`.
//! World `+y` is the vertical axis. Camera frame is `x` right, `y` down, `z`
//! forward.

mod posefile;

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::error::{Error, Result};

pub use posefile::{read_pose_file, write_pose_file, NamedPose};

/// Unit-norm tolerance used when an operation requires a unit quaternion or axis.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Quaternion `(w, x, y, z)` with Hamilton product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Quat::new(q[0], q[1], q[2], q[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, other: Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }

    fn vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Flips the sign so that `w >= 0`; for `w == 0` the first nonzero
    /// vector component is made positive.
    fn canonical(self) -> Quat {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else {
            let first = [self.x, self.y, self.z]
                .into_iter()
                .find(|v| *v != 0.0)
                .unwrap_or(0.0);
            first < 0.0
        };
        if flip {
            self.neg()
        } else {
            self
        }
    }

    /// Angle of the rotation represented by this unit quaternion, radians in `[0, pi]`.
    pub fn angle(self) -> f64 {
        2.0 * self.vector().norm().atan2(self.w.abs())
    }
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, r: Quat) -> Quat {
        let l = self;
        Quat::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

/// Normalizes `q` to unit length and resolves the double cover (`w >= 0`).
pub fn quat_normalize(q: [f64; 4]) -> Result<Quat> {
    let q = Quat::from_array(q);
    let n = q.norm();
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::InvalidQuaternion(format!(
            "cannot normalize {:?} (norm {n})",
            q.to_array()
        )));
    }
    Ok(Quat::new(q.w / n, q.x / n, q.y / n, q.z / n).canonical())
}

fn check_unit(q: Quat) -> Result<()> {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE || !n.is_finite() {
        return Err(Error::InvalidQuaternion(format!(
            "expected unit quaternion, got norm {n}"
        )));
    }
    Ok(())
}

/// Rotation matrix of a unit quaternion.
pub fn quat_to_rotmat(q: Quat) -> Result<Matrix3<f64>> {
    check_unit(q)?;
    Ok(rotmat_unchecked(q))
}

fn rotmat_unchecked(q: Quat) -> Matrix3<f64> {
    let Quat { w, x, y, z } = q;
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let (xy, xz, yz) = (x * y, x * z, y * z);
    let (wx, wy, wz) = (w * x, w * y, w * z);
    Matrix3::new(
        1.0 - 2.0 * (yy + zz),
        2.0 * (xy - wz),
        2.0 * (xz + wy),
        2.0 * (xy + wz),
        1.0 - 2.0 * (xx + zz),
        2.0 * (yz - wx),
        2.0 * (xz - wy),
        2.0 * (yz + wx),
        1.0 - 2.0 * (xx + yy),
    )
}

/// Quaternion of a rotation matrix (Shepperd's method), canonicalized.
pub fn rotmat_to_quat(m: &Matrix3<f64>) -> Quat {
    let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let q = if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0;
        Quat::new(
            0.25 * s,
            (m[(2, 1)] - m[(1, 2)]) / s,
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(1, 0)] - m[(0, 1)]) / s,
        )
    } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        Quat::new(
            (m[(2, 1)] - m[(1, 2)]) / s,
            0.25 * s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
        )
    } else if m[(1, 1)] > m[(2, 2)] {
        let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
        Quat::new(
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            0.25 * s,
            (m[(1, 2)] + m[(2, 1)]) / s,
        )
    } else {
        let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
        Quat::new(
            (m[(1, 0)] - m[(0, 1)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
            (m[(1, 2)] + m[(2, 1)]) / s,
            0.25 * s,
        )
    };
    quat_normalize(q.to_array()).unwrap_or(Quat::IDENTITY)
}

/// Exponential map of `angle * axis` (radians) onto a unit quaternion.
pub fn exp_rotation(axis: Vector3<f64>, angle: f64) -> Result<Quat> {
    let n = axis.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidAxis(format!(
            "expected unit axis, got {:?} (norm {n})",
            axis.as_slice()
        )));
    }
    let half = 0.5 * angle;
    let s = half.sin();
    Ok(Quat::new(half.cos(), s * axis.x, s * axis.y, s * axis.z).canonical())
}

/// Camera pose: center in world coordinates plus world-to-camera rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    center: Vector3<f64>,
    quat: Quat,
}

impl Pose {
    pub fn new(center: Vector3<f64>, quat: [f64; 4]) -> Result<Self> {
        Ok(Pose {
            center,
            quat: quat_normalize(quat)?,
        })
    }

    pub fn from_parts(center: Vector3<f64>, quat: Quat) -> Result<Self> {
        Pose::new(center, quat.to_array())
    }

    pub fn identity() -> Self {
        Pose {
            center: Vector3::zeros(),
            quat: Quat::IDENTITY,
        }
    }

    /// Camera at `center` looking at `target` with world `+y` as up.
    pub fn look_at(center: Vector3<f64>, target: Vector3<f64>) -> Result<Self> {
        let forward = target - center;
        if forward.norm() < 1e-12 {
            return Err(Error::InvalidArgument(
                "look_at target coincides with center".into(),
            ));
        }
        let forward = forward.normalize();
        let up = Vector3::y();
        let right = forward.cross(&up);
        if right.norm() < 1e-9 {
            return Err(Error::InvalidArgument(
                "look_at direction is parallel to the vertical axis".into(),
            ));
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Ok(Pose {
            center,
            quat: rotmat_to_quat(&r),
        })
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn quat(&self) -> Quat {
        self.quat
    }

    /// World-to-camera rotation.
    pub fn rotation(&self) -> Matrix3<f64> {
        rotmat_unchecked(self.quat)
    }

    /// Camera optical axis expressed in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation().row(2).transpose()
    }

    /// World-frame point into camera coordinates.
    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * (p - self.center)
    }

    pub fn with_center(&self, center: Vector3<f64>) -> Pose {
        Pose {
            center,
            quat: self.quat,
        }
    }

    /// Right-composes a rotation increment: `q' = q * delta`.
    pub fn rotated(&self, delta: Quat) -> Pose {
        let q = self.quat * delta;
        Pose {
            center: self.center,
            quat: quat_normalize(q.to_array()).unwrap_or(self.quat),
        }
    }

    pub fn translated(&self, offset: Vector3<f64>) -> Pose {
        self.with_center(self.center + offset)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.quat;
        let c = self.center;
        write!(
            f,
            "q=({:.6}, {:.6}, {:.6}, {:.6}) c=({:.4}, {:.4}, {:.4})",
            q.w, q.x, q.y, q.z, c.x, c.y, c.z
        )
    }
}

/// Draws a uniformly distributed unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let v: [f64; 3] = UnitSphere.sample(rng);
    Vector3::new(v[0], v[1], v[2]).normalize()
}

/// Gaussian translation noise plus a uniform-angle rotation about a random axis.
///
/// `trans_sigma` is per world axis, so any vertical damping is the caller's
/// choice. `rot_mag` is in degrees; the angle is drawn from
/// `U(-rot_mag, rot_mag)`. The random stream is consumed identically whatever
/// the magnitudes, and zero magnitudes return `base` unchanged.
pub fn perturb_pose<R: Rng + ?Sized>(
    base: &Pose,
    trans_sigma: Vector3<f64>,
    rot_mag: f64,
    rng: &mut R,
) -> Pose {
    let eps = Vector3::from_fn(|i, _| {
        let n: f64 = StandardNormal.sample(rng);
        n * trans_sigma[i]
    });
    let axis = random_unit_vector(rng);
    let u: f64 = rng.random_range(-1.0..=1.0);

    let mut out = *base;
    if trans_sigma.iter().any(|s| *s != 0.0) {
        out.center += eps;
    }
    if rot_mag != 0.0 {
        let angle = (u * rot_mag).to_radians();
        // axis comes from UnitSphere so this cannot fail
        let delta = exp_rotation(axis, angle).expect("unit axis");
        out = out.rotated(delta);
    }
    out
}

/// Moves `base` by exactly `trans` meters in a random direction (vertical
/// component damped by `vertical_damping` before renormalizing) and rotates it
/// by exactly `rot_deg` degrees about a random axis.
pub fn perturb_pose_exact<R: Rng + ?Sized>(
    base: &Pose,
    trans: f64,
    rot_deg: f64,
    vertical_damping: f64,
    rng: &mut R,
) -> Pose {
    let mut dir = random_unit_vector(rng);
    dir.y *= vertical_damping;
    let dir = if dir.norm() > 1e-12 {
        dir.normalize()
    } else {
        Vector3::x()
    };
    let axis = random_unit_vector(rng);
    let delta = exp_rotation(axis, rot_deg.to_radians()).expect("unit axis");
    base.translated(dir * trans).rotated(delta)
}

/// Pinhole camera. Pixel `(i, j)` covers `[i, i+1) x [j, j+1)`, so scaling
/// every parameter by `s` renders the same view at `s` times the resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let intr = Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        intr.validate()?;
        Ok(intr)
    }

    /// Centered principal point with the given horizontal field of view.
    pub fn from_fov(width: u32, height: u32, hfov_deg: f64) -> Result<Self> {
        let f = 0.5 * width as f64 / (0.5 * hfov_deg.to_radians()).tan();
        Intrinsics::new(f, f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidIntrinsics("zero image dimension".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx)
            || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(Error::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Same camera at a new resolution; the scale is taken from the height
    /// ratio and the width follows the aspect ratio.
    pub fn at_height(&self, height: u32) -> Intrinsics {
        let s = height as f64 / self.height as f64;
        let width = ((self.width as f64 * s).round() as u32).max(1);
        Intrinsics {
            fx: self.fx * s,
            fy: self.fy * s,
            cx: self.cx * s,
            cy: self.cy * s,
            width,
            height,
        }
    }

    pub fn scaled(&self, s: f64) -> Intrinsics {
        self.at_height(((self.height as f64) * s).round() as u32)
    }

    /// Projects a camera-frame point to continuous pixel coordinates.
    pub fn project(&self, p: &Vector3<f64>) -> (f64, f64) {
        (
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        )
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }
}

/// Translation error in meters and rotation error in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseError {
    pub trans_err: f64,
    pub rot_err: f64,
}

pub fn pose_error(est: &Pose, gt: &Pose) -> PoseError {
    let trans_err = (est.center - gt.center).norm();
    // half the 4D angle between the quaternions, from chord lengths
    let a = est.quat;
    let b = if a.dot(gt.quat) < 0.0 { Quat::new(-gt.quat.w, -gt.quat.x, -gt.quat.y, -gt.quat.z) } else { gt.quat };
    let diff = Quat::new(a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z).norm();
    let sum = Quat::new(a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z).norm();
    let rot_err = (4.0 * diff.atan2(sum)).to_degrees().clamp(0.0, 180.0);
    PoseError { trans_err, rot_err }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn rodrigues(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
        let k = Matrix3::new(
            0.0, -axis.z, axis.y, axis.z, 0.0, -axis.x, -axis.y, axis.x, 0.0,
        );
        Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(quat_normalize([2.0, 0.0, 0.0, 0.0]).unwrap(), Quat::IDENTITY);
        assert_eq!(quat_normalize([-1.0, 0.0, 0.0, 0.0]).unwrap(), Quat::IDENTITY);
        let q = quat_normalize([1.0, 1.0, 1.0, 1.0]).unwrap();
        // dot with the raw input equals its norm (2) only for the right direction
        let dot = q.dot(Quat::new(1.0, 1.0, 1.0, 1.0));
        assert_abs_diff_eq!(dot, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.w, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q.z, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            quat_normalize([0.0; 4]),
            Err(Error::InvalidQuaternion(_))
        ));
    }

    #[test]
    fn rotmat_examples() {
        assert_eq!(quat_to_rotmat(Quat::IDENTITY).unwrap(), Matrix3::identity());
        let q = Quat::new(FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2);
        let r = quat_to_rotmat(q).unwrap();
        let oracle = rodrigues(Vector3::z(), PI / 2.0);
        assert!((r - oracle).abs().max() < 1e-12);
        assert!(quat_to_rotmat(Quat::new(2.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_rotation(Vector3::z(), 0.0).unwrap(), Quat::IDENTITY);
        let q = exp_rotation(Vector3::z(), PI).unwrap();
        let r = quat_to_rotmat(q).unwrap();
        assert!((r - rodrigues(Vector3::z(), PI)).abs().max() < 1e-12);
        assert_abs_diff_eq!(q.z, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.w, 0.0, epsilon = 1e-12);

        let a = Vector3::new(1.0, 2.0, -0.5).normalize();
        let id = exp_rotation(a, 0.7).unwrap() * exp_rotation(a, -0.7).unwrap();
        assert!(pose_error(
            &Pose::from_parts(Vector3::zeros(), id).unwrap(),
            &Pose::identity()
        )
        .rot_err
            < 1e-9);
        assert!(matches!(
            exp_rotation(Vector3::new(1.0, 1.0, 0.0), 1.0),
            Err(Error::InvalidAxis(_))
        ));
    }

    #[test]
    fn rotmat_to_quat_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let q = exp_rotation(random_unit_vector(&mut rng), rng.random_range(-3.1..3.1)).unwrap();
            let back = rotmat_to_quat(&quat_to_rotmat(q).unwrap());
            assert!(q.dot(back).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn perturb_zero_is_identity() {
        let base = Pose::new(Vector3::new(1.0, 2.0, 3.0), [0.3, 0.1, -0.4, 0.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = perturb_pose(&base, Vector3::zeros(), 0.0, &mut rng);
        assert_eq!(p, base);
    }

    #[test]
    fn perturb_is_deterministic() {
        let base = Pose::identity();
        let sig = Vector3::new(1.0, 0.1, 1.0);
        let a = perturb_pose(&base, sig, 10.0, &mut ChaCha8Rng::seed_from_u64(9));
        let b = perturb_pose(&base, sig, 10.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn perturb_mean_center() {
        let base = Pose::new(Vector3::new(2.0, -1.0, 5.0), [1.0, 0.0, 0.0, 0.0]).unwrap();
        let sigma = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 10_000;
        let mut sum = Vector3::zeros();
        for _ in 0..n {
            sum += perturb_pose(&base, Vector3::repeat(sigma), 5.0, &mut rng).center();
        }
        let mean = sum / n as f64;
        assert!((mean - base.center()).amax() < 4.0 * sigma / 100.0);
    }

    #[test]
    fn perturb_rotation_bounded() {
        let base = Pose::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = perturb_pose(&base, Vector3::zeros(), 7.0, &mut rng);
            assert!(pose_error(&p, &base).rot_err <= 7.0 + 1e-9);
        }
    }

    #[test]
    fn exact_perturbation_magnitudes() {
        let base = Pose::look_at(Vector3::new(0.0, 1.5, 0.0), Vector3::new(1.0, 1.5, 3.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = perturb_pose_exact(&base, 0.7, 15.0, 0.1, &mut rng);
            let e = pose_error(&p, &base);
            assert_abs_diff_eq!(e.trans_err, 0.7, epsilon = 1e-9);
            assert_abs_diff_eq!(e.rot_err, 15.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pose_error_examples() {
        let t = Pose::new(Vector3::new(1.0, 2.0, 3.0), [0.9, 0.1, 0.2, 0.3]).unwrap();
        let e = pose_error(&t, &t);
        assert_eq!(e.trans_err, 0.0);
        assert_eq!(e.rot_err, 0.0);

        let shifted = t.translated(Vector3::new(3.0, 4.0, 0.0));
        assert_abs_diff_eq!(pose_error(&shifted, &t).trans_err, 5.0, epsilon = 1e-12);

        let z90 = Pose::new(Vector3::zeros(), [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let r = quat_to_rotmat(z90.quat()).unwrap();
        let trace_angle = ((r.trace() - 1.0) / 2.0).acos().to_degrees();
        let e = pose_error(&Pose::identity(), &z90);
        assert_abs_diff_eq!(e.rot_err, trace_angle, epsilon = 1e-9);
        assert_abs_diff_eq!(e.rot_err, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn look_at_points_forward() {
        let c = Vector3::new(1.0, 1.6, 2.0);
        let target = Vector3::new(4.0, 1.0, 6.0);
        let p = Pose::look_at(c, target).unwrap();
        let cam = p.to_camera(&target);
        assert!(cam.x.abs() < 1e-9 && cam.y.abs() < 1e-9 && cam.z > 0.0);
        // a point above the target projects upward (negative image y)
        let above = p.to_camera(&(target + Vector3::y()));
        assert!(above.y < 0.0);
    }

    #[test]
    fn intrinsics_validation_and_scaling() {
        assert!(Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120).is_ok());
        assert!(Intrinsics::new(-1.0, 100.0, 80.0, 60.0, 160, 120).is_err());
        assert!(Intrinsics::new(100.0, 100.0, 160.0, 60.0, 160, 120).is_err());
        let i = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120).unwrap();
        let h = i.at_height(60);
        assert_eq!((h.width, h.height), (80, 60));
        assert_eq!(h.fx, 50.0);
        assert_eq!(h.cx, 40.0);
    }
}
