use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{EulerAngles, Vec3};
use crate::real::Real;

/// Unit quaternion rotating body-frame vectors into the world frame.
///
/// World frame is z-up. The vehicle's longitudinal (thrust) axis is body +z, so the identity
/// quaternion is an upright vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Default for Quaternion<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Quaternion<T> {
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    /// Rotation of `angle_rad` about `axis`. A zero axis yields the identity.
    pub fn from_axis_angle(axis: Vec3<T>, angle_rad: T) -> Self {
        let n = axis.norm();
        if n == T::zero() {
            return Self::identity();
        }
        let half = angle_rad / T::lit(2.0);
        let s = half.sin() / n;
        Self::new(half.cos(), axis.x * s, axis.y * s, axis.z * s)
    }

    /// Exponential map of a rotation vector (axis scaled by angle in radians).
    pub fn from_rotation_vector(v: Vec3<T>) -> Self {
        let angle = v.norm();
        if angle == T::zero() {
            return Self::identity();
        }
        Self::from_axis_angle(v, angle)
    }

    /// Shortest-arc rotation taking unit direction `from` onto unit direction `to`.
    pub fn between(from: Vec3<T>, to: Vec3<T>) -> Self {
        let a = from.scale(T::one() / from.norm());
        let b = to.scale(T::one() / to.norm());
        let axis = a.cross(&b);
        let angle = axis.norm().atan2(a.dot(&b));
        if axis.norm() == T::zero() {
            if a.dot(&b) > T::zero() {
                return Self::identity();
            }
            // antiparallel: any axis orthogonal to `a`
            let ortho = if a.x.abs() < T::lit(0.9) {
                Vec3::unit_x().cross(&a)
            } else {
                Vec3::unit_y().cross(&a)
            };
            return Self::from_axis_angle(ortho, T::PI());
        }
        Self::from_axis_angle(axis, angle)
    }

    /// Intrinsic Z-Y-X construction: yaw about z, then pitch about the new y, then roll about
    /// the new x.
    pub fn from_euler(e: &EulerAngles<T>) -> Self {
        let qz = Self::from_axis_angle(Vec3::unit_z(), e.yaw_deg.to_radians());
        let qy = Self::from_axis_angle(Vec3::unit_y(), e.pitch_deg.to_radians());
        let qx = Self::from_axis_angle(Vec3::unit_x(), e.roll_deg.to_radians());
        (qz * qy * qx).normalized()
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotates a body-frame vector into the world frame.
    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        let u = Vec3::new(self.x, self.y, self.z);
        let two = T::lit(2.0);
        let t = u.cross(&v).scale(two);
        v + t.scale(self.w) + u.cross(&t)
    }

    /// Rotates a world-frame vector into the body frame.
    pub fn inverse_rotate(&self, v: Vec3<T>) -> Vec3<T> {
        self.conjugate().rotate(v)
    }

    /// The body longitudinal axis expressed in world coordinates.
    pub fn body_axis(&self) -> Vec3<T> {
        let two = T::lit(2.0);
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Vec3::new(
            two * (x * z + w * y),
            two * (y * z - w * x),
            T::one() - two * (x * x + y * y),
        )
    }

    /// Scaled by −1 when needed so that `w >= 0`; same rotation.
    pub fn canonical(&self) -> Self {
        if self.w < T::zero() {
            Self::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            *self
        }
    }

    /// Rotation angle between two orientations, radians in [0, π].
    pub fn angle_to(&self, other: &Self) -> T {
        let r = self.conjugate() * *other;
        let v = (r.x * r.x + r.y * r.y + r.z * r.z).sqrt();
        T::lit(2.0) * v.atan2(r.w.abs())
    }
}

impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;

    /// Hamilton product; `a * b` applies `b` first, then `a`.
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}
