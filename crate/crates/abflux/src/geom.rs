//! Planar vectors and the little geometry the phase integrals live on.
//!
//! Everything physical happens in the x–y plane; the flux points along +z.
//! [`Vec3`] exists only for the volume-integral kernels, where the Coulomb
//! field of a charge is genuinely three-dimensional.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Planar vector (also used as a point).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[must_use]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[must_use]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3-D cross product; positive when `other` lies
    /// counterclockwise of `self`.
    #[must_use]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[must_use]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[must_use]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[must_use]
    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise quarter turn; for a radial unit vector this is the
    /// azimuthal direction θ̂.
    #[must_use]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[must_use]
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Polar angle in (−π, π].
    #[must_use]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[must_use]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        *self = *self + rhs;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Spatial vector for Coulomb-field kernels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    #[must_use]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Embed a planar vector at height z.
    #[must_use]
    pub const fn from_planar(v: Vec2, z: f64) -> Self {
        Self { x: v.x, y: v.y, z }
    }

    #[must_use]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[must_use]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[must_use]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Wrap an angle into (−π, π].
#[must_use]
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Endpoints within this relative distance close a polyline.
const CLOSURE_EPS: f64 = 1e-9;

/// Whether the polyline's endpoints coincide (to a scale-aware tolerance).
#[must_use]
pub fn polyline_is_closed(pts: &[Vec2]) -> bool {
    match (pts.first(), pts.last()) {
        (Some(&a), Some(&b)) if pts.len() > 2 => {
            a.dist(b) <= CLOSURE_EPS * (1.0 + a.norm().max(b.norm()))
        }
        _ => false,
    }
}

/// Signed angle subtended at `about` by the straight segment `p` → `q`,
/// counterclockwise positive. Exact for a linear segment: the continuous
/// sweep of the polar angle along a chord never exceeds π in magnitude
/// unless the chord passes through `about`, which is rejected.
pub fn segment_angle(about: Vec2, p: Vec2, q: Vec2) -> Result<f64> {
    let rp = p - about;
    let rq = q - about;
    if rp.norm_sq() == 0.0 || rq.norm_sq() == 0.0 {
        return Err(Error::PathThroughPoint { index: 0 });
    }
    let cross = rp.cross(rq);
    let dot = rp.dot(rq);
    if cross == 0.0 && dot < 0.0 {
        // Antipodal endpoints: the chord runs straight through `about`.
        return Err(Error::PathThroughPoint { index: 0 });
    }
    Ok(cross.atan2(dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn perp_is_ccw_quarter_turn() {
        let v = Vec2::new(1.0, 0.0);
        assert_eq!(v.perp(), Vec2::new(0.0, 1.0));
        assert_relative_eq!(v.cross(v.perp()), v.norm_sq());
        assert_eq!(v.dot(v.perp()), 0.0);
    }

    #[test]
    fn rotation_composes() {
        let v = Vec2::new(0.3, -1.7);
        let w = v.rotated(0.4).rotated(1.1);
        let u = v.rotated(1.5);
        assert_relative_eq!(w.x, u.x, max_relative = 1e-14);
        assert_relative_eq!(w.y, u.y, max_relative = 1e-14);
    }

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(0.3), 0.3);
        assert_relative_eq!(wrap_angle(-0.3), -0.3);
    }

    #[test]
    fn segment_angle_quarter_turn() {
        let a = segment_angle(Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)).unwrap();
        assert_relative_eq!(a, FRAC_PI_2, max_relative = 1e-15);
        // Clockwise traversal flips the sign.
        let b = segment_angle(Vec2::ZERO, Vec2::new(0.0, 2.0), Vec2::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(b, -FRAC_PI_2, max_relative = 1e-15);
    }

    #[test]
    fn segment_through_center_rejected() {
        let r = segment_angle(Vec2::ZERO, Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0));
        assert!(matches!(r, Err(Error::PathThroughPoint { .. })));
    }

    #[test]
    fn cross_product_orientation_3d() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        let e2 = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(e1.cross(e2), Vec3::new(0.0, 0.0, 1.0));
    }
}
