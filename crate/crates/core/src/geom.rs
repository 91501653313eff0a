//! Planar geometry shared by every other module: vectors, wrapped angles,
//! bearings, and the constant-speed airplane kinematics.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::ModeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle`.
    pub fn from_angle(angle: AngleRad) -> Self {
        let (s, c) = angle.value().sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Scalar z-component of the 3-D cross product of two planar vectors.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

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
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// An angle in radians, kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct AngleRad(f64);

impl AngleRad {
    pub const ZERO: AngleRad = AngleRad(0.0);

    /// Wraps a finite angle into `[-π, π)`. Non-finite input propagates as NaN;
    /// use [`normalize_angle`] when the input is untrusted.
    pub fn wrap(a: f64) -> Self {
        let mut w = (a + PI).rem_euclid(TAU) - PI;
        // rem_euclid can round up to TAU for tiny negative arguments
        if w >= PI {
            w -= TAU;
        }
        AngleRad(w)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `self + delta`, wrapped.
    pub fn offset(self, delta: f64) -> Self {
        AngleRad::wrap(self.0 + delta)
    }

    /// Signed wrapped difference `∠(self − other)` in `[-π, π)`.
    pub fn diff(self, other: AngleRad) -> f64 {
        AngleRad::wrap(self.0 - other.0).0
    }

    /// Shortest angular distance, in `[0, π]`.
    pub fn distance(self, other: AngleRad) -> f64 {
        self.diff(other).abs()
    }
}

impl fmt::Display for AngleRad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

impl<'de> Deserialize<'de> for AngleRad {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = f64::deserialize(d)?;
        normalize_angle(a).map_err(serde::de::Error::custom)
    }
}

/// `(a + π) mod 2π − π` with a non-negative modulo.
pub fn normalize_angle(a: f64) -> Result<AngleRad> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("cannot normalize non-finite angle {a}")));
    }
    Ok(AngleRad::wrap(a))
}

/// World-frame direction from `from` to `to`.
pub fn bearing(from: Vec2, to: Vec2) -> Result<AngleRad> {
    let rel = to - from;
    if rel.norm_sq() == 0.0 {
        return Err(Error::DegenerateGeometry("bearing between coincident points"));
    }
    Ok(AngleRad::wrap(rel.y.atan2(rel.x)))
}

/// Rate of change of the bearing from `p_i` to `p_j` given both velocities.
///
/// Equal to `((p_j − p_i) × (v_j − v_i)) / ‖p_j − p_i‖²`; swapping the two
/// airplanes negates both factors, so the value is the same from either side.
pub fn bearing_rate(p_i: Vec2, p_j: Vec2, v_i: Vec2, v_j: Vec2) -> Result<f64> {
    let rel = p_j - p_i;
    let d2 = rel.norm_sq();
    if d2 == 0.0 {
        return Err(Error::DegenerateGeometry("bearing rate between coincident points"));
    }
    Ok(rel.cross(v_j - v_i) / d2)
}

/// How commanded headings reach the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingMode {
    /// The heading snaps to the command every step.
    #[default]
    Direct,
    /// First-order tracking `θ̇ = −k·∠(θ − θ_cmd)` without feedforward.
    Tracked { k: f64 },
}

/// Kinematic and decision state of one airplane.
#[derive(Debug, Clone, PartialEq)]
pub struct AirplaneState {
    pub id: u32,
    pub position: Vec2,
    pub heading: AngleRad,
    pub goal: Vec2,
    pub desired_heading: AngleRad,
    pub nominal_heading: AngleRad,
    pub safe_heading: AngleRad,
    pub opinion: f64,
    pub attention: f64,
    pub mode: ModeLabel,
}

impl AirplaneState {
    pub fn new(id: u32, position: Vec2, heading: AngleRad, goal: Vec2) -> Self {
        Self {
            id,
            position,
            heading,
            goal,
            desired_heading: heading,
            nominal_heading: heading,
            safe_heading: heading,
            opinion: 0.0,
            attention: 0.0,
            mode: ModeLabel::Cruising,
        }
    }

    /// Velocity implied by the last commanded safe heading.
    pub fn commanded_velocity(&self, speed: f64) -> Vec2 {
        Vec2::from_angle(self.safe_heading) * speed
    }
}

/// Advances one airplane by a single explicit Euler step at constant speed.
pub fn integrate_position(
    state: &AirplaneState,
    commanded_heading: AngleRad,
    dt: f64,
    speed: f64,
    mode: HeadingMode,
) -> AirplaneState {
    debug_assert!(dt > 0.0);
    let heading = match mode {
        HeadingMode::Direct => commanded_heading,
        HeadingMode::Tracked { k } => {
            let err = state.heading.diff(commanded_heading);
            state.heading.offset(-k * err * dt)
        }
    };
    let mut next = state.clone();
    next.heading = heading;
    next.position += Vec2::from_angle(heading) * (speed * dt);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(0.0).unwrap().value(), 0.0);
        assert!((normalize_angle(1.5 * PI).unwrap().value() + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(normalize_angle(PI).unwrap().value(), -PI);
        assert_eq!(normalize_angle(-PI).unwrap().value(), -PI);
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn tiny_negative_stays_in_range() {
        let a = AngleRad::wrap(-1e-18);
        assert!(a.value() >= -PI && a.value() < PI);
    }

    #[test]
    fn bearing_examples() {
        let b = |a: [f64; 2], c: [f64; 2]| bearing(a.into(), c.into()).unwrap().value();
        assert_eq!(b([0.0, 0.0], [1.0, 0.0]), 0.0);
        assert!((b([0.0, 0.0], [0.0, 2.0]) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(b([1.0, 1.0], [0.0, 1.0]), -PI);
        assert!(matches!(
            bearing(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn bearing_rate_examples() {
        let r = bearing_rate(
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            Vec2::ZERO,
            Vec2::new(0.0, 1.0),
        )
        .unwrap();
        assert_eq!(r, 1.0);
        let parallel = bearing_rate(
            Vec2::ZERO,
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(-3.0, -2.0),
        )
        .unwrap();
        assert!(parallel.abs() < 1e-15);
        assert!(bearing_rate(Vec2::ZERO, Vec2::ZERO, Vec2::ZERO, Vec2::ZERO).is_err());
    }

    #[test]
    fn integrate_examples() {
        let s = AirplaneState::new(1, Vec2::ZERO, AngleRad::ZERO, Vec2::new(5.0, 0.0));
        let n = integrate_position(&s, AngleRad::ZERO, 0.01, 1.0, HeadingMode::Direct);
        assert_eq!(n.position, Vec2::new(0.01, 0.0));

        let up = AngleRad::wrap(FRAC_PI_2);
        let n = integrate_position(&s, up, 1.0, 1.0, HeadingMode::Direct);
        assert!(n.position.x.abs() < 1e-15 && (n.position.y - 1.0).abs() < 1e-15);

        let n = integrate_position(
            &s,
            AngleRad::wrap(0.1),
            0.01,
            1.0,
            HeadingMode::Tracked { k: 50.0 },
        );
        assert!((n.heading.value() - 0.05).abs() < 1e-15);
        let step = n.position;
        assert!((step.x - 0.01 * 0.05f64.cos()).abs() < 1e-15);
        assert!((step.y - 0.01 * 0.05f64.sin()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn normalize_is_periodic(a in -50.0f64..50.0, k in -1000i32..=1000) {
            let base = normalize_angle(a).unwrap();
            let shifted = normalize_angle(a + TAU * k as f64).unwrap();
            prop_assert!(base.distance(shifted) < 1e-9);
            prop_assert!(shifted.value() >= -PI && shifted.value() < PI);
        }

        #[test]
        fn bearing_antisymmetry(
            x1 in -1e3f64..1e3, y1 in -1e3f64..1e3,
            x2 in -1e3f64..1e3, y2 in -1e3f64..1e3,
        ) {
            let (p, q) = (Vec2::new(x1, y1), Vec2::new(x2, y2));
            prop_assume!(p.distance(q) > 1e-6);
            let fwd = bearing(p, q).unwrap();
            let back = bearing(q, p).unwrap().offset(PI);
            prop_assert!(fwd.distance(back) < 1e-12);
            prop_assert!((Vec2::from_angle(fwd) - (q - p) * (1.0 / p.distance(q))).norm() < 1e-9);
        }

        #[test]
        fn bearing_rate_is_symmetric(
            x1 in -100.0f64..100.0, y1 in -100.0f64..100.0,
            x2 in -100.0f64..100.0, y2 in -100.0f64..100.0,
            a1 in -PI..PI, a2 in -PI..PI,
        ) {
            let (p, q) = (Vec2::new(x1, y1), Vec2::new(x2, y2));
            prop_assume!(p.distance(q) > 1e-6);
            let v1 = Vec2::from_angle(AngleRad::wrap(a1));
            let v2 = Vec2::from_angle(AngleRad::wrap(a2));
            prop_assert_eq!(bearing_rate(p, q, v1, v2).unwrap(), bearing_rate(q, p, v2, v1).unwrap());
        }

        #[test]
        fn direct_step_has_constant_speed(
            x in -1e3f64..1e3, y in -1e3f64..1e3, a in -PI..PI,
            dt in 1e-4f64..0.5, v in 0.1f64..10.0,
        ) {
            let s = AirplaneState::new(0, Vec2::new(x, y), AngleRad::ZERO, Vec2::ZERO);
            let n = integrate_position(&s, AngleRad::wrap(a), dt, v, HeadingMode::Direct);
            let moved = s.position.distance(n.position);
            // absolute slack covers cancellation when |p| ≫ v·dt
            prop_assert!((moved - v * dt).abs() <= 1e-12 * v * dt + 4.0 * f64::EPSILON * (x.abs() + y.abs()));
        }
    }
}
