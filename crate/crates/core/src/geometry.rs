//! Planar pose kinematics, rigid-body transforms and phase-rotation path integration.
//!
//! Poses live in an allocentric frame; motor commands are egocentric. Headings are
//! kept reduced to `[0, 2π)` after every update.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Counter-clockwise rotation matrix `R(angle)`.
pub fn rotation_of(angle: f64) -> Result<Matrix2<f64>> {
    if !angle.is_finite() {
        return Err(Error::invalid(format!("rotation angle must be finite, got {angle}")));
    }
    Ok(rotation_unchecked(angle))
}

#[inline]
pub(crate) fn rotation_unchecked(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) || !heading.is_finite() {
            return Err(Error::invalid("pose components must be finite"));
        }
        Ok(Pose {
            position,
            heading: wrap_angle(heading),
        })
    }

    pub fn origin() -> Self {
        Pose {
            position: Vec2::zeros(),
            heading: 0.0,
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }
}

/// Egocentric translational velocity and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorCommand {
    pub linear_velocity: Vec2,
    pub angular_velocity: f64,
}

impl MotorCommand {
    pub fn new(linear_velocity: Vec2, angular_velocity: f64) -> Result<Self> {
        if !linear_velocity.iter().all(|v| v.is_finite()) || !angular_velocity.is_finite() {
            return Err(Error::invalid("motor command components must be finite"));
        }
        Ok(MotorCommand {
            linear_velocity,
            angular_velocity,
        })
    }
}

/// One Euler step of the path-integration dynamics.
///
/// The displacement is rotated by the heading *before* the step; the heading is
/// advanced afterwards.
pub fn step_pose(p: &Pose, u: &MotorCommand, dt: f64) -> Result<Pose> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be positive and finite, got {dt}")));
    }
    let rot = rotation_unchecked(p.heading);
    let position = p.position + rot * u.linear_velocity * dt;
    let heading = wrap_angle(p.heading + u.angular_velocity * dt);
    Pose::new(position, heading)
}

/// Left fold of [`step_pose`] over `commands`; returns the final pose.
pub fn integrate_path(p0: &Pose, commands: &[MotorCommand], dt: f64) -> Result<Pose> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be positive and finite, got {dt}")));
    }
    commands.iter().try_fold(*p0, |p, u| step_pose(&p, u, dt))
}

/// Element of SE(2): rotate by `rotation_angle` about the origin, then translate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub translation: Vec2,
    rotation_angle: f64,
}

impl RigidTransform {
    pub fn new(translation: Vec2, rotation_angle: f64) -> Self {
        RigidTransform {
            translation,
            rotation_angle: wrap_angle(rotation_angle),
        }
    }

    pub fn identity() -> Self {
        Self::new(Vec2::zeros(), 0.0)
    }

    pub fn rotation_angle(&self) -> f64 {
        self.rotation_angle
    }

    pub fn inverse(&self) -> Self {
        let back = rotation_unchecked(-self.rotation_angle);
        Self::new(-(back * self.translation), -self.rotation_angle)
    }
}

pub fn apply_rigid(g: &RigidTransform, p: &Pose) -> Pose {
    let rot = rotation_unchecked(g.rotation_angle);
    Pose {
        position: rot * p.position + g.translation,
        heading: wrap_angle(p.heading + g.rotation_angle),
    }
}

/// A spatial frequency `q = magnitude · direction` with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    direction: Vec2,
    magnitude: f64,
}

impl FrequencyVector {
    pub const UNIT_TOLERANCE: f64 = 1e-12;

    pub fn new(direction: Vec2, magnitude: f64) -> Result<Self> {
        if !(magnitude > 0.0) || !magnitude.is_finite() {
            return Err(Error::invalid(format!(
                "frequency magnitude must be positive, got {magnitude}"
            )));
        }
        if (direction.norm() - 1.0).abs() > Self::UNIT_TOLERANCE {
            return Err(Error::invalid(format!(
                "frequency direction must be a unit vector, |u| = {}",
                direction.norm()
            )));
        }
        Ok(FrequencyVector { direction, magnitude })
    }

    /// Direction given as an angle from the +x axis.
    pub fn from_angle(angle: f64, magnitude: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(Vec2::new(c, s), magnitude)
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn vector(&self) -> Vec2 {
        self.direction * self.magnitude
    }

    /// Phase advance `q · dr` for a displacement.
    pub fn phase(&self, dr: &Vec2) -> f64 {
        self.vector().dot(dr)
    }
}

/// Two-dimensional latent subspace rotated by displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub y: Vec2,
}

impl PhaseState {
    pub fn new(y: Vec2) -> Self {
        PhaseState { y }
    }

    /// The canonical start `(1, 0)`.
    pub fn unit() -> Self {
        PhaseState { y: Vec2::new(1.0, 0.0) }
    }

    pub fn norm(&self) -> f64 {
        self.y.norm()
    }
}

/// `y' = R(q · dr) y`.
pub fn phase_step(y: &PhaseState, q: &FrequencyVector, dr: &Vec2) -> PhaseState {
    PhaseState {
        y: rotation_unchecked(q.phase(dr)) * y.y,
    }
}

/// Phase reached from `(1, 0)` after a net displacement: `(cos φ, sin φ)` with `φ = q · R`.
pub fn phase_closed_form(q: &FrequencyVector, net_displacement: &Vec2) -> PhaseState {
    let (s, c) = q.phase(net_displacement).sin_cos();
    PhaseState { y: Vec2::new(c, s) }
}
