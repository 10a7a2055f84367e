//! Rigid-body model of the two-link planar arm.
//!
//! The equations of motion are
//!
//! ```text
//! M(q) q̈ + N(q, q̇) + G(q) = τ
//! ```
//!
//! where `N` is the Coriolis/centrifugal *force* vector (it already contains
//! the velocity products, so it is not multiplied by `q̇` again).
//!
//! Two Coriolis variants are provided, see [`CoriolisMode`].

use serde::{Deserialize, Serialize};

use crate::{Error, Mat2, Result, Vec2};

/// Reciprocal 1-norm condition number below which the mass matrix is
/// treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Physical constants of the arm, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Mass of link 1 (kg).
    pub m1: f64,
    /// Mass of link 2 (kg).
    pub m2: f64,
    /// Length of link 1 (m).
    pub l1: f64,
    /// Length of link 2 (m).
    pub l2: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

impl Default for RobotParams {
    /// Shoulder/elbow arm of the reference experiment: 320 mm and 360 mm links,
    /// 386 g and 722 g.
    fn default() -> Self {
        Self {
            m1: 0.386,
            m2: 0.722,
            l1: 0.32,
            l2: 0.36,
            gravity: 9.81,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("l1", self.l1),
            ("l2", self.l2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "gravity must be >= 0, got {}",
                self.gravity
            )));
        }
        Ok(())
    }

    /// Copy with every mass and length scaled by `1 + delta`. Used to give the
    /// plant different parameters from the controller's nominal model.
    pub fn perturbed(&self, delta: f64) -> Self {
        let k = 1.0 + delta;
        Self {
            m1: self.m1 * k,
            m2: self.m2 * k,
            l1: self.l1 * k,
            l2: self.l2 * k,
            gravity: self.gravity,
        }
    }

    // (m1 + m2) l1², m2 l1 l2, m2 l2²
    fn inertia_terms(&self) -> (f64, f64, f64) {
        (
            (self.m1 + self.m2) * self.l1 * self.l1,
            self.m2 * self.l1 * self.l2,
            self.m2 * self.l2 * self.l2,
        )
    }
}

/// Joint positions and velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    /// Joint angles θ₁, θ₂ (rad).
    pub q: Vec2,
    /// Joint velocities (rad/s).
    pub qdot: Vec2,
}

impl JointState {
    pub fn new(q: Vec2, qdot: Vec2) -> Self {
        Self { q, qdot }
    }

    pub fn at_rest(q: Vec2) -> Self {
        Self { q, qdot: Vec2::zeros() }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

/// Which Coriolis/centrifugal vector to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoriolisMode {
    /// The published vector, second row `−m2 l1 l2 sin θ₂ θ̇₁θ̇₂`.
    #[default]
    Paper,
    /// Derived from `M(q)` through Christoffel symbols; second row
    /// `+m2 l1 l2 sin θ₂ θ̇₁²`. Energy-consistent.
    Christoffel,
}

/// Energy split of a [`JointState`] (J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Inertia matrix `M(q)`. Symmetric, and positive definite for valid params.
pub fn mass_matrix(p: &RobotParams, q: &Vec2) -> Mat2 {
    let (a, b, d) = p.inertia_terms();
    let c2 = q[1].cos();
    let m11 = a + d + 2.0 * b * c2;
    let m12 = d + b * c2;
    Mat2::new(m11, m12, m12, d)
}

/// Coriolis/centrifugal force vector `N(q, q̇)` (N·m).
pub fn coriolis_vector(p: &RobotParams, s: &JointState, mode: CoriolisMode) -> Vec2 {
    let (_, b, _) = p.inertia_terms();
    let h = b * s.q[1].sin();
    let (w1, w2) = (s.qdot[0], s.qdot[1]);
    let first = -h * (2.0 * w1 * w2 + w2 * w2);
    let second = match mode {
        CoriolisMode::Paper => -h * w1 * w2,
        CoriolisMode::Christoffel => h * w1 * w1,
    };
    Vec2::new(first, second)
}

/// Christoffel Coriolis matrix `C(q, q̇)` with `C q̇` equal to the
/// [`CoriolisMode::Christoffel`] vector.
pub fn christoffel_matrix(p: &RobotParams, s: &JointState) -> Mat2 {
    let (_, b, _) = p.inertia_terms();
    let h = -b * s.q[1].sin();
    let (w1, w2) = (s.qdot[0], s.qdot[1]);
    Mat2::new(h * w2, h * (w1 + w2), -h * w1, 0.0)
}

/// Gravity torque vector `G(q)` (N·m).
pub fn gravity_vector(p: &RobotParams, q: &Vec2) -> Vec2 {
    let g = p.gravity;
    let s1 = q[0].sin();
    let s12 = (q[0] + q[1]).sin();
    let outer = -p.m2 * g * p.l2 * s12;
    Vec2::new(-(p.m1 + p.m2) * g * p.l1 * s1 + outer, outer)
}

/// Reciprocal condition number of `m` in the 1-norm, or 0 if it has no inverse.
pub fn reciprocal_condition(m: &Mat2) -> f64 {
    let norm1 = |a: &Mat2| {
        (0..2)
            .map(|j| a[(0, j)].abs() + a[(1, j)].abs())
            .fold(0.0, f64::max)
    };
    match m.try_inverse() {
        Some(inv) => {
            let denom = norm1(m) * norm1(&inv);
            if denom.is_finite() && denom > 0.0 {
                1.0 / denom
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// Inverse of the mass matrix, failing with [`Error::SingularMass`] if it is
/// too ill-conditioned to trust.
pub fn inverse_mass_matrix(p: &RobotParams, q: &Vec2) -> Result<Mat2> {
    let m = mass_matrix(p, q);
    let rcond = reciprocal_condition(&m);
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::SingularMass { rcond });
    }
    m.try_inverse().ok_or(Error::SingularMass { rcond })
}

/// Joint accelerations `q̈ = M⁻¹(τ − N − G) + d`, with `d` a lumped
/// acceleration-level disturbance.
pub fn forward_dynamics(
    p: &RobotParams,
    s: &JointState,
    tau: &Vec2,
    d: &Vec2,
    mode: CoriolisMode,
) -> Result<Vec2> {
    let m_inv = inverse_mass_matrix(p, &s.q)?;
    let rhs = tau - coriolis_vector(p, s, mode) - gravity_vector(p, &s.q);
    Ok(m_inv * rhs + d)
}

/// Joint torques `τ = M q̈ + N + G`.
pub fn inverse_dynamics(p: &RobotParams, s: &JointState, qddot: &Vec2, mode: CoriolisMode) -> Vec2 {
    mass_matrix(p, &s.q) * qddot + coriolis_vector(p, s, mode) + gravity_vector(p, &s.q)
}

/// Kinetic `½ q̇ᵀ M q̇` and potential `(m1+m2) g l1 cos θ₁ + m2 g l2 cos(θ₁+θ₂)`.
///
/// The potential is the one whose gradient is `G(q)`, so the gravity
/// generalized force is `−∇V`.
pub fn energy(p: &RobotParams, s: &JointState) -> Energy {
    let m = mass_matrix(p, &s.q);
    let kinetic = 0.5 * s.qdot.dot(&(m * s.qdot));
    let g = p.gravity;
    let potential = (p.m1 + p.m2) * g * p.l1 * s.q[0].cos() + p.m2 * g * p.l2 * (s.q[0] + s.q[1]).cos();
    Energy { kinetic, potential }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p() -> RobotParams {
        RobotParams::default()
    }

    #[test]
    fn mass_matrix_reference_values() {
        let m = mass_matrix(&p(), &Vec2::new(0.0, 0.0));
        assert_abs_diff_eq!(m[(0, 0)], 0.3733792, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(0, 1)], 0.1767456, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(1, 0)], 0.1767456, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(1, 1)], 0.0935712, epsilon = 1e-12);

        let m = mass_matrix(&p(), &Vec2::new(0.3, FRAC_PI_2));
        assert_abs_diff_eq!(m[(0, 1)], 0.0935712, epsilon = 1e-12);
        for t2 in [-2.0, 0.1, 1.7] {
            assert_eq!(mass_matrix(&p(), &Vec2::new(0.0, t2))[(1, 1)], 0.722 * 0.36 * 0.36);
        }
    }

    #[test]
    fn coriolis_zero_cases() {
        for mode in [CoriolisMode::Paper, CoriolisMode::Christoffel] {
            let rest = JointState::at_rest(Vec2::new(0.4, 1.1));
            assert_eq!(coriolis_vector(&p(), &rest, mode), Vec2::zeros());
            let straight = JointState::new(Vec2::zeros(), Vec2::new(2.0, -3.0));
            assert_eq!(coriolis_vector(&p(), &straight, mode), Vec2::zeros());
        }
    }

    #[test]
    fn coriolis_published_reference_value() {
        let s = JointState::new(Vec2::new(0.0, FRAC_PI_2), Vec2::new(1.0, 1.0));
        let n = coriolis_vector(&p(), &s, CoriolisMode::Paper);
        assert_abs_diff_eq!(n[0], -0.2495232, epsilon = 1e-12);
        assert_abs_diff_eq!(n[1], -0.0831744, epsilon = 1e-12);
        // Christoffel differs only in the second row.
        let c = coriolis_vector(&p(), &s, CoriolisMode::Christoffel);
        assert_eq!(c[0], n[0]);
        assert_abs_diff_eq!(c[1], 0.0831744, epsilon = 1e-12);
    }

    #[test]
    fn christoffel_matrix_matches_vector() {
        let s = JointState::new(Vec2::new(0.2, -0.9), Vec2::new(1.3, -0.4));
        let via_matrix = christoffel_matrix(&p(), &s) * s.qdot;
        let direct = coriolis_vector(&p(), &s, CoriolisMode::Christoffel);
        assert_abs_diff_eq!(via_matrix, direct, epsilon = 1e-15);
    }

    #[test]
    fn gravity_reference_values() {
        assert_eq!(gravity_vector(&p(), &Vec2::zeros()), Vec2::zeros());
        let g = gravity_vector(&p(), &Vec2::new(FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(g[0], -6.0280488, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], -2.5498152, epsilon = 1e-12);
        let g = gravity_vector(&p(), &Vec2::new(PI, 0.0));
        assert_abs_diff_eq!(g, Vec2::zeros(), epsilon = 1e-14);
    }

    #[test]
    fn gravity_is_compensated_at_rest() {
        let s = JointState::at_rest(Vec2::zeros());
        let tau = gravity_vector(&p(), &s.q);
        let a = forward_dynamics(&p(), &s, &tau, &Vec2::zeros(), CoriolisMode::Paper).unwrap();
        assert_eq!(a, Vec2::zeros());
    }

    #[test]
    fn disturbance_is_additive() {
        let s = JointState::new(Vec2::new(0.7, -0.3), Vec2::new(0.5, 2.0));
        let tau = Vec2::new(0.1, -0.2);
        let d = Vec2::new(1.0, 2.0);
        let base = forward_dynamics(&p(), &s, &tau, &Vec2::zeros(), CoriolisMode::Paper).unwrap();
        let with = forward_dynamics(&p(), &s, &tau, &d, CoriolisMode::Paper).unwrap();
        assert_abs_diff_eq!(with - base, d, epsilon = 1e-12);
    }

    #[test]
    fn inverse_dynamics_reference_values() {
        let rest = JointState::at_rest(Vec2::zeros());
        assert_eq!(
            inverse_dynamics(&p(), &rest, &Vec2::zeros(), CoriolisMode::Paper),
            Vec2::zeros()
        );
        let tau = inverse_dynamics(&p(), &rest, &Vec2::new(1.0, 0.0), CoriolisMode::Paper);
        assert_abs_diff_eq!(tau[0], 0.3733792, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[1], 0.1767456, epsilon = 1e-12);
    }

    #[test]
    fn energy_reference_values() {
        let e = energy(&p(), &JointState::at_rest(Vec2::zeros()));
        assert_eq!(e.kinetic, 0.0);
        assert_abs_diff_eq!(e.potential, 6.0280488, epsilon = 1e-12);

        let s = JointState::new(Vec2::new(0.3, 0.8), Vec2::new(1.5, -2.5));
        let flipped = JointState::new(s.q, -s.qdot);
        assert_eq!(energy(&p(), &s).kinetic, energy(&p(), &flipped).kinetic);
        assert!(energy(&p(), &s).kinetic > 0.0);
    }

    #[test]
    fn rejects_invalid_params() {
        let mut bad = p();
        bad.m1 = -0.1;
        assert!(matches!(bad.validate(), Err(Error::InvalidParams(_))));
        let mut bad = p();
        bad.gravity = -1.0;
        assert!(bad.validate().is_err());
        assert!(p().validate().is_ok());
    }

    #[test]
    fn singular_mass_is_reported() {
        // A massless second link makes the second row of M vanish.
        let degenerate = RobotParams { m2: 0.0, ..p() };
        let s = JointState::default();
        let err = forward_dynamics(&degenerate, &s, &Vec2::zeros(), &Vec2::zeros(), CoriolisMode::Paper);
        assert!(matches!(err, Err(Error::SingularMass { .. })));
    }
}
