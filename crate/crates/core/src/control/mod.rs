//! Sliding-mode control laws.
//!
//! All three controllers work at acceleration level: they build a command
//! `U = q̈_d + feedback + reaching (+ hybrid correction) + M⁻¹(N + G)` from the
//! controller's *nominal* model and map it to torque as `τ = M(q)·U`. The
//! disturbance estimate inside the equivalent control is taken as zero; the
//! reaching term is what copes with the real one.
//!
//! Errors follow `e = q_d − q`, `ė = q̇_d − q̇`.

mod gains;
mod switching;

use serde::{Deserialize, Serialize};

pub use gains::{validate_gains, Diag2, GainWarning, HybridGains, NismcGains, SmcGains};
pub use switching::{sign, switch, ReachingArg, SwitchConfig, SwitchKind};

use crate::dynamics::{
    coriolis_vector, gravity_vector, mass_matrix, reciprocal_condition, CoriolisMode, JointState,
    RobotParams, SINGULAR_RCOND,
};
use crate::{Error, Result, Vec2};

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RefPoint {
    pub q: Vec2,
    pub qdot: Vec2,
    pub qddot: Vec2,
}

impl RefPoint {
    /// Reference sitting still at `q`.
    pub fn hold(q: Vec2) -> Self {
        Self {
            q,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingError {
    /// `q_d − q` (rad).
    pub e: Vec2,
    /// `q̇_d − q̇` (rad/s).
    pub edot: Vec2,
}

impl TrackingError {
    pub fn new(e: Vec2, edot: Vec2) -> Self {
        Self { e, edot }
    }

    pub fn between(r: &RefPoint, s: &JointState) -> Self {
        Self {
            e: r.q - s.q,
            edot: r.qdot - s.qdot,
        }
    }
}

/// Running value of `∫₀ᵗ (αe + βė) dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegralState {
    pub z: Vec2,
    pub t_last: f64,
}

/// Explicit rectangle step: `z ← z + dt·(αe + βė)`. No clamping.
pub fn integral_update(st: &IntegralState, err: &TrackingError, g: &NismcGains, dt: f64) -> IntegralState {
    debug_assert!(dt > 0.0);
    let rate = g.alpha.apply(&err.e) + g.beta.apply(&err.edot);
    IntegralState {
        z: st.z + rate * dt,
        t_last: st.t_last + dt,
    }
}

/// `σ = ė + λe`.
pub fn smc_surface(err: &TrackingError, g: &SmcGains) -> Vec2 {
    err.edot + g.lambda.apply(&err.e)
}

/// `σ = ė + z`.
pub fn nismc_surface(err: &TrackingError, st: &IntegralState) -> Vec2 {
    err.edot + st.z
}

fn reaching_term(gamma: &Diag2, err: &TrackingError, sigma: &Vec2, sw: &SwitchConfig) -> Vec2 {
    let arg = match sw.reaching {
        ReachingArg::Error => &err.e,
        ReachingArg::Sigma => sigma,
    };
    gamma.apply(&switch(arg, sw))
}

/// Model-free part of the SMC acceleration command: `q̈_d + λė + Γ·switch(·)`.
pub fn smc_command(r: &RefPoint, err: &TrackingError, g: &SmcGains, sw: &SwitchConfig) -> Vec2 {
    let sigma = smc_surface(err, g);
    r.qddot + g.lambda.apply(&err.edot) + reaching_term(&g.gamma, err, &sigma, sw)
}

/// Model-free part of the NISMC acceleration command: `q̈_d + αe + βė + Γ·switch(·)`.
pub fn nismc_command(
    r: &RefPoint,
    err: &TrackingError,
    st: &IntegralState,
    g: &NismcGains,
    sw: &SwitchConfig,
) -> Vec2 {
    let sigma = nismc_surface(err, st);
    r.qddot + g.alpha.apply(&err.e) + g.beta.apply(&err.edot) + reaching_term(&g.gamma, err, &sigma, sw)
}

/// Hybrid correction `u_H = −ξ₁·switch(e) − ξ₂·switch(ė)`.
pub fn hybrid_correction(err: &TrackingError, g: &HybridGains, sw: &SwitchConfig) -> Vec2 {
    -g.xi1.apply(&switch(&err.e, sw)) - g.xi2.apply(&switch(&err.edot, sw))
}

/// Model-free part of the HNISMC acceleration command.
pub fn hnismc_command(
    r: &RefPoint,
    err: &TrackingError,
    st: &IntegralState,
    g: &HybridGains,
    sw: &SwitchConfig,
) -> Vec2 {
    let mut u = nismc_command(r, err, st, &g.base, sw);
    let correction = hybrid_correction(err, g, sw);
    // Zero corrections are skipped so that ξ = 0 reproduces NISMC bit for bit.
    for i in 0..2 {
        if correction[i] != 0.0 {
            u[i] += correction[i];
        }
    }
    u
}

/// Maps a model-free acceleration command `a` to torque through the nominal
/// model: `τ = M(q)·(a + M⁻¹(N + G)) = M a + N + G`.
pub fn model_torque(p: &RobotParams, s: &JointState, command: &Vec2, mode: CoriolisMode) -> Result<Vec2> {
    let m = mass_matrix(p, &s.q);
    let rcond = reciprocal_condition(&m);
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::SingularMass { rcond });
    }
    Ok(m * command + coriolis_vector(p, s, mode) + gravity_vector(p, &s.q))
}

/// Conventional sliding-mode control torque.
pub fn smc_control(
    p: &RobotParams,
    s: &JointState,
    r: &RefPoint,
    g: &SmcGains,
    sw: &SwitchConfig,
    mode: CoriolisMode,
) -> Result<Vec2> {
    let err = TrackingError::between(r, s);
    model_torque(p, s, &smc_command(r, &err, g, sw), mode)
}

/// Integral sliding-mode control torque. `st` is owned by the caller and
/// advanced with [`integral_update`].
#[allow(clippy::too_many_arguments)]
pub fn nismc_control(
    p: &RobotParams,
    s: &JointState,
    r: &RefPoint,
    st: &IntegralState,
    err: &TrackingError,
    g: &NismcGains,
    sw: &SwitchConfig,
    mode: CoriolisMode,
) -> Result<Vec2> {
    model_torque(p, s, &nismc_command(r, err, st, g, sw), mode)
}

/// Hybrid integral sliding-mode control torque.
#[allow(clippy::too_many_arguments)]
pub fn hnismc_control(
    p: &RobotParams,
    s: &JointState,
    r: &RefPoint,
    st: &IntegralState,
    err: &TrackingError,
    g: &HybridGains,
    sw: &SwitchConfig,
    mode: CoriolisMode,
) -> Result<Vec2> {
    model_torque(p, s, &hnismc_command(r, err, st, g, sw), mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Smc,
    Nismc,
    Hnismc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Smc, ControllerKind::Nismc, ControllerKind::Hnismc];

    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Smc => "smc",
            ControllerKind::Nismc => "nismc",
            ControllerKind::Hnismc => "hnismc",
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smc" => Ok(ControllerKind::Smc),
            "nismc" => Ok(ControllerKind::Nismc),
            "hnismc" => Ok(ControllerKind::Hnismc),
            other => Err(format!("unknown controller '{other}', expected one of smc, nismc, hnismc")),
        }
    }
}

/// Gains for every controller, so one configuration can drive all three.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GainSet {
    pub smc: SmcGains,
    pub nismc: NismcGains,
    pub hnismc: HybridGains,
}

/// Output of one controller tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSample {
    pub tau: Vec2,
    pub sigma: Vec2,
}

/// Stateful wrapper around the three control laws, as used by the
/// simulation loop.
#[derive(Debug, Clone)]
pub struct Controller {
    kind: ControllerKind,
    gains: GainSet,
    switch: SwitchConfig,
    integral: IntegralState,
}

impl Controller {
    pub fn new(kind: ControllerKind, gains: GainSet, switch: SwitchConfig) -> Self {
        Self {
            kind,
            gains,
            switch,
            integral: IntegralState::default(),
        }
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn integral(&self) -> &IntegralState {
        &self.integral
    }

    /// Sliding variable of the active surface for `err`, using the current
    /// integral state.
    pub fn sigma(&self, err: &TrackingError) -> Vec2 {
        self.sigma_with(err, &self.integral)
    }

    /// Like [`Controller::sigma`] with an explicit integral state.
    pub fn sigma_with(&self, err: &TrackingError, integral: &IntegralState) -> Vec2 {
        match self.kind {
            ControllerKind::Smc => smc_surface(err, &self.gains.smc),
            ControllerKind::Nismc | ControllerKind::Hnismc => nismc_surface(err, integral),
        }
    }

    /// Computes the torque for `measured` against `r`, then advances the
    /// integral surface by `dt` (left rectangle, so `z(0) = 0` is used at the
    /// first tick).
    pub fn step(
        &mut self,
        p: &RobotParams,
        measured: &JointState,
        r: &RefPoint,
        dt: f64,
        mode: CoriolisMode,
    ) -> Result<ControlSample> {
        let err = TrackingError::between(r, measured);
        let sigma = self.sigma(&err);
        let sw = &self.switch;
        let tau = match self.kind {
            ControllerKind::Smc => smc_control(p, measured, r, &self.gains.smc, sw, mode)?,
            ControllerKind::Nismc => {
                nismc_control(p, measured, r, &self.integral, &err, &self.gains.nismc, sw, mode)?
            }
            ControllerKind::Hnismc => {
                hnismc_control(p, measured, r, &self.integral, &err, &self.gains.hnismc, sw, mode)?
            }
        };
        let integral_gains = match self.kind {
            ControllerKind::Smc => None,
            ControllerKind::Nismc => Some(&self.gains.nismc),
            ControllerKind::Hnismc => Some(&self.gains.hnismc.base),
        };
        if let Some(g) = integral_gains {
            self.integral = integral_update(&self.integral, &err, g, dt);
        }
        Ok(ControlSample { tau, sigma })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::inverse_dynamics;
    use approx::assert_abs_diff_eq;

    fn p() -> RobotParams {
        RobotParams::default()
    }

    #[test]
    fn smc_surface_examples() {
        let g = SmcGains::default();
        assert_eq!(smc_surface(&TrackingError::default(), &g), Vec2::zeros());
        let s = smc_surface(&TrackingError::new(Vec2::new(0.1, 0.0), Vec2::zeros()), &g);
        assert_abs_diff_eq!(s, Vec2::new(5.0, 0.0), epsilon = 1e-12);
        let s = smc_surface(&TrackingError::new(Vec2::new(0.02, -0.01), Vec2::new(-1.0, 0.5)), &g);
        assert_abs_diff_eq!(s, Vec2::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn integral_update_examples() {
        let g = NismcGains::default();
        let st = IntegralState::default();
        let same = integral_update(&st, &TrackingError::default(), &g, 0.001);
        assert_eq!(same.z, st.z);
        assert_abs_diff_eq!(same.t_last, 0.001);

        let one = integral_update(&st, &TrackingError::new(Vec2::new(1.0, 0.0), Vec2::zeros()), &g, 0.001);
        assert_abs_diff_eq!(one.z, Vec2::new(0.05, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn integral_update_is_linear_in_steps() {
        let g = NismcGains::default();
        let err = TrackingError::new(Vec2::new(0.25, -0.5), Vec2::new(0.125, 0.0625));
        let dt = 0.001;
        let n = 1000;
        let mut st = IntegralState::default();
        for _ in 0..n {
            st = integral_update(&st, &err, &g, dt);
        }
        let expected = (g.alpha.apply(&err.e) + g.beta.apply(&err.edot)) * (n as f64 * dt);
        assert_abs_diff_eq!(st.z, expected, epsilon = 1e-9);
    }

    #[test]
    fn nismc_surface_examples() {
        let st = IntegralState::default();
        assert_eq!(nismc_surface(&TrackingError::default(), &st), Vec2::zeros());
        let st = IntegralState {
            z: Vec2::new(0.5, 0.5),
            t_last: 0.0,
        };
        let s = nismc_surface(&TrackingError::new(Vec2::zeros(), Vec2::new(1.0, -1.0)), &st);
        assert_eq!(s, Vec2::new(1.5, -0.5));
    }

    #[test]
    fn constant_error_integral_grows_linearly() {
        let g = NismcGains::default();
        let e0 = Vec2::new(0.01, -0.02);
        let err = TrackingError::new(e0, Vec2::zeros());
        let dt = 1.25e-3;
        let mut st = IntegralState::default();
        for _ in 0..800 {
            st = integral_update(&st, &err, &g, dt);
        }
        let t = 800.0 * dt;
        assert_abs_diff_eq!(nismc_surface(&err, &st), g.alpha.apply(&e0) * t, epsilon = 1e-12);
    }

    #[test]
    fn on_surface_gives_gravity_compensation() {
        let q = Vec2::new(0.6, 0.0);
        let s = JointState::at_rest(q);
        let r = RefPoint::hold(q);
        let sw = SwitchConfig::default();
        let mode = CoriolisMode::Paper;
        let g = gravity_vector(&p(), &q);
        let smc = smc_control(&p(), &s, &r, &SmcGains::default(), &sw, mode).unwrap();
        assert_abs_diff_eq!(smc, g, epsilon = 1e-14);
        let err = TrackingError::between(&r, &s);
        let st = IntegralState::default();
        let nismc = nismc_control(&p(), &s, &r, &st, &err, &NismcGains::default(), &sw, mode).unwrap();
        assert_abs_diff_eq!(nismc, g, epsilon = 1e-14);
        let h = hnismc_control(&p(), &s, &r, &st, &err, &HybridGains::default(), &sw, mode).unwrap();
        assert_abs_diff_eq!(h, g, epsilon = 1e-14);
    }

    #[test]
    fn smc_reaching_term_isolated() {
        let s = JointState::new(Vec2::new(0.3, 0.9), Vec2::new(0.2, -0.1));
        let r = RefPoint {
            q: s.q + Vec2::new(0.1, 0.0),
            qdot: s.qdot,
            qddot: Vec2::zeros(),
        };
        let sw = SwitchConfig::default();
        let g = SmcGains::default();
        let off = SmcGains {
            gamma: Diag2::ZERO,
            ..g
        };
        let with = smc_control(&p(), &s, &r, &g, &sw, CoriolisMode::Paper).unwrap();
        let without = smc_control(&p(), &s, &r, &off, &sw, CoriolisMode::Paper).unwrap();
        let expected = mass_matrix(&p(), &s.q) * Vec2::new(10.0, 0.0);
        assert_abs_diff_eq!(with - without, expected, epsilon = 1e-12);
    }

    #[test]
    fn hybrid_correction_example() {
        let err = TrackingError::new(Vec2::new(0.1, 0.0), Vec2::new(0.0, -0.2));
        let u = hybrid_correction(&err, &HybridGains::default(), &SwitchConfig::default());
        assert_abs_diff_eq!(u, Vec2::new(-0.05, 0.05), epsilon = 1e-15);
    }

    #[test]
    fn nismc_with_zero_integral_gains_differs_from_smc_only_in_feedback() {
        let s = JointState::new(Vec2::new(-0.4, 1.2), Vec2::new(0.3, 0.7));
        let r = RefPoint {
            q: Vec2::new(-0.3, 1.0),
            qdot: Vec2::new(0.1, 0.2),
            qddot: Vec2::new(-0.5, 0.4),
        };
        let err = TrackingError::between(&r, &s);
        let sw = SwitchConfig::default();
        let smc = SmcGains::default();
        let nis = NismcGains {
            alpha: Diag2::ZERO,
            beta: Diag2::ZERO,
            gamma: smc.gamma,
        };
        let st = IntegralState::default();
        let a = smc_control(&p(), &s, &r, &smc, &sw, CoriolisMode::Paper).unwrap();
        let b = nismc_control(&p(), &s, &r, &st, &err, &nis, &sw, CoriolisMode::Paper).unwrap();
        let m = mass_matrix(&p(), &s.q);
        assert_abs_diff_eq!(a - b, m * smc.lambda.apply(&err.edot), epsilon = 1e-12);
    }

    #[test]
    fn model_torque_is_inverse_dynamics_of_command() {
        let s = JointState::new(Vec2::new(0.1, 0.5), Vec2::new(-1.0, 2.0));
        let a = Vec2::new(3.0, -4.0);
        let tau = model_torque(&p(), &s, &a, CoriolisMode::Christoffel).unwrap();
        assert_abs_diff_eq!(
            tau,
            inverse_dynamics(&p(), &s, &a, CoriolisMode::Christoffel),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sigma_reaching_uses_surface() {
        let sw = SwitchConfig {
            reaching: ReachingArg::Sigma,
            ..Default::default()
        };
        // e and σ have opposite signs on joint 1.
        let err = TrackingError::new(Vec2::new(0.01, 0.0), Vec2::new(-1.0, 0.0));
        let g = SmcGains::default();
        let u = smc_command(&RefPoint::default(), &err, &g, &sw);
        assert_abs_diff_eq!(u[0], -50.0 - 10.0, epsilon = 1e-12);
    }

    #[test]
    fn controller_integrates_after_computing() {
        let mut c = Controller::new(ControllerKind::Nismc, GainSet::default(), SwitchConfig::default());
        let s = JointState::at_rest(Vec2::zeros());
        let r = RefPoint::hold(Vec2::new(0.1, 0.0));
        let first = c.step(&p(), &s, &r, 1e-3, CoriolisMode::Paper).unwrap();
        assert_eq!(first.sigma, Vec2::zeros());
        assert_abs_diff_eq!(c.integral().z, Vec2::new(50.0 * 0.1 * 1e-3, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn controller_kind_parsing() {
        assert_eq!("HNISMC".parse::<ControllerKind>().unwrap(), ControllerKind::Hnismc);
        let err = "bogus".parse::<ControllerKind>().unwrap_err();
        assert!(err.contains("smc, nismc, hnismc"));
    }
}
