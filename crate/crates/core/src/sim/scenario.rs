use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::disturbance::DisturbanceModel;
use super::filter::FilterSettings;
use super::reference::ReferenceSpec;
use crate::control::{validate_gains, ControllerKind, GainSet, GainWarning, SwitchConfig};
use crate::dynamics::{CoriolisMode, JointState, RobotParams};
use crate::{Error, Result};

/// Plant integration step (s).
pub const DEFAULT_DT_PLANT: f64 = 1e-4;
/// Controller period (s).
pub const DEFAULT_DT_CONTROL: f64 = 1.25e-3;
/// Experiment length (s).
pub const DEFAULT_T_END: f64 = 10.0;

// Relative slack when checking that one period is a whole multiple of another.
const GRID_TOL: f64 = 1e-9;

/// Everything needed to reproduce one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params_plant: RobotParams,
    /// Nominal model used inside the controller.
    pub params_controller: RobotParams,
    pub controller: ControllerKind,
    pub gains: GainSet,
    pub switch: SwitchConfig,
    pub reference: ReferenceSpec,
    pub disturbance: DisturbanceModel,
    pub coriolis_mode: CoriolisMode,
    pub t_end: f64,
    pub dt_plant: f64,
    pub dt_control: f64,
    /// Measurement filter; `None` feeds the controller the true state.
    pub filter: Option<FilterSettings>,
    pub initial: JointState,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            params_plant: RobotParams::default(),
            params_controller: RobotParams::default(),
            controller: ControllerKind::Hnismc,
            gains: GainSet::default(),
            switch: SwitchConfig::default(),
            reference: ReferenceSpec::default(),
            disturbance: DisturbanceModel::default(),
            coriolis_mode: CoriolisMode::Paper,
            t_end: DEFAULT_T_END,
            dt_plant: DEFAULT_DT_PLANT,
            dt_control: DEFAULT_DT_CONTROL,
            filter: None,
            initial: JointState::default(),
        }
    }
}

/// Whole number of `fine` periods in `coarse`, if it is one.
fn whole_multiple(coarse: f64, fine: f64) -> Option<usize> {
    let ratio = coarse / fine;
    let n = ratio.round();
    (n >= 1.0 && (ratio - n).abs() <= GRID_TOL * ratio).then_some(n as usize)
}

impl Scenario {
    pub fn with_controller(&self, kind: ControllerKind) -> Self {
        Self {
            controller: kind,
            ..self.clone()
        }
    }

    /// Number of plant steps, `floor(t_end / dt_plant)`. The trace has one
    /// more row than this.
    pub fn plant_steps(&self) -> usize {
        (self.t_end / self.dt_plant * (1.0 + GRID_TOL)).floor() as usize
    }

    /// Plant steps per filter update, when a filter is configured.
    pub fn filter_stride(&self) -> Result<Option<usize>> {
        let Some(f) = &self.filter else { return Ok(None) };
        whole_multiple(f.params.sample_dt, self.dt_plant)
            .map(Some)
            .ok_or_else(|| {
                Error::InvalidScenario(format!(
                    "filter sample_dt ({}) must be a whole multiple of dt_plant ({})",
                    f.params.sample_dt, self.dt_plant
                ))
            })
    }

    /// Checks every invariant; returns the non-fatal gain warnings.
    pub fn validate(&self) -> Result<Vec<GainWarning>> {
        self.params_plant.validate()?;
        self.params_controller.validate()?;
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.dt_plant.is_finite() && self.dt_plant > 0.0) {
            return bad(format!("dt_plant must be > 0, got {}", self.dt_plant));
        }
        if !(self.dt_control.is_finite() && self.dt_control >= self.dt_plant * (1.0 - GRID_TOL)) {
            return bad(format!(
                "dt_control ({}) must be >= dt_plant ({})",
                self.dt_control, self.dt_plant
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if let Some(f) = &self.filter {
            if !f.params.is_valid() {
                return bad("filter zeta, omega0 and sample_dt must be > 0".into());
            }
            self.filter_stride()?;
        }
        if !self.initial.is_finite() {
            return bad("initial state must be finite".into());
        }
        if !self.reference.is_valid() {
            return bad("reference must be finite with frequency >= 0".into());
        }
        if !self.disturbance.is_valid() {
            return bad(format!("invalid {} disturbance parameters", self.disturbance.name()));
        }
        if !self.switch.is_valid() {
            return bad("switch boundary must be > 0 for saturation/tanh".into());
        }
        let g = &self.gains;
        let positive = [
            ("smc.lambda", g.smc.lambda),
            ("smc.gamma", g.smc.gamma),
            ("nismc.alpha", g.nismc.alpha),
            ("nismc.beta", g.nismc.beta),
            ("nismc.gamma", g.nismc.gamma),
            ("hnismc.alpha", g.hnismc.base.alpha),
            ("hnismc.beta", g.hnismc.base.beta),
            ("hnismc.gamma", g.hnismc.base.gamma),
        ];
        for (name, d) in positive {
            if !d.all_positive() {
                return bad(format!("{name} must have positive entries, got {d}"));
            }
        }
        for (name, d) in [("hnismc.xi1", g.hnismc.xi1), ("hnismc.xi2", g.hnismc.xi2)] {
            if !d.all_nonnegative() {
                return bad(format!("{name} must have nonnegative entries, got {d}"));
            }
        }
        Ok(match self.controller {
            ControllerKind::Hnismc => validate_gains(&g.hnismc),
            _ => Vec::new(),
        })
    }

    /// Short content hash of the fully-resolved scenario.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&json);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
