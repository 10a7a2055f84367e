use serde::{Deserialize, Serialize};

use crate::control::{ControllerKind, GainSet, SwitchConfig};
use crate::dynamics::CoriolisMode;
use crate::Vec2;

/// One plant-rate sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub q: Vec2,
    pub qdot: Vec2,
    pub qd: Vec2,
    pub qd_dot: Vec2,
    pub e: Vec2,
    pub edot: Vec2,
    /// Sliding variable of the active surface, from the true state.
    pub sigma: Vec2,
    /// Torque held at `t`.
    pub tau: Vec2,
    /// Acceleration-level disturbance at `t`.
    pub d: Vec2,
    /// `½ σᵀσ`
    pub lyapunov: f64,
}

/// State of the loop at a controller tick. Ticks need not coincide with
/// plant rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TickSample {
    pub t: f64,
    /// Active surface from the true state at the tick.
    pub sigma: Vec2,
    /// Torque computed at this tick.
    pub tau: Vec2,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub scenario_hash: String,
    pub controller: ControllerKind,
    pub gains: GainSet,
    pub switch: SwitchConfig,
    pub coriolis_mode: CoriolisMode,
    pub dt_plant: f64,
    pub dt_control: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
    /// Controller ticks in time order. Empty for traces read back from CSV.
    pub ticks: Vec<TickSample>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Time of the last row.
    pub fn t_end(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// Time column plus one column per joint of whatever `pick` extracts.
    pub fn series(&self, pick: impl Fn(&TraceRow) -> Vec2) -> (Vec<f64>, [Vec<f64>; 2]) {
        let t = self.rows.iter().map(|r| r.t).collect();
        let a = self.rows.iter().map(|r| pick(r)[0]).collect();
        let b = self.rows.iter().map(|r| pick(r)[1]).collect();
        (t, [a, b])
    }
}
