use serde::{Deserialize, Serialize};

use crate::control::RefPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// `offset + A sin(ωt + φ)` per joint.
    #[default]
    Sinusoid,
    /// `offset` before `step_time`, `offset + A` from then on.
    Step,
    /// Constant `offset`.
    Hold,
}

/// Desired joint trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub kind: ReferenceKind,
    /// rad
    pub amplitude: [f64; 2],
    /// rad/s
    pub frequency: [f64; 2],
    /// rad
    pub phase: [f64; 2],
    /// rad
    pub offset: [f64; 2],
    /// s, only used by [`ReferenceKind::Step`].
    pub step_time: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            kind: ReferenceKind::Sinusoid,
            amplitude: [0.5, 0.5],
            frequency: [1.0, 1.0],
            phase: [0.0, 0.0],
            offset: [0.0, 0.0],
            step_time: 0.0,
        }
    }
}

impl ReferenceSpec {
    pub fn hold(offset: [f64; 2]) -> Self {
        Self {
            kind: ReferenceKind::Hold,
            amplitude: [0.0; 2],
            frequency: [0.0; 2],
            phase: [0.0; 2],
            offset,
            step_time: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let finite = self
            .amplitude
            .iter()
            .chain(&self.frequency)
            .chain(&self.phase)
            .chain(&self.offset)
            .all(|v| v.is_finite());
        finite && self.frequency.iter().all(|w| *w >= 0.0) && self.step_time.is_finite()
    }
}

/// Desired `(q_d, q̇_d, q̈_d)` at time `t`. Derivatives are analytic.
pub fn reference(spec: &ReferenceSpec, t: f64) -> RefPoint {
    let mut out = RefPoint::default();
    for j in 0..2 {
        let c = spec.offset[j];
        let a = spec.amplitude[j];
        let (q, qd, qdd) = match spec.kind {
            ReferenceKind::Hold => (c, 0.0, 0.0),
            ReferenceKind::Step => (if t >= spec.step_time { c + a } else { c }, 0.0, 0.0),
            ReferenceKind::Sinusoid => {
                let w = spec.frequency[j];
                let (s, co) = (w * t + spec.phase[j]).sin_cos();
                (c + a * s, a * w * co, -a * w * w * s)
            }
        };
        out.q[j] = q;
        out.qdot[j] = qd;
        out.qddot[j] = qdd;
    }
    out
}

impl RefPoint {
    pub fn at(spec: &ReferenceSpec, t: f64) -> Self {
        reference(spec, t)
    }

    pub fn state(&self) -> crate::dynamics::JointState {
        crate::dynamics::JointState::new(self.q, self.qdot)
    }
}
