use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::sign;
use crate::dynamics::{inverse_mass_matrix, JointState, RobotParams};
use crate::{Result, Vec2};

/// Number of sinusoids summed by [`DisturbanceModel::BandLimitedNoise`].
pub const NOISE_COMPONENTS: usize = 24;

/// Lumped disturbance `d(t)`, injected at acceleration level. Torque-valued
/// models are mapped through the plant's `M⁻¹(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceModel {
    None,
    /// Constant acceleration offset (rad/s²).
    Constant { value: [f64; 2] },
    /// Joint torque `A sin(ωt + φ)` (N·m).
    SinusoidTorque {
        amplitude: [f64; 2],
        frequency: [f64; 2],
        phase: [f64; 2],
    },
    /// Friction torque `−(c_v q̇ + c_c sign(q̇))`.
    ViscousCoulombFriction {
        /// N·m·s/rad
        viscous: [f64; 2],
        /// N·m
        coulomb: [f64; 2],
    },
    /// Seeded random-phase multisine with components below `cutoff`
    /// (rad/s) and RMS `amplitude` (rad/s²) per joint. A pure function of
    /// time, so it is smooth inside an integrator step.
    BandLimitedNoise { amplitude: [f64; 2], cutoff: f64, seed: u64 },
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self::friction()
    }
}

impl DisturbanceModel {
    /// Desk-scale friction, c_v = 0.05 N·m·s/rad and c_c = 0.1 N·m per joint.
    pub fn friction() -> Self {
        Self::ViscousCoulombFriction {
            viscous: [0.05; 2],
            coulomb: [0.1; 2],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Constant { .. } => "constant",
            Self::SinusoidTorque { .. } => "sinusoid_torque",
            Self::ViscousCoulombFriction { .. } => "viscous_coulomb_friction",
            Self::BandLimitedNoise { .. } => "band_limited_noise",
        }
    }

    pub fn is_valid(&self) -> bool {
        let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        match self {
            Self::None => true,
            Self::Constant { value } => finite(value),
            Self::SinusoidTorque {
                amplitude,
                frequency,
                phase,
            } => finite(amplitude) && finite(frequency) && finite(phase),
            Self::ViscousCoulombFriction { viscous, coulomb } => {
                finite(viscous) && finite(coulomb) && viscous.iter().chain(coulomb).all(|c| *c >= 0.0)
            }
            Self::BandLimitedNoise { amplitude, cutoff, .. } => {
                finite(amplitude) && cutoff.is_finite() && *cutoff > 0.0
            }
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::BandLimitedNoise { amplitude, cutoff, .. } => Self::BandLimitedNoise {
                amplitude,
                cutoff,
                seed,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tone {
    amplitude: f64,
    omega: f64,
    phase: f64,
}

/// A [`DisturbanceModel`] with its noise components drawn once.
#[derive(Debug, Clone)]
pub struct DisturbanceSource {
    model: DisturbanceModel,
    tones: [Vec<Tone>; 2],
}

impl DisturbanceSource {
    pub fn new(model: DisturbanceModel) -> Self {
        let tones = match model {
            DisturbanceModel::BandLimitedNoise { amplitude, cutoff, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = (2.0 / NOISE_COMPONENTS as f64).sqrt();
                let mut draw = |rms: f64| {
                    (0..NOISE_COMPONENTS)
                        .map(|_| Tone {
                            amplitude: rms * scale,
                            omega: cutoff * (1.0 - rng.gen::<f64>()),
                            phase: rng.gen::<f64>() * std::f64::consts::TAU,
                        })
                        .collect::<Vec<_>>()
                };
                let first = draw(amplitude[0]);
                [first, draw(amplitude[1])]
            }
            _ => [Vec::new(), Vec::new()],
        };
        Self { model, tones }
    }

    pub fn model(&self) -> &DisturbanceModel {
        &self.model
    }

    /// True when the model switches on the sign of the joint velocity.
    pub fn has_velocity_switch(&self) -> bool {
        matches!(
            self.model,
            DisturbanceModel::ViscousCoulombFriction { coulomb, .. } if coulomb != [0.0, 0.0]
        )
    }

    /// Acceleration-level disturbance at `t` for plant state `s`.
    pub fn sample(&self, p: &RobotParams, t: f64, s: &JointState) -> Result<Vec2> {
        self.sample_with_direction(p, t, s, &[sign(s.qdot[0]), sign(s.qdot[1])])
    }

    /// Same as [`DisturbanceSource::sample`], with the Coulomb friction sign
    /// per joint supplied by the caller instead of taken from `sign(q̇)`.
    /// Lets an integrator keep the right-hand side smooth over a step.
    pub fn sample_with_direction(
        &self,
        p: &RobotParams,
        t: f64,
        s: &JointState,
        direction: &[f64; 2],
    ) -> Result<Vec2> {
        let through_plant = |torque: Vec2| -> Result<Vec2> { Ok(inverse_mass_matrix(p, &s.q)? * torque) };
        match self.model {
            DisturbanceModel::None => Ok(Vec2::zeros()),
            DisturbanceModel::Constant { value } => Ok(Vec2::from(value)),
            DisturbanceModel::SinusoidTorque {
                amplitude,
                frequency,
                phase,
            } => through_plant(Vec2::from_fn(|j, _| {
                amplitude[j] * (frequency[j] * t + phase[j]).sin()
            })),
            DisturbanceModel::ViscousCoulombFriction { viscous, coulomb } => {
                through_plant(Vec2::from_fn(|j, _| -(viscous[j] * s.qdot[j] + coulomb[j] * direction[j])))
            }
            DisturbanceModel::BandLimitedNoise { .. } => Ok(Vec2::from_fn(|j, _| {
                self.tones[j]
                    .iter()
                    .map(|k| k.amplitude * (k.omega * t + k.phase).sin())
                    .sum()
            })),
        }
    }
}

/// One-shot evaluation of `d(t)`; see [`DisturbanceSource`] for repeated use.
pub fn disturbance(model: &DisturbanceModel, p: &RobotParams, t: f64, s: &JointState) -> Result<Vec2> {
    DisturbanceSource::new(*model).sample(p, t, s)
}
