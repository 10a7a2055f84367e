use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::integrate::rk4_step;
use crate::dynamics::JointState;
use crate::{Result, Vec2};

/// Second-order low-pass `H(s) = ω₀² / (s² + 2ζω₀s + ω₀²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub zeta: f64,
    /// rad/s
    pub omega0: f64,
    /// Update period (s).
    pub sample_dt: f64,
}

impl FilterParams {
    /// Joint position/velocity filter: ζ = 0.9, ω₀ = 30 rad/s, sampled at 1 ms.
    pub fn measurement() -> Self {
        Self {
            zeta: 0.9,
            omega0: 30.0,
            sample_dt: 1e-3,
        }
    }

    /// Motor-current filter: ζ = 0.9, ω₀ = 3000 rad/s. Stepped at 50 µs since
    /// RK4 is unstable for this pole at 1 ms.
    pub fn current() -> Self {
        Self {
            zeta: 0.9,
            omega0: 3000.0,
            sample_dt: 5e-5,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.zeta, self.omega0, self.sample_dt]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }

    /// Continuous-time magnitude `|H(jω)|`.
    pub fn magnitude(&self, omega: f64) -> f64 {
        let w0 = self.omega0;
        let re = w0 * w0 - omega * omega;
        let im = 2.0 * self.zeta * w0 * omega;
        w0 * w0 / re.hypot(im)
    }
}

impl Default for FilterParams {
    fn default() -> Self {
        Self::measurement()
    }
}

/// Internal state of one filter channel: output and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterState {
    pub y: f64,
    pub ydot: f64,
}

impl FilterState {
    /// Steady state for a constant input `u`.
    pub fn settled(u: f64) -> Self {
        Self { y: u, ydot: 0.0 }
    }
}

/// Advances one channel by `fp.sample_dt` with `u` held, returning the new
/// state and the filtered output.
pub fn filter_step(state: &FilterState, u: f64, fp: &FilterParams) -> Result<(FilterState, f64)> {
    let w2 = fp.omega0 * fp.omega0;
    let damp = 2.0 * fp.zeta * fp.omega0;
    let y = Vector2::new(state.y, state.ydot);
    let next = rk4_step(
        |_, x: &Vector2<f64>| Ok(Vector2::new(x[1], w2 * (u - x[0]) - damp * x[1])),
        &y,
        0.0,
        fp.sample_dt,
    )?;
    let out = FilterState {
        y: next[0],
        ydot: next[1],
    };
    Ok((out, out.y))
}

/// Which measured channels pass through the filter in closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSettings {
    pub params: FilterParams,
    pub position: bool,
    pub velocity: bool,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            params: FilterParams::measurement(),
            position: true,
            velocity: true,
        }
    }
}

/// Four-channel filter bank (q₁, q₂, q̇₁, q̇₂) used on the measurement path.
#[derive(Debug, Clone)]
pub struct MeasurementFilter {
    settings: FilterSettings,
    channels: [FilterState; 4],
    output: JointState,
}

impl MeasurementFilter {
    /// Starts settled on `initial`, so the first controller tick sees no
    /// artificial transient.
    pub fn new(settings: FilterSettings, initial: &JointState) -> Self {
        let raw = Self::flatten(initial);
        Self {
            settings,
            channels: raw.map(FilterState::settled),
            output: *initial,
        }
    }

    fn flatten(s: &JointState) -> [f64; 4] {
        [s.q[0], s.q[1], s.qdot[0], s.qdot[1]]
    }

    pub fn update(&mut self, raw: &JointState) -> Result<JointState> {
        let input = Self::flatten(raw);
        let mut out = input;
        for (i, ch) in self.channels.iter_mut().enumerate() {
            let enabled = if i < 2 {
                self.settings.position
            } else {
                self.settings.velocity
            };
            if enabled {
                let (next, y) = filter_step(ch, input[i], &self.settings.params)?;
                *ch = next;
                out[i] = y;
            }
        }
        self.output = JointState::new(Vec2::new(out[0], out[1]), Vec2::new(out[2], out[3]));
        Ok(self.output)
    }

    pub fn output(&self) -> &JointState {
        &self.output
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_dc_gain() {
        let fp = FilterParams::measurement();
        let c = 2.5;
        let mut st = FilterState::default();
        let settle = 10.0 / (fp.zeta * fp.omega0);
        let steps = (settle / fp.sample_dt).ceil() as usize;
        let mut y = 0.0;
        for _ in 0..steps {
            (st, y) = filter_step(&st, c, &fp).unwrap();
        }
        assert!((y - c).abs() < 1e-3 * c, "y = {y}");
    }

    #[test]
    fn zero_in_zero_out() {
        let fp = FilterParams::measurement();
        let mut st = FilterState::default();
        for _ in 0..1000 {
            let (next, y) = filter_step(&st, 0.0, &fp).unwrap();
            assert_eq!(y, 0.0);
            st = next;
        }
    }

    #[test]
    fn analytic_magnitude_at_300() {
        let m = FilterParams::measurement().magnitude(300.0);
        assert!((m - 0.00994).abs() < 1e-5, "{m}");
        assert!((FilterParams::measurement().magnitude(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn current_preset_is_stable() {
        let fp = FilterParams::current();
        let mut st = FilterState::default();
        let mut y = 0.0;
        for _ in 0..2000 {
            (st, y) = filter_step(&st, 1.0, &fp).unwrap();
        }
        assert!((y - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bank_respects_channel_switches() {
        let settings = FilterSettings {
            position: false,
            ..Default::default()
        };
        let init = JointState::default();
        let mut bank = MeasurementFilter::new(settings, &init);
        let raw = JointState::new(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0));
        let out = bank.update(&raw).unwrap();
        assert_eq!(out.q, raw.q);
        assert!(out.qdot[0] < 0.1);
    }
}
