//! Fixed-step multirate closed-loop simulation.
//!
//! The plant is integrated with RK4 at `dt_plant`. Every `dt_control` the
//! controller reads the (optionally filtered) state and its torque is held
//! until the next tick. Each plant step is recorded in a [`Trace`].

mod disturbance;
mod filter;
mod integrate;
mod reference;
mod scenario;
mod trace;

use nalgebra::Vector4;

pub use disturbance::{disturbance, DisturbanceModel, DisturbanceSource, NOISE_COMPONENTS};
pub use filter::{filter_step, FilterParams, FilterSettings, FilterState, MeasurementFilter};
pub use integrate::rk4_step;
pub use reference::{reference, ReferenceKind, ReferenceSpec};
pub use scenario::{Scenario, DEFAULT_DT_CONTROL, DEFAULT_DT_PLANT, DEFAULT_T_END};
pub use trace::{Trace, TraceMeta, TraceRow};

use crate::control::{sign, Controller, IntegralState, RefPoint, TrackingError};
use crate::dynamics::{forward_dynamics, CoriolisMode, JointState, RobotParams};
use crate::{Error, Result, Vec2};

pub use trace::TickSample;

fn split(y: &Vector4<f64>) -> JointState {
    JointState::new(Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))
}

// Controller tick at times that land within this fraction of a plant step of
// a row are taken at the row.
const TICK_SNAP: f64 = 1e-6;

/// Mutable part of the loop that changes at controller ticks.
struct ControlLoop<'a> {
    sc: &'a Scenario,
    controller: Controller,
    filter: Option<MeasurementFilter>,
    tau: Vec2,
    held_integral: IntegralState,
    ticks: Vec<TickSample>,
    next_tick: u64,
}

impl ControlLoop<'_> {
    fn next_tick_time(&self) -> f64 {
        self.next_tick as f64 * self.sc.dt_control
    }

    fn tick(&mut self, t: f64, s: &JointState) -> Result<()> {
        let measured = self.filter.as_ref().map_or(*s, |f| *f.output());
        let r = RefPoint::at(&self.sc.reference, t);
        self.held_integral = *self.controller.integral();
        let sample = self.controller.step(
            &self.sc.params_controller,
            &measured,
            &r,
            self.sc.dt_control,
            self.sc.coriolis_mode,
        )?;
        self.tau = sample.tau;
        let sigma = self
            .controller
            .sigma_with(&TrackingError::between(&r, s), &self.held_integral);
        self.ticks.push(TickSample {
            t,
            sigma,
            tau: sample.tau,
            lyapunov: 0.5 * sigma.dot(&sigma),
        });
        self.next_tick += 1;
        Ok(())
    }
}

// Velocity zero crossings handled per plant step before giving up on exact
// location (only reachable with stick-slip chatter).
const MAX_CROSSINGS: usize = 8;
const CROSSING_BISECTIONS: usize = 60;

fn advance(
    plant: &RobotParams,
    source: &DisturbanceSource,
    mode: CoriolisMode,
    tau: Vec2,
    y: &Vector4<f64>,
    t: f64,
    dt: f64,
) -> Result<Vector4<f64>> {
    let frozen_step = |direction: [f64; 2], y0: &Vector4<f64>, t0: f64, h: f64| {
        let deriv = |tt: f64, yy: &Vector4<f64>| -> Result<Vector4<f64>> {
            let st = split(yy);
            let dist = source.sample_with_direction(plant, tt, &st, &direction)?;
            let acc = forward_dynamics(plant, &st, &tau, &dist, mode)?;
            Ok(Vector4::new(st.qdot[0], st.qdot[1], acc[0], acc[1]))
        };
        rk4_step(deriv, y0, t0, h)
    };

    if !source.has_velocity_switch() {
        return frozen_step([0.0; 2], y, t, dt);
    }

    // Friction direction per joint: the sign of the velocity, or for a joint
    // at rest the sign of its acceleration with its Coulomb term switched off.
    let direction_of = |tt: f64, yy: &Vector4<f64>| -> Result<[f64; 2]> {
        let mut dir = [sign(yy[2]), sign(yy[3])];
        if dir.contains(&0.0) {
            let st = split(yy);
            let dist = source.sample_with_direction(plant, tt, &st, &dir)?;
            let acc = forward_dynamics(plant, &st, &tau, &dist, mode)?;
            for j in 0..2 {
                if dir[j] == 0.0 {
                    dir[j] = sign(acc[j]);
                }
            }
        }
        Ok(dir)
    };
    let crossed = |dir: &[f64; 2], yy: &Vector4<f64>| (0..2).any(|j| dir[j] != 0.0 && yy[2 + j] * dir[j] < 0.0);

    // Coulomb friction jumps when a joint velocity changes sign. Each
    // sub-step integrates with the friction direction frozen, and a step
    // that would carry a velocity through zero is cut at the crossing.
    let end = t + dt;
    let mut cur = t;
    let mut state = *y;
    for _ in 0..MAX_CROSSINGS {
        let dir = direction_of(cur, &state)?;
        let full = frozen_step(dir, &state, cur, end - cur)?;
        if !crossed(&dir, &full) {
            return Ok(full);
        }
        let (mut lo, mut hi) = (0.0, end - cur);
        let mut at_hi = full;
        for _ in 0..CROSSING_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let trial = frozen_step(dir, &state, cur, mid)?;
            if crossed(&dir, &trial) {
                hi = mid;
                at_hi = trial;
            } else {
                lo = mid;
            }
        }
        for j in 0..2 {
            if dir[j] != 0.0 && at_hi[2 + j] * dir[j] < 0.0 {
                at_hi[2 + j] = 0.0;
            }
        }
        state = at_hi;
        cur += hi;
        if cur >= end {
            return Ok(state);
        }
    }
    // Stick-slip chatter: finish the step without further cuts.
    frozen_step(direction_of(cur, &state)?, &state, cur, end - cur)
}

/// Runs `sc` to completion. Bitwise deterministic for a given scenario.
///
/// Rows are recorded every `dt_plant`. Controller ticks happen every
/// `dt_control`; a tick that falls inside a plant step splits that step, so
/// the zero-order hold is exact even when the two periods are not commensurate.
///
/// On divergence the error is [`Error::NonFiniteState`] with every row
/// recorded up to the last finite state.
pub fn run_simulation(sc: &Scenario) -> Result<Trace> {
    for w in sc.validate()? {
        log::warn!("{w}");
    }
    let filter_stride = sc.filter_stride()?;
    let steps = sc.plant_steps();
    let mode = sc.coriolis_mode;
    let plant = sc.params_plant;
    let snap = TICK_SNAP * sc.dt_plant;

    let meta = TraceMeta {
        scenario_hash: sc.hash(),
        controller: sc.controller,
        gains: sc.gains,
        switch: sc.switch,
        coriolis_mode: mode,
        dt_plant: sc.dt_plant,
        dt_control: sc.dt_control,
    };
    let mut rows = Vec::with_capacity(steps + 1);
    let source = DisturbanceSource::new(sc.disturbance);
    let mut lp = ControlLoop {
        sc,
        controller: Controller::new(sc.controller, sc.gains, sc.switch),
        filter: sc.filter.map(|f| MeasurementFilter::new(f, &sc.initial)),
        tau: Vec2::zeros(),
        held_integral: IntegralState::default(),
        ticks: Vec::with_capacity((sc.t_end / sc.dt_control) as usize + 2),
        next_tick: 0,
    };

    let mut y = Vector4::new(sc.initial.q[0], sc.initial.q[1], sc.initial.qdot[0], sc.initial.qdot[1]);

    for i in 0..=steps {
        let t = i as f64 * sc.dt_plant;
        let s = split(&y);

        if let (Some(f), Some(k)) = (&mut lp.filter, filter_stride) {
            if i > 0 && i % k == 0 {
                f.update(&s)?;
            }
        }
        if lp.next_tick_time() <= t + snap {
            lp.tick(t, &s)?;
        }

        let r = RefPoint::at(&sc.reference, t);
        let err = TrackingError::between(&r, &s);
        let sigma = lp.controller.sigma_with(&err, &lp.held_integral);
        rows.push(TraceRow {
            t,
            q: s.q,
            qdot: s.qdot,
            qd: r.q,
            qd_dot: r.qdot,
            e: err.e,
            edot: err.edot,
            sigma,
            tau: lp.tau,
            d: source.sample(&plant, t, &s)?,
            lyapunov: 0.5 * sigma.dot(&sigma),
        });

        if i == steps {
            break;
        }
        let t_next = (i + 1) as f64 * sc.dt_plant;
        let mut step = || -> Result<Vector4<f64>> {
            let mut cur = t;
            let mut state = y;
            while lp.next_tick_time() < t_next - snap {
                let tk = lp.next_tick_time();
                state = advance(&plant, &source, mode, lp.tau, &state, cur, tk - cur)?;
                lp.tick(tk, &split(&state))?;
                cur = tk;
            }
            advance(&plant, &source, mode, lp.tau, &state, cur, t_next - cur)
        };
        y = match step() {
            Ok(next) => next,
            // M(q) is positive definite for any valid robot, so a singular
            // one means the state has already blown up.
            Err(e @ (Error::NonFiniteState { .. } | Error::SingularMass { .. })) => {
                let t = match e {
                    Error::NonFiniteState { t, .. } => t,
                    _ => t_next,
                };
                return Err(Error::NonFiniteState {
                    t,
                    partial: Some(Box::new(Trace {
                        meta,
                        rows,
                        ticks: lp.ticks,
                    })),
                })
            }
            Err(other) => return Err(other),
        };
    }

    Ok(Trace {
        meta,
        rows,
        ticks: lp.ticks,
    })
}
