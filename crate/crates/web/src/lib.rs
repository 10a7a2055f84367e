//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: a single closed-loop run with adjustable
//! gains and disturbance, an RMSE comparison of the three controllers, and
//! the magnitude response of the measurement filter.

use arm_smc::analysis::tracking_metrics;
use arm_smc::control::{ControllerKind, Diag2, SwitchKind};
use arm_smc::sim::{run_simulation, DisturbanceModel, FilterParams, Scenario, Trace};
use wasm_bindgen::prelude::*;

/// Points per series handed to the page for plotting.
const PLOT_POINTS: usize = 1500;

/// Knobs the page exposes on top of the default scenario.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct DemoParams {
    pub t_end: f64,
    /// Reaching gain Γ, both joints, all controllers.
    pub gamma: f64,
    /// Hybrid gains ξ₁ = ξ₂.
    pub xi: f64,
    /// Scale on the default friction (0 disables it).
    pub friction: f64,
    /// RMS of an extra band-limited acceleration disturbance (rad/s²).
    pub noise: f64,
    /// Boundary-layer width; 0 keeps the discontinuous sign function.
    pub boundary: f64,
}

#[wasm_bindgen]
impl DemoParams {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Self {
        Self {
            t_end: 5.0,
            gamma: 10.0,
            xi: 0.05,
            friction: 1.0,
            noise: 0.0,
            boundary: 0.0,
        }
    }
}

impl Default for DemoParams {
    fn default() -> Self {
        Self::new()
    }
}

fn scenario(p: &DemoParams, kind: ControllerKind) -> Result<Scenario, String> {
    let mut sc = Scenario::default().with_controller(kind);
    sc.t_end = p.t_end;
    let gamma = Diag2::splat(p.gamma);
    sc.gains.smc.gamma = gamma;
    sc.gains.nismc.gamma = gamma;
    sc.gains.hnismc.base.gamma = gamma;
    sc.gains.hnismc.xi1 = Diag2::splat(p.xi);
    sc.gains.hnismc.xi2 = Diag2::splat(p.xi);
    if p.boundary > 0.0 {
        sc.switch.kind = SwitchKind::Saturation;
        sc.switch.boundary = p.boundary;
    }
    // The scenario carries a single disturbance model, so noise replaces
    // friction when both are asked for.
    sc.disturbance = if p.noise > 0.0 {
        DisturbanceModel::BandLimitedNoise {
            amplitude: [p.noise; 2],
            cutoff: 20.0,
            seed: 1,
        }
    } else if p.friction > 0.0 {
        DisturbanceModel::ViscousCoulombFriction {
            viscous: [0.05 * p.friction; 2],
            coulomb: [0.1 * p.friction; 2],
        }
    } else {
        DisturbanceModel::None
    };
    sc.validate().map_err(|e| e.to_string())?;
    Ok(sc)
}

fn run(sc: &Scenario) -> Result<Trace, String> {
    run_simulation(sc).map_err(|e| e.to_string())
}

fn parse_kind(name: &str) -> Result<ControllerKind, String> {
    name.parse()
}

/// Decimated time series of one run.
#[wasm_bindgen]
#[derive(Debug)]
pub struct Series {
    t: Vec<f64>,
    q: [Vec<f64>; 2],
    qd: [Vec<f64>; 2],
    e: [Vec<f64>; 2],
    tau: [Vec<f64>; 2],
    rmse: [f64; 2],
}

#[wasm_bindgen]
impl Series {
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    pub fn q(&self, joint: usize) -> Vec<f64> {
        self.q[joint].clone()
    }
    pub fn qd(&self, joint: usize) -> Vec<f64> {
        self.qd[joint].clone()
    }
    pub fn e(&self, joint: usize) -> Vec<f64> {
        self.e[joint].clone()
    }
    pub fn tau(&self, joint: usize) -> Vec<f64> {
        self.tau[joint].clone()
    }
    pub fn rmse(&self, joint: usize) -> f64 {
        self.rmse[joint]
    }
}

/// Runs `controller` (`smc`, `nismc` or `hnismc`) with the given knobs.
#[wasm_bindgen]
pub fn simulate(controller: &str, params: &DemoParams) -> Result<Series, String> {
    let sc = scenario(params, parse_kind(controller)?)?;
    let trace = run(&sc)?;
    let m = tracking_metrics(&trace).map_err(|e| e.to_string())?;
    let stride = trace.len().div_ceil(PLOT_POINTS).max(1);
    let rows: Vec<_> = trace.rows.iter().step_by(stride).collect();
    let col = |f: &dyn Fn(&arm_smc::sim::TraceRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
    Ok(Series {
        t: col(&|r| r.t),
        q: [col(&|r| r.q[0]), col(&|r| r.q[1])],
        qd: [col(&|r| r.qd[0]), col(&|r| r.qd[1])],
        e: [col(&|r| r.e[0]), col(&|r| r.e[1])],
        tau: [col(&|r| r.tau[0]), col(&|r| r.tau[1])],
        rmse: [m.rmse[0], m.rmse[1]],
    })
}

/// Per-joint RMSE of smc, nismc and hnismc, flattened
/// `[smc₁, smc₂, nismc₁, nismc₂, hnismc₁, hnismc₂]`.
#[wasm_bindgen]
pub fn compare_rmse(params: &DemoParams) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(6);
    for kind in ControllerKind::ALL {
        let trace = run(&scenario(params, kind)?)?;
        let m = tracking_metrics(&trace).map_err(|e| e.to_string())?;
        out.extend_from_slice(&[m.rmse[0], m.rmse[1]]);
    }
    Ok(out)
}

/// `|H(jω)|` of the second-order filter at `n` log-spaced frequencies from
/// `omega_min` to `omega_max`, returned as `[ω…, |H|…]`.
#[wasm_bindgen]
pub fn filter_response(zeta: f64, omega0: f64, omega_min: f64, omega_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(zeta > 0.0 && omega0 > 0.0 && omega_min > 0.0 && omega_max > omega_min && n >= 2) {
        return Err("need zeta, omega0 > 0, 0 < omega_min < omega_max and n >= 2".into());
    }
    let fp = FilterParams {
        zeta,
        omega0,
        ..FilterParams::measurement()
    };
    let ratio = (omega_max / omega_min).ln() / (n - 1) as f64;
    let omegas: Vec<f64> = (0..n).map(|i| omega_min * (ratio * i as f64).exp()).collect();
    let mags = omegas.iter().map(|&w| fp.magnitude(w));
    Ok(omegas.iter().copied().chain(mags).collect())
}
