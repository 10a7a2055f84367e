//! Configuration and commands.
//!
//! The `arm-smc` binary is a thin argument parser over [`cmd_simulate`] and
//! [`cmd_compare`]. All outputs of one command are staged as temporary
//! files in the output directory and renamed into place only once every
//! file has been written.

pub mod config;
pub mod csv;
pub mod plot;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;
use thiserror::Error;

use crate::analysis::{compare, lyapunov_report, tracking_metrics, ComparisonTable, Metrics};
use crate::control::ControllerKind;
use crate::sim::{run_simulation, Scenario, Trace};

pub use config::{parse_config, parse_config_str, ConfigError};

/// `ΔL` above this counts as an increase in the Lyapunov summary.
pub const LYAPUNOV_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{controller} diverged: state became non-finite at t = {t} s")]
    Diverged { controller: ControllerKind, t: f64 },

    #[error(transparent)]
    Sim(#[from] crate::Error),

    #[error("cannot write to {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diverged { .. } => 3,
            CliError::Sim(_) => 1,
            CliError::Io { .. } => 4,
        }
    }
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt_plant: Option<f64>,
    pub t_end: Option<f64>,
}

/// Reads `config` (or starts from defaults) and applies `ov`.
pub fn load_scenario(config: Option<&Path>, ov: &Overrides) -> Result<Scenario, CliError> {
    let mut sc = match config {
        Some(path) => parse_config(path)?,
        None => {
            log::info!("no configuration file; using defaults");
            Scenario::default()
        }
    };
    if let Some(seed) = ov.seed {
        sc.disturbance = sc.disturbance.with_seed(seed);
    }
    if let Some(dt) = ov.dt_plant {
        sc.dt_plant = dt;
    }
    if let Some(t) = ov.t_end {
        sc.t_end = t;
    }
    for w in sc.validate().map_err(ConfigError::from)? {
        log::warn!("{w}");
    }
    Ok(sc)
}

/// Files staged for one command, committed together.
struct Staged {
    dir: PathBuf,
    files: Vec<(NamedTempFile, String)>,
}

impl Staged {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, fill: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: self.dir.join(name),
            source,
        };
        let mut tmp = NamedTempFile::with_prefix_in(format!(".{name}."), &self.dir).map_err(io)?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file_mut());
            fill(&mut w).map_err(io)?;
            w.flush().map_err(io)?;
        }
        tmp.as_file().sync_all().map_err(io)?;
        self.files.push((tmp, name.to_string()));
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, |w| w.write_all(body.as_bytes()))
    }

    /// Renames every staged file into place. Unstaged temporaries are
    /// deleted on drop if anything fails earlier.
    fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        for (tmp, name) in self.files {
            let dest = self.dir.join(&name);
            tmp.persist(&dest).map_err(|e| CliError::Io {
                path: dest.clone(),
                source: e.error,
            })?;
            written.push(dest);
        }
        Ok(written)
    }
}

fn scenario_json(sc: &Scenario) -> String {
    let doc = serde_json::json!({ "scenario_hash": sc.hash(), "scenario": sc });
    serde_json::to_string_pretty(&doc).expect("scenario serializes") + "\n"
}

fn metrics_text(trace: &Trace, m: &Metrics, sc: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "controller      {}", trace.meta.controller);
    let _ = writeln!(out, "scenario_hash   {}", trace.meta.scenario_hash);
    let _ = writeln!(out, "rows            {}", trace.len());
    let pair = |v: crate::Vec2| format!("{:.6e} {:.6e}", v[0], v[1]);
    let _ = writeln!(out, "rmse            {}", pair(m.rmse));
    let _ = writeln!(out, "max_abs_error   {}", pair(m.max_abs_error));
    let _ = writeln!(out, "iae             {}", pair(m.iae));
    let _ = writeln!(out, "control_effort  {}", pair(m.control_effort));
    let _ = writeln!(out, "chatter_index   {}", pair(m.chatter_index));
    if let Ok(rep) = lyapunov_report(trace, LYAPUNOV_TOL) {
        let _ = writeln!(out, "lyapunov_start  {:.6e}", rep.l_initial);
        let _ = writeln!(out, "lyapunov_end    {:.6e}", rep.l_final);
        let _ = writeln!(out, "frac_increasing {:.4}", rep.fraction_increasing());
        let _ = writeln!(
            out,
            "frac_increasing_outside_boundary {:.4}",
            rep.fraction_increasing_outside(sc.switch.boundary)
        );
    }
    if sc.controller == ControllerKind::Hnismc {
        if let Ok(warnings) = sc.validate() {
            for w in warnings {
                let _ = writeln!(out, "warning         {w}");
            }
        }
    }
    out
}

fn trace_plots(trace: &Trace) -> [(String, String); 3] {
    let label = trace.meta.controller.name().to_uppercase();
    let (t, q) = trace.series(|r| r.q);
    let (_, qd) = trace.series(|r| r.qd);
    let (_, e) = trace.series(|r| r.e);
    let (_, tau) = trace.series(|r| r.tau);
    fn joint_panels<'a>(t: &'a [f64], ylabel: &str, data: &[(&str, &'static str, bool, &'a [Vec<f64>; 2])]) -> Vec<plot::Panel<'a>> {
        (0..2)
            .map(|j| plot::Panel {
                ylabel: format!("{ylabel} joint {}", j + 1),
                series: data
                    .iter()
                    .map(|(name, color, dashed, ys)| plot::Series {
                        label: name.to_string(),
                        color,
                        dashed: *dashed,
                        x: t,
                        y: &ys[j],
                    })
                    .collect(),
            })
            .collect()
    }
    let tracking = plot::render(
        &format!("{label}: joint tracking"),
        "time (s)",
        &joint_panels(&t, "angle (rad)", &[("desired", plot::PALETTE[3], true, &qd), ("actual", plot::PALETTE[0], false, &q)]),
    );
    let error = plot::render(
        &format!("{label}: tracking error"),
        "time (s)",
        &joint_panels(&t, "error (rad)", &[("e", plot::PALETTE[1], false, &e)]),
    );
    let torque = plot::render(
        &format!("{label}: control torque"),
        "time (s)",
        &joint_panels(&t, "torque (N·m)", &[("tau", plot::PALETTE[2], false, &tau)]),
    );
    [
        ("tracking.svg".into(), tracking),
        ("error.svg".into(), error),
        ("torque.svg".into(), torque),
    ]
}

fn run(sc: &Scenario) -> Result<Trace, CliError> {
    match run_simulation(sc) {
        Ok(t) => Ok(t),
        Err(crate::Error::NonFiniteState { t, .. }) => Err(CliError::Diverged {
            controller: sc.controller,
            t,
        }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug)]
pub struct SimulateReport {
    pub trace: Trace,
    pub metrics: Metrics,
    pub files: Vec<PathBuf>,
}

/// Runs one controller and writes `trace.csv`, `metrics.txt`,
/// `scenario.json` and the three plots into `out`.
pub fn cmd_simulate(
    config: Option<&Path>,
    controller: Option<ControllerKind>,
    out: &Path,
    ov: &Overrides,
) -> Result<SimulateReport, CliError> {
    let mut sc = load_scenario(config, ov)?;
    if let Some(kind) = controller {
        sc.controller = kind;
    }
    log::info!("simulating {} for {} s (scenario {})", sc.controller, sc.t_end, sc.hash());
    let trace = run(&sc)?;
    let metrics = tracking_metrics(&trace)?;

    let mut staged = Staged::new(out)?;
    staged.write("trace.csv", |w| csv::write_rows(&trace.rows, w))?;
    staged.text("metrics.txt", &metrics_text(&trace, &metrics, &sc))?;
    staged.text("scenario.json", &scenario_json(&sc))?;
    for (name, svg) in trace_plots(&trace) {
        staged.text(&name, &svg)?;
    }
    let files = staged.commit()?;
    Ok(SimulateReport { trace, metrics, files })
}

#[derive(Debug)]
pub struct CompareReport {
    pub traces: Vec<Trace>,
    pub table: ComparisonTable,
    pub verdict: String,
    pub files: Vec<PathBuf>,
}

/// Per-joint RMSE ordering, worst controller first.
pub fn rmse_verdict(table: &ComparisonTable) -> String {
    let mut out = String::new();
    let mut smc_worst = true;
    for j in 0..2 {
        let mut ranked: Vec<_> = table.rows.iter().map(|r| (r.label.as_str(), r.metrics.rmse[j])).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        smc_worst &= ranked.first().map(|r| r.0) == Some("smc");
        let chain: Vec<String> = ranked.iter().map(|(l, v)| format!("{l} ({v:.3e})")).collect();
        let _ = writeln!(out, "joint {} RMSE, worst to best: {}", j + 1, chain.join(" > "));
    }
    let _ = writeln!(
        out,
        "SMC has the largest RMSE on both joints: {}",
        if smc_worst { "yes" } else { "no" }
    );
    out
}

fn overlay_plots(traces: &[Trace]) -> [(String, String); 3] {
    let t: Vec<f64> = traces[0].rows.iter().map(|r| r.t).collect();
    let pick = |f: fn(&crate::sim::TraceRow) -> crate::Vec2| -> Vec<[Vec<f64>; 2]> {
        traces.iter().map(|tr| tr.series(f).1).collect()
    };
    let q = pick(|r| r.q);
    let qd = traces[0].series(|r| r.qd).1;
    let e = pick(|r| r.e);
    let tau = pick(|r| r.tau);
    let names: Vec<String> = traces.iter().map(|tr| tr.meta.controller.name().to_uppercase()).collect();
    let panels = |ylabel: &str, data: &[[Vec<f64>; 2]], desired: Option<&[Vec<f64>; 2]>| -> String {
        let panels: Vec<plot::Panel> = (0..2)
            .map(|j| {
                let mut series: Vec<plot::Series> = data
                    .iter()
                    .zip(&names)
                    .enumerate()
                    .map(|(i, (ys, name))| plot::Series {
                        label: name.clone(),
                        color: plot::PALETTE[i % plot::PALETTE.len()],
                        dashed: false,
                        x: &t,
                        y: &ys[j],
                    })
                    .collect();
                if let Some(d) = desired {
                    series.push(plot::Series {
                        label: "desired".into(),
                        color: plot::PALETTE[3],
                        dashed: true,
                        x: &t,
                        y: &d[j],
                    });
                }
                plot::Panel {
                    ylabel: format!("{ylabel} joint {}", j + 1),
                    series,
                }
            })
            .collect();
        plot::render(&format!("{} comparison", ylabel.split(' ').next().unwrap_or("")), "time (s)", &panels)
    };
    [
        ("tracking_overlay.svg".into(), panels("angle (rad)", &q, Some(&qd))),
        ("error_overlay.svg".into(), panels("error (rad)", &e, None)),
        ("torque_overlay.svg".into(), panels("torque (N·m)", &tau, None)),
    ]
}

/// Runs all three controllers on the same scenario, concurrently, and
/// writes one trace per controller, `comparison.csv`, `comparison.txt`,
/// `scenario.json` and overlay plots.
pub fn cmd_compare(config: Option<&Path>, out: &Path, ov: &Overrides) -> Result<CompareReport, CliError> {
    let sc = load_scenario(config, ov)?;
    log::info!("comparing controllers for {} s (scenario {})", sc.t_end, sc.hash());
    let results: Vec<Result<Trace, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = ControllerKind::ALL
            .iter()
            .map(|&k| {
                let sc = sc.with_controller(k);
                s.spawn(move || run(&sc))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let traces = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let labelled: Vec<(String, Trace)> = traces
        .iter()
        .map(|t| (t.meta.controller.name().to_string(), t.clone()))
        .collect();
    let table = compare(&labelled)?;
    let verdict = rmse_verdict(&table);

    let mut staged = Staged::new(out)?;
    for tr in &traces {
        staged.write(&format!("trace_{}.csv", tr.meta.controller.name()), |w| {
            csv::write_rows(&tr.rows, w)
        })?;
    }
    staged.text("comparison.csv", &table.to_csv())?;
    staged.text("comparison.txt", &format!("{}\n{}", table.to_text(), verdict))?;
    staged.text("scenario.json", &scenario_json(&sc))?;
    for (name, svg) in overlay_plots(&traces) {
        staged.text(&name, &svg)?;
    }
    let files = staged.commit()?;
    Ok(CompareReport {
        traces,
        table,
        verdict,
        files,
    })
}
