//! Tracking metrics and Lyapunov monitoring.

use std::fmt::Write as _;

use crate::sim::{Trace, TraceRow};
use crate::{Error, Result, Vec2};

/// Summary statistics of one trace, per joint unless noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rmse: Vec2,
    pub max_abs_error: Vec2,
    /// `∫|e| dt`, trapezoidal.
    pub iae: Vec2,
    /// `∫|τ| dt`, trapezoidal.
    pub control_effort: Vec2,
    /// Total variation of τ over the run, per second.
    pub chatter_index: Vec2,
}

fn trapezoid(rows: &[TraceRow], f: impl Fn(&TraceRow) -> Vec2) -> Vec2 {
    rows.windows(2)
        .map(|w| (f(&w[0]) + f(&w[1])) * (0.5 * (w[1].t - w[0].t)))
        .fold(Vec2::zeros(), |acc, v| acc + v)
}

pub fn tracking_metrics(trace: &Trace) -> Result<Metrics> {
    let rows = &trace.rows;
    if rows.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = rows.len() as f64;
    let sq = rows
        .iter()
        .fold(Vec2::zeros(), |acc, r| acc + r.e.component_mul(&r.e));
    let max_abs = rows
        .iter()
        .fold(Vec2::zeros(), |acc, r| acc.zip_map(&r.e, |a, e| a.max(e.abs())));
    let variation = rows
        .windows(2)
        .fold(Vec2::zeros(), |acc, w| acc + (w[1].tau - w[0].tau).abs());
    let span = rows[rows.len() - 1].t - rows[0].t;
    Ok(Metrics {
        rmse: (sq / n).map(f64::sqrt),
        max_abs_error: max_abs,
        iae: trapezoid(rows, |r| r.e.abs()),
        control_effort: trapezoid(rows, |r| r.tau.abs()),
        chatter_index: if span > 0.0 { variation / span } else { Vec2::zeros() },
    })
}

/// Behaviour of `L = ½ σᵀσ` at the controller ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub t: Vec<f64>,
    pub l: Vec<f64>,
    /// ‖σ‖ at each tick.
    pub sigma_norm: Vec<f64>,
    pub l_initial: f64,
    pub l_final: f64,
    /// Increments `ΔL` above this count as increases.
    pub tol: f64,
}

impl LyapunovReport {
    /// Share of tick-to-tick intervals where `L` grew by more than `tol`.
    pub fn fraction_increasing(&self) -> f64 {
        self.fraction_increasing_outside(0.0)
    }

    /// As [`LyapunovReport::fraction_increasing`], counting only intervals
    /// that start with ‖σ‖ above `width`.
    pub fn fraction_increasing_outside(&self, width: f64) -> f64 {
        let (mut total, mut up) = (0usize, 0usize);
        for i in 1..self.l.len() {
            if self.sigma_norm[i - 1] > width {
                total += 1;
                if self.l[i] - self.l[i - 1] > self.tol {
                    up += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            up as f64 / total as f64
        }
    }
}

/// Uses the controller ticks when the trace has them, else the rows.
pub fn lyapunov_report(trace: &Trace, tol: f64) -> Result<LyapunovReport> {
    let (t, l, sigma_norm): (Vec<f64>, Vec<f64>, Vec<f64>) = if trace.ticks.is_empty() {
        let r = &trace.rows;
        (
            r.iter().map(|r| r.t).collect(),
            r.iter().map(|r| r.lyapunov).collect(),
            r.iter().map(|r| r.sigma.norm()).collect(),
        )
    } else {
        let k = &trace.ticks;
        (
            k.iter().map(|k| k.t).collect(),
            k.iter().map(|k| k.lyapunov).collect(),
            k.iter().map(|k| k.sigma.norm()).collect(),
        )
    };
    let (Some(&l_initial), Some(&l_final)) = (l.first(), l.last()) else {
        return Err(Error::EmptyTrace);
    };
    Ok(LyapunovReport {
        t,
        l,
        sigma_norm,
        l_initial,
        l_final,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub metrics: Metrics,
}

/// Metrics for several runs on a shared time grid, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn get(&self, label: &str) -> Option<&Metrics> {
        self.rows.iter().find(|r| r.label == label).map(|r| &r.metrics)
    }

    /// Per-joint `rmse(a) / rmse(b)`.
    pub fn rmse_ratio(&self, a: &str, b: &str) -> Option<Vec2> {
        Some(self.get(a)?.rmse.component_div(&self.get(b)?.rmse))
    }

    pub const CSV_HEADER: &'static str = "controller,rmse1,rmse2,max_abs_e1,max_abs_e2,iae1,iae2,effort1,effort2,chatter1,chatter2";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = write!(out, "{}", r.label);
            for v in [m.rmse, m.max_abs_error, m.iae, m.control_effort, m.chatter_index] {
                let _ = write!(out, ",{:.16e},{:.16e}", v[0], v[1]);
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width text table with pairwise RMSE ratios underneath.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            "controller", "rmse1", "rmse2", "max|e1|", "max|e2|", "chatter1", "chatter2"
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:<10} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.label,
                m.rmse[0],
                m.rmse[1],
                m.max_abs_error[0],
                m.max_abs_error[1],
                m.chatter_index[0],
                m.chatter_index[1]
            );
        }
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                let ratio = a.metrics.rmse.component_div(&b.metrics.rmse);
                let _ = writeln!(
                    out,
                    "rmse {}/{}: {:.4} {:.4}",
                    a.label, b.label, ratio[0], ratio[1]
                );
            }
        }
        out
    }
}

pub fn compare(traces: &[(String, Trace)]) -> Result<ComparisonTable> {
    if traces.len() < 2 {
        return Err(Error::TooFewTraces(traces.len()));
    }
    let (first_label, first) = &traces[0];
    for (label, tr) in &traces[1..] {
        let same = tr.rows.len() == first.rows.len()
            && tr.rows.iter().zip(&first.rows).all(|(a, b)| a.t == b.t);
        if !same {
            return Err(Error::GridMismatch(format!(
                "'{label}' ({} rows) does not share the time grid of '{first_label}' ({} rows)",
                tr.rows.len(),
                first.rows.len()
            )));
        }
    }
    let rows = traces
        .iter()
        .map(|(label, tr)| {
            Ok(ComparisonRow {
                label: label.clone(),
                metrics: tracking_metrics(tr)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable { rows })
}
