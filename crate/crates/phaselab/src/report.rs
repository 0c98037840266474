//! Versioned JSON report payloads and CSV writers.
//!
//! Everything written here is deterministic for a fixed config and seed;
//! wall-clock metadata goes to a separate `run_meta.json` so the main
//! artifacts stay byte-identical across reruns.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::diagnostics::RegularityReport;
use crate::energy::EnergyBreakdown;
use crate::error::Result;
use crate::solver::{ContinuationReport, SolveReport, TraceEntry};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReportFile {
    pub schema_version: u32,
    pub gamma: f64,
    pub grid_n: usize,
    pub converged: bool,
    pub iterations_per_stage: Vec<usize>,
    pub polish_moves: usize,
    pub accepted_steps: usize,
    pub initial_energy: f64,
    pub energy: EnergyBreakdown,
    pub sup_norm: f64,
    pub w1p_norm: f64,
    pub residual_sup: Option<f64>,
    pub residual_nodes: usize,
}

impl SolveReportFile {
    pub fn new(report: &SolveReport, gamma: f64) -> SolveReportFile {
        SolveReportFile {
            schema_version: SCHEMA_VERSION,
            gamma,
            grid_n: report.u.grid().subdivisions(),
            converged: report.converged,
            iterations_per_stage: report.iterations_per_stage.clone(),
            polish_moves: report.polish_moves,
            accepted_steps: report.trace.len(),
            initial_energy: report.initial_energy,
            energy: report.final_energy,
            sup_norm: report.sup_norm,
            w1p_norm: report.w1p_norm,
            residual_sup: report.residual_sup,
            residual_nodes: report.residual_nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageSummary {
    pub gamma: f64,
    pub converged: bool,
    pub iterations: usize,
    pub polish_moves: usize,
    pub energy: f64,
    pub j0: f64,
    pub sup_norm: f64,
    pub w1p_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationReportFile {
    pub schema_version: u32,
    pub grid_n: usize,
    pub stage_gammas: Vec<f64>,
    pub stages: Vec<StageSummary>,
    pub j0_per_stage: Vec<f64>,
    pub w1p_gaps: Vec<f64>,
    pub polish_flips: usize,
    pub converged: bool,
    /// The default schedule was applied because the config omitted one.
    pub default_schedule_applied: bool,
}

impl ContinuationReportFile {
    pub fn new(report: &ContinuationReport, default_schedule: bool) -> ContinuationReportFile {
        let stages = report
            .stage_reports
            .iter()
            .zip(&report.stage_gammas)
            .zip(&report.j0_per_stage)
            .map(|((sr, &gamma), &j0)| StageSummary {
                gamma,
                converged: sr.converged,
                iterations: sr.iterations_per_stage.iter().sum(),
                polish_moves: sr.polish_moves,
                energy: sr.final_energy.total,
                j0,
                sup_norm: sr.sup_norm,
                w1p_norm: sr.w1p_norm,
            })
            .collect();
        ContinuationReportFile {
            schema_version: SCHEMA_VERSION,
            grid_n: report.final_u().grid().subdivisions(),
            stage_gammas: report.stage_gammas.clone(),
            stages,
            j0_per_stage: report.j0_per_stage.clone(),
            w1p_gaps: report.w1p_gaps.clone(),
            polish_flips: report.polish_flips,
            converged: report.converged,
            default_schedule_applied: default_schedule,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReportFile {
    pub schema_version: u32,
    pub report: RegularityReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetSummary {
    pub kink: f64,
    pub energy: f64,
    pub slope_minus: f64,
    pub slope_plus: f64,
    pub flux_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReportFile {
    pub schema_version: u32,
    pub description: String,
    pub note: String,
    pub energy: EnergyBreakdown,
    pub jet: Option<JetSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub p: f64,
    /// Declared integrability; `None` means infinity.
    pub q: Option<f64>,
    pub predicted_alpha: Option<f64>,
    pub regime: Option<String>,
    /// The q <= n borderline case: no gradient Hölder prediction.
    pub borderline: bool,
    pub growth_exponent: Option<f64>,
    pub growth_r_squared: Option<f64>,
    pub oscillation_exponent: Option<f64>,
    pub flux_residual: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReportFile {
    pub schema_version: u32,
    pub grid_n: usize,
    pub rows: Vec<SweepRow>,
}

fn fmt_opt(v: &Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "inf".into())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "gamma,p,q,predicted_alpha,regime,borderline,growth_exponent,growth_r_squared,oscillation_exponent,flux_residual,status\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.gamma,
            r.p,
            fmt_opt(&r.q),
            r.predicted_alpha.map(|v| v.to_string()).unwrap_or_default(),
            r.regime.clone().unwrap_or_default(),
            r.borderline,
            r.growth_exponent.map(|v| v.to_string()).unwrap_or_default(),
            r.growth_r_squared.map(|v| v.to_string()).unwrap_or_default(),
            r.oscillation_exponent.map(|v| v.to_string()).unwrap_or_default(),
            r.flux_residual.map(|v| v.to_string()).unwrap_or_default(),
            r.status
        );
    }
    out
}

/// Energy trace rows: `iteration,stage,epsilon,energy,grad_norm`.
pub fn energy_trace_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("iteration,stage,epsilon,energy,grad_norm\n");
    for t in trace {
        let _ = writeln!(out, "{},{},{},{},{}", t.iteration, t.stage, t.eps, t.energy, t.grad_norm);
    }
    out
}

/// Per-scale fit data: `radius,value`.
pub fn radii_csv(pairs: &[(f64, f64)]) -> String {
    let mut out = String::from("radius,value\n");
    for (r, v) in pairs {
        let _ = writeln!(out, "{r},{v}");
    }
    out
}

pub fn write_json<T: Serialize, P: AsRef<Path>>(path: P, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
