//! Config-driven pipelines behind the CLI subcommands: solve, continue,
//! diagnose, oracle, sweep, report.
//!
//! Artifacts are deterministic for a fixed config and seed: reports in
//! JSON, tabular data in CSV, optional SVG plots. Wall-clock metadata is
//! isolated in `run_meta.json`. Sweep cells run on the rayon pool and the
//! rows are collected in input order before a single writer emits them.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{DiagnosticsConfig, OracleConfig, RunConfig};
use crate::diagnostics::{
    dyadic_radii, flux_residual, free_boundary, growth_fit, modulus_of_continuity,
    nondegeneracy_check, oscillation_decay_fit, ModulusForm, RegularityReport,
};
use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Grid};
use crate::model::{predicted_alpha, profile_constant, AlphaRegime, BoundarySpec, ExponentInputs, ProblemSpec, SourceSpec};
use crate::oracle::{alt_phillips_profile, brute_force_minimizer_1d, two_phase_jet_1d};
use crate::report::{
    energy_trace_csv, radii_csv, sweep_csv, write_json, ContinuationReportFile, JetSummary,
    OracleReportFile, RegularityReportFile, SolveReportFile, SweepReportFile, SweepRow,
};
use crate::solver::{continuation, local_minimality_check, minimize, truncation_audit, ContinuationReport, SolveReport};
use crate::{plot, total_energy};

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(out_dir: PathBuf) -> Artifacts {
        Artifacts { out_dir, files: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }
}

fn open_out(config: &RunConfig, command: &str) -> Result<Artifacts> {
    let dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("phaselab_{command}")));
    std::fs::create_dir_all(&dir)?;
    let mut artifacts = Artifacts::new(dir);
    // timestamps live here and only here
    let meta = serde_json::json!({
        "command": command,
        "seed": config.seed.unwrap_or(0),
        "unix_time": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    artifacts.write("run_meta.json", &format!("{:#}\n", meta))?;
    Ok(artifacts)
}

fn grid_for(config: &RunConfig) -> Result<Grid> {
    Grid::build(config.problem.domain, config.solver.grid_n)
}

/// Run the configured diagnostics on one solution.
pub fn run_diagnostics(
    u: &DiscreteFunction,
    spec: &ProblemSpec,
    dcfg: &DiagnosticsConfig,
) -> RegularityReport {
    let grid = u.grid();
    let fb = free_boundary(u);
    let radii = dyadic_radii(grid, 0.5 * grid.domain().diameter());
    let mut report = RegularityReport {
        interface_points: fb.points.len(),
        ..RegularityReport::default()
    };

    if dcfg.growth && !fb.is_empty() {
        report.growth = growth_fit(u, &fb, &radii).ok();
    }
    if dcfg.nondegeneracy && !fb.is_empty() {
        report.nondegeneracy = nondegeneracy_check(u, &fb, &radii).ok();
    }
    if dcfg.flux && !fb.is_empty() {
        report.flux = flux_residual(u, &fb, spec);
    }
    if dcfg.oscillation {
        // prefer the positivity boundary: interface points on a zero
        // plateau see no oscillation at small scales
        let center = fb
            .positive_points()
            .first()
            .map(|p| p.position)
            .or_else(|| fb.points.first().map(|p| p.position))
            .unwrap_or_else(|| {
                let lo = grid.domain().lower();
                let len = grid.domain().lengths();
                [lo[0] + 0.5 * len[0], lo[1] + 0.5 * len[1]]
            });
        report.oscillation = oscillation_decay_fit(u, &center, &radii, spec.p).ok();
    }
    if dcfg.lipschitz {
        report.lipschitz = Some(modulus_of_continuity(u, ModulusForm::Lipschitz));
    }
    if dcfg.log_lipschitz {
        report.log_lipschitz = Some(modulus_of_continuity(u, ModulusForm::LogLipschitz));
    }
    if spec.gamma > 0.0 && spec.source.q > spec.dim() as f64 {
        report.predicted_alpha =
            predicted_alpha(&ExponentInputs::new(spec.p, spec.gamma, spec.source.q, spec.dim()))
                .ok();
    }
    report
}

fn write_diagnostic_artifacts(
    artifacts: &mut Artifacts,
    report: &RegularityReport,
    plot_on: bool,
) -> Result<()> {
    artifacts.write_json(
        "regularity_report.json",
        &RegularityReportFile { schema_version: crate::config::SCHEMA_VERSION, report: report.clone() },
    )?;
    if let Some(g) = &report.growth {
        let pairs: Vec<(f64, f64)> = g
            .scales
            .iter()
            .map(|&r| (r, g.constant * r.powf(g.exponent)))
            .collect();
        artifacts.write("growth_scales.csv", &radii_csv(&pairs))?;
        if plot_on {
            artifacts.write(
                "plots/growth_fit.svg",
                &plot::loglog_svg(&pairs, g.exponent, g.constant, "growth: sup u+ over B_r"),
            )?;
        }
    }
    if let Some(o) = &report.oscillation {
        if !o.degenerate {
            let pairs: Vec<(f64, f64)> = o
                .fit
                .scales
                .iter()
                .map(|&r| (r, o.fit.constant * r.powf(o.fit.exponent)))
                .collect();
            artifacts.write("oscillation_scales.csv", &radii_csv(&pairs))?;
        }
    }
    if let Some(nd) = &report.nondegeneracy {
        artifacts.write("nondegeneracy_scales.csv", &radii_csv(&nd.per_radius))?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub artifacts: Artifacts,
    /// `Some` when `--check` ran: minimality and truncation audits.
    pub check_passed: Option<bool>,
}

/// Solve a γ > 0 instance and write solution, report, and trace.
pub fn cmd_solve(config: &RunConfig, check: bool) -> Result<SolveOutcome> {
    config.validate()?;
    let spec = config.to_spec();
    if spec.gamma <= 0.0 {
        return Err(Error::Config("solve needs gamma > 0; use the continue command".into()));
    }
    let grid = grid_for(config)?;
    let params = config.to_params();
    let report = minimize(&spec, &grid, &params, None)?;

    let mut artifacts = open_out(config, "solve")?;
    artifacts.write("solution.csv", &report.u.to_csv())?;
    artifacts.write_json("solve_report.json", &SolveReportFile::new(&report, spec.gamma))?;
    artifacts.write("energy_trace.csv", &energy_trace_csv(&report.trace))?;
    if config.plot {
        if let Some(svg) = plot::profile_svg(&report.u, "solution") {
            artifacts.write("plots/solution.svg", &svg)?;
        }
    }

    let check_passed = if check {
        let h2 = grid.h_max() * grid.h_max();
        let tol = 1e-8 * report.final_energy.total.abs().max(1.0);
        let audit = local_minimality_check(&report.u, &spec, 100, h2, tol, params.seed)?;
        let level = spec.boundary.sup_abs(&grid) + 1.0;
        let (ju, jt) = truncation_audit(&report.u, &spec, level)?;
        Some(audit.passed && jt >= ju - 1e-10 && report.converged)
    } else {
        None
    };
    Ok(SolveOutcome { report, artifacts, check_passed })
}

#[derive(Debug)]
pub struct ContinueOutcome {
    pub report: ContinuationReport,
    pub regularity: RegularityReport,
    pub artifacts: Artifacts,
    pub check_passed: Option<bool>,
}

/// Drive the γ → 0 continuation and write per-stage reports plus the
/// final regularity report.
pub fn cmd_continue(config: &RunConfig, check: bool) -> Result<ContinueOutcome> {
    config.validate()?;
    let spec = config.to_spec();
    if spec.gamma != 0.0 {
        return Err(Error::Config("continue targets gamma = 0; set problem.gamma to 0".into()));
    }
    let grid = grid_for(config)?;
    let params = config.to_params();
    let (schedule, defaulted) = config.schedule();
    let report = continuation(&spec, &grid, &schedule, &params)?;

    let regularity = run_diagnostics(report.final_u(), &spec, &config.diagnostics);

    let mut artifacts = open_out(config, "continue")?;
    artifacts.write("solution.csv", &report.final_u().to_csv())?;
    artifacts.write_json(
        "continuation_report.json",
        &ContinuationReportFile::new(&report, defaulted),
    )?;
    artifacts.write("energy_trace.csv", &energy_trace_csv(&report.final_report().trace))?;
    write_diagnostic_artifacts(&mut artifacts, &regularity, config.plot)?;
    if config.plot {
        if let Some(svg) = plot::profile_svg(report.final_u(), "continuation limit") {
            artifacts.write("plots/solution.svg", &svg)?;
        }
    }

    let check_passed = if check {
        let jump = (spec.lambda_plus - spec.lambda_minus) / (spec.p - 1.0);
        let flux_ok = match regularity.worst_flux_residual() {
            Some(worst) => worst <= 0.05 * jump,
            None => true, // empty interface: flagged by interface_points = 0
        };
        Some(flux_ok && report.converged)
    } else {
        None
    };
    Ok(ContinueOutcome { report, regularity, artifacts, check_passed })
}

#[derive(Debug)]
pub struct DiagnoseOutcome {
    pub regularity: RegularityReport,
    pub artifacts: Artifacts,
    pub check_passed: Option<bool>,
}

/// Diagnose a solution: either one loaded from CSV or a fresh solve of
/// the configured instance.
pub fn cmd_diagnose(config: &RunConfig, check: bool) -> Result<DiagnoseOutcome> {
    config.validate()?;
    let spec = config.to_spec();
    let grid = grid_for(config)?;
    let u = match &config.diagnostics.input_solution {
        Some(path) => DiscreteFunction::read_csv(grid.clone(), path)?,
        None => {
            if spec.gamma > 0.0 {
                minimize(&spec, &grid, &config.to_params(), None)?.u
            } else {
                let (schedule, _) = config.schedule();
                continuation(&spec, &grid, &schedule, &config.to_params())?.final_u().clone()
            }
        }
    };
    let regularity = run_diagnostics(&u, &spec, &config.diagnostics);
    let mut artifacts = open_out(config, "diagnose")?;
    artifacts.write("solution.csv", &u.to_csv())?;
    write_diagnostic_artifacts(&mut artifacts, &regularity, config.plot)?;
    if config.plot {
        if let Some(svg) = plot::profile_svg(&u, "diagnosed solution") {
            artifacts.write("plots/solution.svg", &svg)?;
        }
    }

    let check_passed = if check {
        let mut ok = true;
        if let Some(g) = &regularity.growth {
            ok &= g.r_squared >= 0.95;
        }
        if let Some(o) = &regularity.oscillation {
            if !o.degenerate {
                ok &= o.fit.r_squared >= 0.95;
            }
        }
        Some(ok)
    } else {
        None
    };
    Ok(DiagnoseOutcome { regularity, artifacts, check_passed })
}

#[derive(Debug)]
pub struct OracleOutcome {
    pub artifacts: Artifacts,
}

/// Emit an oracle solution in the standard artifact formats.
pub fn cmd_oracle(config: &RunConfig) -> Result<OracleOutcome> {
    config.validate()?;
    let spec = config.to_spec();
    let grid = grid_for(config)?;
    let which = config
        .oracle
        .as_ref()
        .ok_or_else(|| Error::Config("the oracle command needs an `oracle` config section".into()))?;

    let (solution, jet) = match which {
        OracleConfig::AltPhillips { fb_location } => {
            let sol =
                alt_phillips_profile(spec.p, spec.gamma, spec.lambda_plus, *fb_location, &grid)?;
            (sol, None)
        }
        OracleConfig::Jet { left_value, right_value } => {
            let jet = two_phase_jet_1d(*left_value, *right_value, &spec, &grid)?;
            (
                jet.solution.clone(),
                Some(JetSummary {
                    kink: jet.kink,
                    energy: jet.energy,
                    slope_minus: jet.slope_minus,
                    slope_plus: jet.slope_plus,
                    flux_residual: jet.flux_residual,
                }),
            )
        }
        OracleConfig::BruteForce { starts } => {
            let u = brute_force_minimizer_1d(&spec, &grid, *starts, config.seed.unwrap_or(0))?;
            (
                crate::oracle::OracleSolution {
                    description: format!("brute-force minimizer, {starts} starts"),
                    u,
                    note: "multi-start cyclic coordinate descent with golden-section node solves"
                        .into(),
                },
                None,
            )
        }
    };

    let energy = total_energy(&solution.u, &spec)?;
    let mut artifacts = open_out(config, "oracle")?;
    artifacts.write("oracle_solution.csv", &solution.u.to_csv())?;
    artifacts.write_json(
        "oracle_report.json",
        &OracleReportFile {
            schema_version: crate::config::SCHEMA_VERSION,
            description: solution.description.clone(),
            note: solution.note.clone(),
            energy,
            jet,
        },
    )?;
    if config.plot {
        if let Some(svg) = plot::profile_svg(&solution.u, &solution.description) {
            artifacts.write("plots/oracle.svg", &svg)?;
        }
    }
    Ok(OracleOutcome { artifacts })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub artifacts: Artifacts,
    pub check_passed: Option<bool>,
}

fn sweep_cell(config: &RunConfig, grid_n: usize, gamma: f64, p: f64, q: Option<f64>) -> SweepRow {
    let base = config.to_spec();
    let n_dim = base.dim();
    let q_val = q.unwrap_or(f64::INFINITY);

    let mut row = SweepRow {
        gamma,
        p,
        q,
        predicted_alpha: None,
        regime: None,
        borderline: false,
        growth_exponent: None,
        growth_r_squared: None,
        oscillation_exponent: None,
        flux_residual: None,
        status: "ok".into(),
    };

    if gamma > 0.0 {
        match predicted_alpha(&ExponentInputs::new(p, gamma, q_val, n_dim)) {
            Ok(pred) => {
                row.predicted_alpha = Some(pred.alpha);
                row.regime = Some(
                    match pred.regime {
                        AlphaRegime::PHarmonicOpen => "p_harmonic_open",
                        AlphaRegime::GammaRate => "gamma_rate",
                        AlphaRegime::SourceRate => "source_rate",
                    }
                    .into(),
                );
            }
            Err(Error::BorderlineRegime { .. }) => row.borderline = true,
            Err(e) => {
                row.status = format!("failed: {e}");
                return row;
            }
        }
    }

    // measured columns come from a one-phase scan instance
    if gamma == 0.0 {
        row.status = "skipped: one-phase scan is defined for gamma > 0".into();
        return row;
    }
    if n_dim != 1 {
        row.status = "skipped: one-phase scan is 1-D".into();
        return row;
    }
    let result = (|| -> Result<()> {
        let c = profile_constant(p, gamma, base.lambda_plus)?;
        let beta = p / (p - gamma);
        let lengths = base.domain.lengths();
        let right = c * (0.5 * lengths[0]).powf(beta);
        let scan_spec = ProblemSpec {
            p,
            gamma,
            lambda_plus: base.lambda_plus,
            lambda_minus: 0.0,
            source: SourceSpec::zero(),
            boundary: BoundarySpec::Ends { left: 0.0, right },
            domain: base.domain,
        };
        let grid = Grid::build(base.domain, grid_n)?;
        let report = minimize(&scan_spec, &grid, &config.to_params(), None)?;
        let fb = free_boundary(&report.u);
        let radii = dyadic_radii(&grid, 0.5 * grid.domain().diameter());
        let growth = growth_fit(&report.u, &fb, &radii)?;
        row.growth_exponent = Some(growth.exponent);
        row.growth_r_squared = Some(growth.r_squared);
        if let Some(pt) = fb.points.first() {
            if let Ok(decay) = oscillation_decay_fit(&report.u, &pt.position, &radii, p) {
                if !decay.degenerate {
                    row.oscillation_exponent = Some(decay.fit.exponent);
                }
            }
        }
        let flux = flux_residual(&report.u, &fb, &scan_spec);
        row.flux_residual = flux
            .iter()
            .filter_map(|e| e.residual)
            .map(f64::abs)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |x| x.max(v))));
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("failed: {e}");
    }
    row
}

/// Scan the (γ, p, q) grid; one row per combination in deterministic
/// order, failed cells recorded and skipped over.
pub fn cmd_sweep(config: &RunConfig, check: bool) -> Result<SweepOutcome> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("the sweep command needs a `sweep` config section".into()))?;
    let grid_n = sweep.grid_n.unwrap_or(config.solver.grid_n);

    let mut cells = Vec::new();
    for &gamma in &sweep.gammas {
        for &p in &sweep.ps {
            for &q in &sweep.qs {
                cells.push((gamma, p, q));
            }
        }
    }
    // bounded worker pool; rows collected in input order
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(gamma, p, q)| sweep_cell(config, grid_n, gamma, p, q))
        .collect();

    let mut artifacts = open_out(config, "sweep")?;
    artifacts.write("sweep.csv", &sweep_csv(&rows))?;
    artifacts.write_json(
        "sweep_report.json",
        &SweepReportFile { schema_version: crate::config::SCHEMA_VERSION, grid_n, rows: rows.clone() },
    )?;

    let check_passed = if check {
        Some(rows.iter().all(|r| !r.status.starts_with("failed")))
    } else {
        None
    };
    Ok(SweepOutcome { rows, artifacts, check_passed })
}

/// Human-readable summary of the artifacts in a directory.
pub fn cmd_report(dir: &Path) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "artifacts in {}", dir.display());

    let solve_path = dir.join("solve_report.json");
    if solve_path.exists() {
        let file: SolveReportFile = serde_json::from_str(&std::fs::read_to_string(&solve_path)?)?;
        let _ = writeln!(
            out,
            "solve: gamma {} N {} converged {} energy {:.8} (dirichlet {:.6}, potential {:.6}, source {:.6})",
            file.gamma, file.grid_n, file.converged, file.energy.total, file.energy.dirichlet,
            file.energy.potential, file.energy.source
        );
        let _ = writeln!(
            out,
            "  sup {:.6}  W1p {:.6}  residual sup {:?} over {} nodes  steps {}",
            file.sup_norm, file.w1p_norm, file.residual_sup, file.residual_nodes, file.accepted_steps
        );
    }
    let cont_path = dir.join("continuation_report.json");
    if cont_path.exists() {
        let file: ContinuationReportFile =
            serde_json::from_str(&std::fs::read_to_string(&cont_path)?)?;
        let _ = writeln!(
            out,
            "continuation: N {} stages {:?} converged {}{}",
            file.grid_n,
            file.stage_gammas,
            file.converged,
            if file.default_schedule_applied { " (default schedule applied)" } else { "" }
        );
        for s in &file.stages {
            let _ = writeln!(
                out,
                "  gamma {:<6} J {:.8}  J0 {:.8}  iters {}  polish {}",
                s.gamma, s.energy, s.j0, s.iterations, s.polish_moves
            );
        }
        let _ = writeln!(out, "  W1p gaps {:?}", file.w1p_gaps);
    }
    let reg_path = dir.join("regularity_report.json");
    if reg_path.exists() {
        let file: RegularityReportFile =
            serde_json::from_str(&std::fs::read_to_string(&reg_path)?)?;
        let r = &file.report;
        let _ = writeln!(out, "regularity: {} interface points", r.interface_points);
        if let Some(g) = &r.growth {
            let _ = writeln!(
                out,
                "  growth exponent {:.4} (constant {:.4}, r2 {:.4})",
                g.exponent, g.constant, g.r_squared
            );
        }
        if let Some(o) = &r.oscillation {
            let _ = writeln!(
                out,
                "  oscillation alpha-hat {:.4} (r2 {:.4}){}{}",
                o.fit.exponent,
                o.fit.r_squared,
                if o.bmo_regime { " [BMO regime]" } else { "" },
                if o.degenerate { " [degenerate]" } else { "" }
            );
        }
        if let Some(nd) = &r.nondegeneracy {
            let _ = writeln!(out, "  nondegeneracy c_growth {:.4} c_sup {:.4}", nd.c_growth, nd.c_sup);
        }
        if let Some(worst) = r.worst_flux_residual() {
            let _ = writeln!(out, "  worst flux residual {:.6}", worst);
        }
        if let Some(m) = &r.lipschitz {
            let _ = writeln!(out, "  lipschitz constant {:.6} (max slope {:.6})", m.constant, m.max_slope);
        }
        if let Some(m) = &r.log_lipschitz {
            let _ = writeln!(out, "  log-lipschitz constant {:.6}", m.constant);
        }
        if let Some(a) = &r.predicted_alpha {
            let _ = writeln!(out, "  predicted alpha {:.4} ({:?})", a.alpha, a.regime);
        }
    }
    let sweep_path = dir.join("sweep_report.json");
    if sweep_path.exists() {
        let file: SweepReportFile = serde_json::from_str(&std::fs::read_to_string(&sweep_path)?)?;
        let _ = writeln!(out, "sweep: {} rows at N {}", file.rows.len(), file.grid_n);
        for r in &file.rows {
            let _ = writeln!(
                out,
                "  gamma {:<5} p {:<3} q {:<8} alpha {:<8} growth {:<8} {}{}",
                r.gamma,
                r.p,
                r.q.map(|v| v.to_string()).unwrap_or_else(|| "inf".into()),
                r.predicted_alpha.map(|v| format!("{v:.4}")).unwrap_or_default(),
                r.growth_exponent.map(|v| format!("{v:.4}")).unwrap_or_default(),
                if r.borderline { "[borderline] " } else { "" },
                r.status
            );
        }
    }
    let oracle_path = dir.join("oracle_report.json");
    if oracle_path.exists() {
        let file: OracleReportFile = serde_json::from_str(&std::fs::read_to_string(&oracle_path)?)?;
        let _ = writeln!(out, "oracle: {} | J {:.8}", file.description, file.energy.total);
        if let Some(j) = &file.jet {
            let _ = writeln!(
                out,
                "  kink {:.6} slopes ({:.4}, {:.4}) flux residual {:.3e}",
                j.kink, j.slope_minus, j.slope_plus, j.flux_residual
            );
        }
    }
    if out.lines().count() <= 1 {
        let _ = writeln!(out, "no phaselab reports found");
    }
    Ok(out)
}
