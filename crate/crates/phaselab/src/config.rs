//! JSON run configuration: a single versioned file describing the
//! instance, the solver, and what to measure. Unknown keys are rejected
//! and every module invariant is validated before any compute starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Domain;
use crate::model::{BoundarySpec, ProblemSpec, SourceFamily, SourceSpec};
use crate::solver::{ContinuationSchedule, SolverParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub family: SourceFamily,
    /// Declared integrability; omitted means infinity.
    #[serde(default)]
    pub q: Option<f64>,
}

impl SourceConfig {
    pub fn to_spec(&self) -> SourceSpec {
        SourceSpec { family: self.family.clone(), q: self.q.unwrap_or(f64::INFINITY) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub gamma: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub domain: Domain,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub source: Option<SourceConfig>,
}

impl ProblemConfig {
    pub fn to_spec(&self) -> ProblemSpec {
        ProblemSpec {
            p: self.p,
            gamma: self.gamma,
            lambda_plus: self.lambda_plus,
            lambda_minus: self.lambda_minus,
            source: self.source.as_ref().map(|s| s.to_spec()).unwrap_or_else(SourceSpec::zero),
            boundary: self.boundary.clone(),
            domain: self.domain,
        }
    }
}

fn default_grid_n() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default)]
    pub eps_min: Option<f64>,
    #[serde(default)]
    pub eps_shrink: Option<f64>,
    #[serde(default)]
    pub step_init: Option<f64>,
    #[serde(default)]
    pub step_shrink: Option<f64>,
    #[serde(default)]
    pub armijo: Option<f64>,
    #[serde(default)]
    pub tol_energy: Option<f64>,
    #[serde(default)]
    pub tol_grad: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub cascade: Option<bool>,
    #[serde(default)]
    pub polish_rounds: Option<usize>,
    #[serde(default)]
    pub polish_sweeps: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_n: default_grid_n(),
            eps0: None,
            eps_min: None,
            eps_shrink: None,
            step_init: None,
            step_shrink: None,
            armijo: None,
            tol_energy: None,
            tol_grad: None,
            max_iter: None,
            cascade: None,
            polish_rounds: None,
            polish_sweeps: None,
        }
    }
}

impl SolverConfig {
    pub fn to_params(&self, seed: u64) -> SolverParams {
        let d = SolverParams::default();
        SolverParams {
            eps0: self.eps0,
            eps_min: self.eps_min.unwrap_or(d.eps_min),
            eps_shrink: self.eps_shrink.unwrap_or(d.eps_shrink),
            step_init: self.step_init.unwrap_or(d.step_init),
            step_shrink: self.step_shrink.unwrap_or(d.step_shrink),
            armijo: self.armijo.unwrap_or(d.armijo),
            tol_energy: self.tol_energy.unwrap_or(d.tol_energy),
            tol_grad: self.tol_grad.unwrap_or(d.tol_grad),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            seed,
            cascade: self.cascade.unwrap_or(d.cascade),
            polish_rounds: self.polish_rounds.unwrap_or(d.polish_rounds),
            polish_sweeps: self.polish_sweeps.unwrap_or(d.polish_sweeps),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationConfig {
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "yes")]
    pub growth: bool,
    #[serde(default = "yes")]
    pub oscillation: bool,
    #[serde(default = "yes")]
    pub nondegeneracy: bool,
    #[serde(default = "yes")]
    pub flux: bool,
    #[serde(default = "yes")]
    pub lipschitz: bool,
    #[serde(default)]
    pub log_lipschitz: bool,
    /// Diagnose a previously written solution CSV instead of re-solving.
    #[serde(default)]
    pub input_solution: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            growth: true,
            oscillation: true,
            nondegeneracy: true,
            flux: true,
            lipschitz: true,
            log_lipschitz: false,
            input_solution: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub ps: Vec<f64>,
    /// Declared source integrability values; `null` entries mean infinity.
    pub qs: Vec<Option<f64>>,
    #[serde(default)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(rename_all = "snake_case")]
pub enum OracleConfig {
    AltPhillips { fb_location: f64 },
    Jet { left_value: f64, right_value: f64 },
    BruteForce { starts: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub continuation: Option<ContinuationConfig>,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<RunConfig> {
        let text = std::fs::read_to_string(&path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let spec = self.problem.to_spec();
        spec.validate()?;
        if self.solver.grid_n < 2 {
            return Err(Error::InvalidResolution(self.solver.grid_n));
        }
        self.to_params().validate()?;
        if let Some(c) = &self.continuation {
            ContinuationSchedule { gammas: c.gammas.clone() }.validate()?;
        }
        if let Some(s) = &self.sweep {
            if s.gammas.is_empty() || s.ps.is_empty() || s.qs.is_empty() {
                return Err(Error::Config("sweep lists must not be empty".into()));
            }
            if let Some(n) = s.grid_n {
                if n < 2 {
                    return Err(Error::InvalidResolution(n));
                }
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> ProblemSpec {
        self.problem.to_spec()
    }

    pub fn to_params(&self) -> SolverParams {
        self.solver.to_params(self.seed.unwrap_or(0))
    }

    /// The continuation schedule, and whether the default was applied.
    pub fn schedule(&self) -> (ContinuationSchedule, bool) {
        match &self.continuation {
            Some(c) => (ContinuationSchedule { gammas: c.gammas.clone() }, false),
            None => (ContinuationSchedule::default(), true),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "problem": {
            "p": 2.0, "gamma": 1.0,
            "lambda_plus": 1.0, "lambda_minus": 0.0,
            "domain": {"Interval": {"a": -1.0, "b": 1.0}},
            "boundary": {"Ends": {"left": 0.0, "right": 0.25}}
        }
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(config.solver.grid_n, 256);
        assert!(!config.plot);
        let (schedule, defaulted) = config.schedule();
        assert!(defaulted);
        assert_eq!(schedule.gammas.last(), Some(&0.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("\"plot\"", "x").replace(
            "\"schema_version\": 1,",
            "\"schema_version\": 1, \"surprise\": true,",
        );
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_weights_rejected_before_compute() {
        let bad = MINIMAL.replace("\"lambda_minus\": 0.0", "\"lambda_minus\": 2.0");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let bad = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn problem_round_trips_through_json() {
        let config = RunConfig::from_json(MINIMAL).unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.problem.to_spec(), config.problem.to_spec());
    }

    #[test]
    fn empty_sweep_lists_rejected() {
        let with_sweep = MINIMAL.replace(
            "\"schema_version\": 1,",
            "\"schema_version\": 1, \"sweep\": {\"gammas\": [], \"ps\": [2.0], \"qs\": [null]},",
        );
        assert!(RunConfig::from_json(&with_sweep).is_err());
    }
}
