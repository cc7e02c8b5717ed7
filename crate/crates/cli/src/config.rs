//! Run configuration: JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use homophily_core::abm::VRealization;
use homophily_core::dynamics::StepMap;
use homophily_core::equilibrium::{SolverOptions, SweepGrid};
use homophily_core::multicost::{CostValueModel, ProbeConfig};
use homophily_core::{validate_params, ModelParams, StateVector};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub steps: usize,
    pub map: Option<StepMap>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig { steps: 10_000, map: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub hg: Vec<f64>,
    pub dg: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let g = SweepGrid::uniform_hg(10, vec![1, 2, 4, 8]);
        SweepConfig { hg: g.hg, dg: g.dg }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbmConfig {
    pub population: usize,
    pub generations: usize,
    pub v: VRealization,
}

impl Default for AbmConfig {
    fn default() -> Self {
        AbmConfig { population: 100_000, generations: 30, v: VRealization::One }
    }
}

/// Stability probe settings for `multicost-verify`; the seed comes from
/// the top-level `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSettings {
    pub directions: usize,
    pub eps: f64,
    pub iterations: usize,
    pub tol: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        let p = ProbeConfig::default();
        ProbeSettings { directions: p.directions, eps: p.eps, iterations: p.iterations, tol: p.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<ModelParams>,
    pub initial: Option<StateVector>,
    pub solver: SolverOptions,
    pub dynamics: DynamicsConfig,
    pub sweep: SweepConfig,
    pub abm: AbmConfig,
    pub multicost: Option<CostValueModel>,
    pub probe: ProbeSettings,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Flag values layered over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub cg: Option<f64>,
    pub cb: Option<f64>,
    pub pig: Option<f64>,
    pub pib: Option<f64>,
    pub dg: Option<u32>,
    pub db: Option<u32>,
    pub hg: Option<f64>,
    pub hb: Option<f64>,
}

impl Overrides {
    fn touches_model(&self) -> bool {
        self.p.is_some()
            || self.cg.is_some()
            || self.cb.is_some()
            || self.pig.is_some()
            || self.pib.is_some()
            || self.dg.is_some()
            || self.db.is_some()
            || self.hg.is_some()
            || self.hb.is_some()
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if o.touches_model() {
            let m = self
                .model
                .as_mut()
                .ok_or_else(|| CliError::Config("model: parameter flags need a model section to override".into()))?;
            let set = |slot: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *slot = v;
                }
            };
            set(&mut m.p, o.p);
            set(&mut m.green.cost, o.cg);
            set(&mut m.blue.cost, o.cb);
            set(&mut m.green.pi, o.pig);
            set(&mut m.blue.pi, o.pib);
            set(&mut m.green.homophily, o.hg);
            set(&mut m.blue.homophily, o.hb);
            if let Some(d) = o.dg {
                m.green.degree = d;
            }
            if let Some(d) = o.db {
                m.blue.degree = d;
            }
        }
        Ok(())
    }

    /// Check invariants after overrides.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(m) = &self.model {
            validate_params(*m).map_err(|e| match e {
                homophily_core::Error::InvalidParams(v) => CliError::Config(format!("model.{v}")),
                other => CliError::Config(format!("model: {other}")),
            })?;
        }
        if let Some(s) = &self.initial {
            if !s.in_unit_cube() {
                return Err(CliError::Config(format!("initial: state outside [0,1]^4: {s:?}")));
            }
        }
        if self.solver.tol.is_nan() || self.solver.tol <= 0.0 {
            return Err(CliError::Config(format!("solver.tol: must be positive, got {}", self.solver.tol)));
        }
        if let Some(h) = self.sweep.hg.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return Err(CliError::Config(format!("sweep.hg: value outside [0, 1]: {h}")));
        }
        if self.sweep.dg.contains(&0) {
            return Err(CliError::Config("sweep.dg: degrees must be at least 1".into()));
        }
        if self.abm.population == 0 || self.abm.generations == 0 {
            return Err(CliError::Config("abm: population and generations must be at least 1".into()));
        }
        if let Some(mc) = &self.multicost {
            mc.validate().map_err(|e| CliError::Config(format!("multicost: {e}")))?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        self.model.ok_or_else(|| CliError::Config("model: missing".into()))
    }

    pub fn multicost(&self) -> Result<&CostValueModel, CliError> {
        self.multicost.as_ref().ok_or_else(|| CliError::Config("multicost: missing".into()))
    }

    pub fn probe_config(&self) -> ProbeConfig {
        let p = self.probe;
        ProbeConfig { directions: p.directions, eps: p.eps, iterations: p.iterations, tol: p.tol, seed: self.seed }
    }
}

/// Read the file (if any), then apply flags and validate.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"model": {"p": 0.5,
        "green": {"cost": 0.8, "pi": 0.6, "degree": 2, "homophily": 0.5},
        "blue": {"cost": 0.2, "pi": 0.3, "degree": 2, "homophily": 1.0}}}"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.solver.tol, 1e-12);
        assert_eq!(cfg.dynamics.steps, 10_000);
        assert_eq!(cfg.sweep.dg, vec![1, 2, 4, 8]);
        assert_eq!(cfg.sweep.hg.len(), 11);
        assert_eq!(cfg.seed, 0);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"homophily\": 0.5", "\"homophilly\": 0.5");
        let err = RunConfig::from_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("homophilly"), "{msg}");
        assert!(msg.contains("model.green"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = RunConfig::from_json(MINIMAL).unwrap();
        cfg.apply(&Overrides { hg: Some(0.7), dg: Some(4), seed: Some(9), ..Default::default() }).unwrap();
        let m = cfg.model.unwrap();
        assert_eq!(m.green.homophily, 0.7);
        assert_eq!(m.green.degree, 4);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn invalid_override_is_a_config_error() {
        let mut cfg = RunConfig::from_json(MINIMAL).unwrap();
        cfg.apply(&Overrides { pig: Some(1.5), ..Default::default() }).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("green.pi"), "{err}");
    }

    #[test]
    fn model_flags_without_model_fail() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply(&Overrides { p: Some(0.4), ..Default::default() }).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::from_json(MINIMAL).unwrap();
        cfg.initial = Some(StateVector::new(0.1, 0.7, 0.3, 1.0 / 3.0));
        cfg.out = Some("x.csv".into());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
