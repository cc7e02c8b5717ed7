//! Command-line front end: configuration, dispatch and file output.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use homophily_core::abm::{run_abm, SimConfig};
use homophily_core::dynamics::{iterate, StepMap};
use homophily_core::equilibrium::{find_steady_states, sweep, Stability, SweepGrid};
use homophily_core::multicost::{homophily_by_cost, incidental_homophily, verify_complete_learning};
use homophily_core::{Error, Group, StateVector, Value};
use serde::Serialize;
use thiserror::Error as ThisError;

pub use config::{parse_config, Overrides, RunConfig};
use output::{fmt_f64, fmt_opt, json, write_atomic, Csv};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("computation did not converge: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::RegimeMismatch(_)
            | Error::Precondition(_)
            | Error::InvalidModel(_)
            | Error::DegenerateLogBase(_)
            | Error::TallyDegree { .. } => CliError::Config(e.to_string()),
            Error::OffPath | Error::ContinuumOfSteadyStates | Error::NonRegular(_) | Error::EmptyGeneration(_) => {
                CliError::NonConvergence(e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Trajectory CSV: t, g0, g1, b0, b1.
    Dynamics,
    /// Every located steady state, as JSON reports.
    Steady,
    /// Steady state over the (h_g, d_g) grid.
    Sweep,
    /// Homophily by cost under color-blind links.
    Incidental,
    /// Complete-learning verdict for the multi-cost model.
    MulticostVerify,
    /// Agent-based simulation against the mean field.
    Abm,
}

impl Command {
    fn default_out(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics.csv",
            Command::Steady => "steady.json",
            Command::Sweep => "sweep.csv",
            Command::Incidental => "incidental.csv",
            Command::MulticostVerify => "multicost-verify.json",
            Command::Abm => "abm.csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "homophily", about = "Social learning with homophily: dynamics, steady states and simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; overrides `out` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Prior probability that the risky action is good.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Green cost.
    #[arg(long, global = true)]
    pub cg: Option<f64>,
    /// Blue cost.
    #[arg(long, global = true)]
    pub cb: Option<f64>,
    /// Green probability of being high-cost.
    #[arg(long, global = true)]
    pub pig: Option<f64>,
    /// Blue probability of being high-cost.
    #[arg(long, global = true)]
    pub pib: Option<f64>,
    /// Green degree.
    #[arg(long, global = true)]
    pub dg: Option<u32>,
    /// Blue degree.
    #[arg(long, global = true)]
    pub db: Option<u32>,
    /// Green homophily.
    #[arg(long, global = true)]
    pub hg: Option<f64>,
    /// Blue homophily.
    #[arg(long, global = true)]
    pub hb: Option<f64>,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            p: self.p,
            cg: self.cg,
            cb: self.cb,
            pig: self.pig,
            pib: self.pib,
            dg: self.dg,
            db: self.db,
            hg: self.hg,
            hb: self.hb,
        }
    }
}

/// Files produced by a command and whether every computation converged.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, String)>,
    pub failures: Vec<String>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn dynamics(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let params = cfg.model()?;
    let initial = cfg.initial.unwrap_or_else(|| StateVector::prior_default(&params));
    let map = cfg.dynamics.map.unwrap_or(StepMap::General);
    let traj = iterate(initial, &params, cfg.dynamics.steps, map)?;
    let mut csv = Csv::new(&["t", "g0", "g1", "b0", "b1"]);
    for (t, s) in traj.states.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(s.to_array().map(fmt_f64));
        csv.row(&row);
    }
    Ok(Artifacts { files: vec![(out.to_path_buf(), csv.into_string())], failures: vec![] })
}

fn steady(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let params = cfg.model()?;
    let reports = find_steady_states(&params, &cfg.solver)?;
    let failures = reports
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("steady state near {:?} has residual {:e}", r.state, r.residual))
        .collect();
    Ok(Artifacts { files: vec![(out.to_path_buf(), json(&reports)?)], failures })
}

pub const SWEEP_HEADER: [&str; 8] = ["h_g", "d_g", "g1_star", "b1_star", "b0_star", "stable", "hg_sensitivity_sign", "ok"];

fn sweep_cmd(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let params = cfg.model()?;
    let grid = SweepGrid { hg: cfg.sweep.hg.clone(), dg: cfg.sweep.dg.clone() };
    let table = sweep(&grid, &params, &cfg.solver);
    let mut csv = Csv::new(&SWEEP_HEADER);
    let mut failures = Vec::new();
    for row in &table.rows {
        let r = row.report.as_ref();
        let ok = r.is_some_and(|r| r.converged);
        if !ok {
            let why = row.error.clone().unwrap_or_else(|| "not converged".into());
            failures.push(format!("h_g = {}, d_g = {}: {why}", row.hg, row.dg));
        }
        csv.row(&[
            fmt_f64(row.hg),
            row.dg.to_string(),
            fmt_opt(r.map(|r| r.state.g1)),
            fmt_opt(r.map(|r| r.state.b1)),
            fmt_opt(r.map(|r| r.state.b0)),
            flag(r.is_some_and(|r| r.stability == Stability::Stable)),
            r.and_then(|r| r.hg_sensitivity_sign).map_or("NaN".to_string(), |s| s.as_i8().to_string()),
            flag(ok),
        ]);
    }
    Ok(Artifacts { files: vec![(out.to_path_buf(), csv.into_string())], failures })
}

#[derive(Serialize)]
struct IncidentalSummary {
    average_green: f64,
    average_blue: f64,
    lambda_g: f64,
    lambda_b: f64,
    lr_dominant: bool,
    c_bar: Option<f64>,
}

fn incidental(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let model = cfg.multicost()?;
    let table = homophily_by_cost(model)?;
    let avg = incidental_homophily(model)?;
    let mut csv = Csv::new(&["c", "r", "h_gc", "h_bc", "lambda_g", "lambda_b", "cbar_flag"]);
    for row in &table.rows {
        csv.row(&[
            fmt_f64(row.cost),
            fmt_f64(row.ratio),
            fmt_f64(row.green_own_share),
            fmt_f64(row.blue_own_share),
            fmt_f64(table.lambda_g),
            fmt_f64(table.lambda_b),
            flag(table.c_bar == Some(row.cost)),
        ]);
    }
    let summary = IncidentalSummary {
        average_green: avg.green,
        average_blue: avg.blue,
        lambda_g: table.lambda_g,
        lambda_b: table.lambda_b,
        lr_dominant: table.lr_dominant,
        c_bar: table.c_bar,
    };
    Ok(Artifacts {
        files: vec![(out.to_path_buf(), csv.into_string()), (sibling(out, ".summary.json"), json(&summary)?)],
        failures: vec![],
    })
}

fn multicost_verify(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let verdict = verify_complete_learning(cfg.multicost()?, &cfg.probe_config())?;
    Ok(Artifacts { files: vec![(out.to_path_buf(), json(&verdict)?)], failures: vec![] })
}

#[derive(Serialize)]
struct AbmSummary {
    seed: u64,
    population: usize,
    generations: usize,
    v: Value,
    terminal_gap: f64,
    max_gap: f64,
    terminal_high_cost_green: f64,
    terminal_high_cost_blue: f64,
    terminal_mean_field_green: f64,
    terminal_mean_field_blue: f64,
}

pub const ABM_HEADER: [&str; 13] = [
    "t",
    "v",
    "high_cost_g",
    "high_cost_b",
    "high_cost_se_g",
    "high_cost_se_b",
    "zero_cost_g",
    "zero_cost_b",
    "realized_g",
    "realized_b",
    "mean_field_g",
    "mean_field_b",
    "gap",
];

fn abm(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let params = cfg.model()?;
    let sim = SimConfig {
        params,
        population: cfg.abm.population,
        generations: cfg.abm.generations,
        seed: cfg.seed,
        v: cfg.abm.v,
        initial: cfg.initial,
    };
    let run = run_abm(&sim)?;
    let mut csv = Csv::new(&ABM_HEADER);
    for ((o, mf), gap) in run.outcomes.iter().zip(&run.mean_field).zip(&run.gaps) {
        csv.row(&[
            o.t.to_string(),
            (o.v.as_f64() as u8).to_string(),
            fmt_f64(o.high_cost.green),
            fmt_f64(o.high_cost.blue),
            fmt_f64(o.high_cost_se.green),
            fmt_f64(o.high_cost_se.blue),
            fmt_opt(o.zero_cost.green),
            fmt_opt(o.zero_cost.blue),
            fmt_f64(o.realized.green),
            fmt_f64(o.realized.blue),
            fmt_f64(mf.get(Group::Green, o.v)),
            fmt_f64(mf.get(Group::Blue, o.v)),
            fmt_f64(*gap),
        ]);
    }
    let last = run.outcomes.last().expect("at least one generation");
    let mf = run.mean_field.last().expect("at least one state");
    let summary = AbmSummary {
        seed: cfg.seed,
        population: cfg.abm.population,
        generations: cfg.abm.generations,
        v: run.v,
        terminal_gap: run.terminal_gap(),
        max_gap: run.gaps.iter().copied().fold(0.0, f64::max),
        terminal_high_cost_green: last.high_cost.green,
        terminal_high_cost_blue: last.high_cost.blue,
        terminal_mean_field_green: mf.get(Group::Green, run.v),
        terminal_mean_field_blue: mf.get(Group::Blue, run.v),
    };
    Ok(Artifacts {
        files: vec![(out.to_path_buf(), csv.into_string()), (sibling(out, ".summary.json"), json(&summary)?)],
        failures: vec![],
    })
}

/// Run `command`, write its artifacts atomically, and report non-convergence
/// after the files are on disk.
pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(command.default_out()));
    let artifacts = match command {
        Command::Dynamics => dynamics(cfg, &out)?,
        Command::Steady => steady(cfg, &out)?,
        Command::Sweep => sweep_cmd(cfg, &out)?,
        Command::Incidental => incidental(cfg, &out)?,
        Command::MulticostVerify => multicost_verify(cfg, &out)?,
        Command::Abm => abm(cfg, &out)?,
    };
    let mut written = Vec::new();
    for (path, text) in &artifacts.files {
        write_atomic(path, text)?;
        written.push(path.clone());
    }
    if !artifacts.failures.is_empty() {
        return Err(CliError::NonConvergence(artifacts.failures.join("; ")));
    }
    Ok(written)
}

/// Parse, dispatch, and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = parse_config(cli.config.as_deref(), &cli.overrides()).and_then(|cfg| dispatch(cli.command, &cfg));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("homophily: {e}");
            e.exit_code()
        }
    }
}
