//! Grid sweeps of the steady state over green homophily and degree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_steady_states, select_steady_state, SolverOptions, SteadyStateReport};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub hg: Vec<f64>,
    pub dg: Vec<u32>,
}

impl SweepGrid {
    /// `h_g` in `{0, 1/steps, ..., 1}`.
    pub fn uniform_hg(steps: u32, dg: Vec<u32>) -> SweepGrid {
        SweepGrid { hg: (0..=steps).map(|i| f64::from(i) / f64::from(steps)).collect(), dg }
    }

    /// Grid points with `d_g` as the outer axis.
    pub fn points(&self) -> Vec<(f64, u32)> {
        self.dg.iter().flat_map(|&d| self.hg.iter().map(move |&h| (h, d))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hg: f64,
    pub dg: u32,
    pub report: Option<SteadyStateReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub grid: SweepGrid,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows for one green degree, in `h_g` order.
    pub fn column(&self, dg: u32) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.dg == dg)
    }
}

fn solve_point(base: &ModelParams, hg: f64, dg: u32, opts: &SolverOptions) -> SweepRow {
    let mut params = *base;
    params.green.homophily = hg;
    params.green.degree = dg;
    match find_steady_states(&params, opts) {
        Ok(reports) => SweepRow { hg, dg, report: select_steady_state(reports), error: None },
        Err(e) => SweepRow { hg, dg, report: None, error: Some(e.to_string()) },
    }
}

/// One report per grid point: the stable fixed point with the largest
/// green `v = 1` fraction. Failures are recorded per row.
pub fn sweep(grid: &SweepGrid, base: &ModelParams, opts: &SolverOptions) -> SweepTable {
    let rows = grid.points().into_par_iter().map(|(h, d)| solve_point(base, h, d, opts)).collect();
    SweepTable { grid: grid.clone(), rows }
}
