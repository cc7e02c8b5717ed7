//! Comparative statics of the green steady state in own-group homophily.

use serde::{Deserialize, Serialize};

use super::stability::tally_homophily_partial;
use super::{solve_steady_state, SolverOptions, Stability, SteadyStateReport};
use crate::dynamics::StepMap;
use crate::error::{Error, Result};
use crate::model::{normalize_split, Group, ModelParams};
use crate::numeric::{identity_minus, inverse};

/// Step in `h_g` for the re-solve estimate.
pub const RESOLVE_STEP: f64 = 1e-4;
/// Magnitudes below this count as a zero sign.
const SIGN_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensitivitySign {
    Positive,
    Negative,
    Zero,
}

impl SensitivitySign {
    pub fn of(x: f64) -> SensitivitySign {
        if x > SIGN_BAND {
            SensitivitySign::Positive
        } else if x < -SIGN_BAND {
            SensitivitySign::Negative
        } else {
            SensitivitySign::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            SensitivitySign::Positive => 1,
            SensitivitySign::Negative => -1,
            SensitivitySign::Zero => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomophilySensitivity {
    pub sign: SensitivitySign,
    /// Implicit-function estimate; absent at non-regular points.
    pub ift: Option<f64>,
    /// Finite difference of re-solved fixed points.
    pub resolved: f64,
    /// Set when the sign comes from the re-solve alone.
    pub flagged: bool,
}

fn safe_default_green(params: &ModelParams) -> bool {
    !params.green.default_risky(params.p)
}

/// Derivative of the next-period green `v = 1` fraction in `h_g` under the
/// report's map. The blue `v = 1` map does not depend on `h_g`.
fn map_homophily_partial(report: &SteadyStateReport) -> f64 {
    let params = &report.params;
    let s = &report.state;
    let closed_form = || {
        let g = &params.green;
        let a = g.homophily * g.pi * s.g1 + (1.0 - g.homophily) * params.blue.pi * s.b1;
        f64::from(g.degree) * (1.0 - a).powi(g.degree as i32 - 1) * (g.pi * s.g1 - params.blue.pi * s.b1)
    };
    match report.map {
        StepMap::General => tally_homophily_partial(params, s, Group::Green),
        StepMap::SimplifiedSplit => {
            if normalize_split(params).1 {
                0.0
            } else {
                closed_form()
            }
        }
        StepMap::FullHomophily => {
            if safe_default_green(params) {
                closed_form()
            } else {
                0.0
            }
        }
    }
}

/// `[(I - J)^-1]_{gg} * dg'/dh_g`.
fn ift_derivative(report: &SteadyStateReport) -> Option<f64> {
    let j = report.jacobian?;
    let inv = inverse(&identity_minus(&j))?;
    Some(inv[0][0] * map_homophily_partial(report))
}

/// Sign at a stable regular point: `sign(pi_g g(1) - pi_b b(1))` when green
/// defaults to safe, otherwise the sign of the implicit-function estimate.
pub(crate) fn regular_sign(report: &SteadyStateReport) -> Option<SensitivitySign> {
    let params = &report.params;
    if safe_default_green(params) && !(report.map == StepMap::SimplifiedSplit && normalize_split(params).1) {
        Some(SensitivitySign::of(params.green.pi * report.state.g1 - params.blue.pi * report.state.b1))
    } else {
        ift_derivative(report).map(SensitivitySign::of)
    }
}

fn resolve_at(report: &SteadyStateReport, hg: f64) -> Result<f64> {
    let mut params = report.params;
    params.green.homophily = hg;
    let opts = SolverOptions { tol: 1e-14, ..Default::default() };
    let r = solve_steady_state(&params, report.state, &opts)?;
    Ok(r.state.g1)
}

/// Derivative of green's `v = 1` steady state in `h_g`, by the implicit
/// function theorem and by re-solving at `h_g +- RESOLVE_STEP`.
pub fn homophily_sensitivity(report: &SteadyStateReport) -> Result<HomophilySensitivity> {
    match report.stability {
        Stability::Stable | Stability::NonRegular => {}
        other => {
            return Err(Error::Precondition(format!("sensitivity needs a stable fixed point, got {other:?}")));
        }
    }
    let h = report.params.green.homophily;
    let up = (h + RESOLVE_STEP).min(1.0);
    let down = (h - RESOLVE_STEP).max(0.0);
    let resolved = (resolve_at(report, up)? - resolve_at(report, down)?) / (up - down);
    if report.stability == Stability::NonRegular {
        return Ok(HomophilySensitivity { sign: SensitivitySign::of(resolved), ift: None, resolved, flagged: true });
    }
    let sign = regular_sign(report).unwrap_or(SensitivitySign::of(resolved));
    Ok(HomophilySensitivity { sign, ift: ift_derivative(report), resolved, flagged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DegreeThreshold {
    Finite(f64),
    Infinite,
}

/// Green degree above which more own-group homophily raises green's
/// steady-state adoption: `ln((pi_g - pi_b) / pi_g) / ln(1 - pi_b)`.
pub fn degree_threshold(pi_g: f64, pi_b: f64) -> Result<DegreeThreshold> {
    if !(pi_b > 0.0 && pi_b < 1.0) {
        return Err(Error::DegenerateLogBase(pi_b));
    }
    if pi_g <= pi_b {
        return Ok(DegreeThreshold::Infinite);
    }
    Ok(DegreeThreshold::Finite(((pi_g - pi_b) / pi_g).ln() / (1.0 - pi_b).ln()))
}
