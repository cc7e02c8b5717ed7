//! Steady states of the mean-field dynamics: solving, stability and
//! comparative statics in homophily.

mod stability;
mod statics;
mod sweep;

use serde::{Deserialize, Serialize};

pub use stability::{
    block_radius, jacobian_v0, jacobian_v1, jacobian_v1_full_homophily, jacobian_v1_simplified, map_jacobians,
    probe_stability, regularity_margin, stability_from_radius, ProbeResult, Stability, MARGIN_BAND, PROBE_ITERATIONS, PROBE_RADIUS,
    PROBE_RETURN_TOL, REGULARITY_BAND,
};
pub use statics::{
    degree_threshold, homophily_sensitivity, DegreeThreshold, HomophilySensitivity, SensitivitySign,
    RESOLVE_STEP,
};
pub use sweep::{sweep, SweepGrid, SweepRow, SweepTable};

use crate::dynamics::{check_simplified_applicable, normalize_state, simplified_green_fixed_point, step, StepMap};
use crate::error::{Error, Result};
use crate::model::{classify_regime, normalize_split, validate_params, GroupParams, ModelParams, StateVector};
use crate::numeric::{largest_fixed_point_concave, Matrix2};

/// Distinct fixed points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight on the new iterate; 1 is plain fixed-point iteration.
    pub damping: f64,
    /// Map to iterate; chosen from the parameters when absent.
    pub map: Option<StepMap>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: 1_000_000, damping: 1.0, map: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub params: ModelParams,
    pub map: StepMap,
    pub state: StateVector,
    /// Sup-norm of `map(state) - state`.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `v = 1` block in `(g(1), b(1))`; absent at non-regular points.
    pub jacobian: Option<Matrix2>,
    /// `v = 0` block in `(g(0), b(0))`.
    pub jacobian_v0: Option<Matrix2>,
    /// Largest spectral radius over both blocks.
    pub spectral_radius: Option<f64>,
    pub stability: Stability,
    pub probe: ProbeResult,
    /// Sign of the derivative of green's `v = 1` steady state in `h_g`, for
    /// stable regular points.
    pub hg_sensitivity_sign: Option<SensitivitySign>,
}

/// Map used when the caller does not pick one: the full-homophily map when
/// both groups are fully homophilous, the simplified split map where it
/// holds, and the exact map otherwise.
pub fn choose_map(params: &ModelParams) -> Result<StepMap> {
    if params.is_full_homophily() {
        return Ok(StepMap::FullHomophily);
    }
    if classify_regime(params).is_split() && check_simplified_applicable(params)? {
        return Ok(StepMap::SimplifiedSplit);
    }
    Ok(StepMap::General)
}

fn residual(map: StepMap, state: &StateVector, params: &ModelParams) -> Result<f64> {
    Ok(step(map, state, params)?.sup_distance(state))
}

/// Root of a concave one-dimensional green equation nearest to `g`: either
/// zero (when it is a root) or the largest root.
fn nearest_concave_root(map: impl Fn(f64) -> f64 + Copy, g: f64) -> f64 {
    let top = largest_fixed_point_concave(map);
    if map(0.0) == 0.0 && g.abs() < (g - top).abs() {
        0.0
    } else {
        top
    }
}

fn full_homophily_green(g: f64, group: &GroupParams) -> f64 {
    1.0 - (1.0 - group.pi * g).powi(group.degree as i32)
}

/// Replace the iterate with the exact root of the one-dimensional equation
/// when the map has one.
fn refine(map: StepMap, state: StateVector, params: &ModelParams) -> StateVector {
    match map {
        StepMap::SimplifiedSplit => {
            let (norm, swapped) = normalize_split(params);
            let s = normalize_state(&state, swapped);
            let h = norm.green.homophily;
            let pi_b = norm.blue.pi;
            let green = norm.green;
            let f = move |g: f64| {
                let a = h * green.pi * g + (1.0 - h) * pi_b;
                1.0 - (1.0 - a).powi(green.degree as i32)
            };
            let g1 = if f(0.0) == 0.0 { nearest_concave_root(f, s.g1) } else { simplified_green_fixed_point(&norm) };
            let refined = StateVector {
                g0: 0.0,
                g1,
                b0: (1.0 - norm.blue.homophily * norm.blue.pi).powi(norm.blue.degree as i32),
                b1: 1.0,
            };
            normalize_state(&refined, swapped)
        }
        StepMap::FullHomophily => {
            let mut out = state;
            for group in crate::model::Group::ALL {
                let gp = *params.group(group);
                if gp.default_risky(params.p) {
                    out.set(group, crate::model::Value::One, 1.0);
                    out.set(group, crate::model::Value::Zero, (1.0 - gp.pi).powi(gp.degree as i32));
                } else if !(gp.pi == 1.0 && gp.degree == 1) {
                    let g = out.get(group, crate::model::Value::One);
                    out.set(group, crate::model::Value::One, nearest_concave_root(|x| full_homophily_green(x, &gp), g));
                    out.set(group, crate::model::Value::Zero, 0.0);
                }
            }
            out
        }
        StepMap::General => state,
    }
}

/// Find a fixed point by damped iteration from `initial`, refined exactly
/// where the map reduces to one dimension.
pub fn solve_steady_state(params: &ModelParams, initial: StateVector, opts: &SolverOptions) -> Result<SteadyStateReport> {
    let params = validate_params(*params)?;
    if !initial.in_unit_cube() {
        return Err(Error::Precondition(format!("initial state outside [0,1]^4: {initial:?}")));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Precondition(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }
    let map = match opts.map {
        Some(m) => m,
        None => choose_map(&params)?,
    };
    let lambda = opts.damping;
    let mut x = initial;
    let mut iterations = 0;
    let mut prev_diff = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        let fx = step(map, &x, &params)?;
        let diff = fx.sup_distance(&x);
        // Contraction-aware stop: the distance to the fixed point is about
        // diff / (1 - rate).
        let rate = if prev_diff.is_finite() && prev_diff > 0.0 { (diff / prev_diff).min(0.999) } else { 0.0 };
        if diff == 0.0 || diff <= opts.tol * (1.0 - rate) {
            converged = true;
            break;
        }
        prev_diff = diff;
        let next = StateVector::from_array(std::array::from_fn(|i| {
            (1.0 - lambda) * x.to_array()[i] + lambda * fx.to_array()[i]
        }));
        x = next;
        iterations += 1;
    }
    let refined = refine(map, x, &params);
    let res = residual(map, &refined, &params)?;
    if res <= opts.tol {
        x = refined;
        converged = true;
    } else {
        converged = converged && residual(map, &x, &params)? <= opts.tol;
    }
    build_report(&params, map, x, iterations, converged)
}

pub(crate) fn build_report(
    params: &ModelParams,
    map: StepMap,
    state: StateVector,
    iterations: usize,
    converged: bool,
) -> Result<SteadyStateReport> {
    let res = residual(map, &state, params)?;
    let probe = probe_stability(map, &state, params, PROBE_RADIUS, PROBE_ITERATIONS);
    let (jacobian, jacobian_v0, spectral_radius, stability) = match map_jacobians(map, &state, params) {
        Ok((j1, j0)) => {
            let rho = block_radius(&j1, &j0);
            (Some(j1), Some(j0), Some(rho), stability_from_radius(rho))
        }
        Err(Error::NonRegular(_)) => (None, None, None, Stability::NonRegular),
        Err(e) => return Err(e),
    };
    let mut report = SteadyStateReport {
        params: *params,
        map,
        state,
        residual: res,
        converged,
        iterations,
        jacobian,
        jacobian_v0,
        spectral_radius,
        stability,
        probe,
        hg_sensitivity_sign: None,
    };
    if report.stability == Stability::Stable {
        report.hg_sensitivity_sign = statics::regular_sign(&report);
    }
    Ok(report)
}

/// Re-evaluate the stability tag of a report from its Jacobians.
pub fn classify_stability(report: &SteadyStateReport) -> Stability {
    match report.spectral_radius {
        Some(rho) => stability_from_radius(rho),
        None => Stability::NonRegular,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullHomophilyPoint {
    pub g0: f64,
    pub g1: f64,
    pub stability: Stability,
}

/// Closed-form steady states of one group under full homophily.
pub fn full_homophily_steady_states(group: &GroupParams, p: f64) -> Result<Vec<FullHomophilyPoint>> {
    if group.homophily != 1.0 {
        return Err(Error::Precondition(format!("full homophily needs h = 1, got {}", group.homophily)));
    }
    let d = group.degree as i32;
    if group.default_risky(p) {
        return Ok(vec![FullHomophilyPoint { g0: (1.0 - group.pi).powi(d), g1: 1.0, stability: Stability::Stable }]);
    }
    if group.pi == 1.0 && group.degree == 1 {
        return Err(Error::ContinuumOfSteadyStates);
    }
    let slope_at = |g: f64| f64::from(group.degree) * group.pi * (1.0 - group.pi * g).powi(d - 1);
    let zero = FullHomophilyPoint { g0: 0.0, g1: 0.0, stability: stability_from_radius(slope_at(0.0)) };
    let top = largest_fixed_point_concave(|g| full_homophily_green(g, group));
    if top == 0.0 {
        return Ok(vec![zero]);
    }
    Ok(vec![zero, FullHomophilyPoint { g0: 0.0, g1: top, stability: stability_from_radius(slope_at(top)) }])
}

fn dedup_push(out: &mut Vec<SteadyStateReport>, report: SteadyStateReport) {
    if out.iter().all(|r| r.state.sup_distance(&report.state) > DEDUP_TOL) {
        out.push(report);
    }
}

/// Starting point with both `v = 1` fractions at 1 and the `v = 0`
/// fractions at their prior defaults.
pub fn high_seed(params: &ModelParams) -> StateVector {
    let d = StateVector::prior_default(params);
    StateVector { g0: d.g0, g1: 1.0, b0: d.b0, b1: 1.0 }
}

/// Every fixed point the solver can locate, sorted by `(g(1), b(1))`.
///
/// One-dimensional maps are solved by bracketing, so unstable roots are
/// included. The exact map is iterated from the prior-default profile and
/// from [`high_seed`].
pub fn find_steady_states(params: &ModelParams, opts: &SolverOptions) -> Result<Vec<SteadyStateReport>> {
    let params = validate_params(*params)?;
    let map = match opts.map {
        Some(m) => m,
        None => choose_map(&params)?,
    };
    let mut out = Vec::new();
    match map {
        StepMap::FullHomophily => {
            let greens = full_homophily_steady_states(&params.green, params.p)?;
            let blues = full_homophily_steady_states(&params.blue, params.p)?;
            for g in &greens {
                for b in &blues {
                    let s = StateVector::new(g.g0, g.g1, b.g0, b.g1);
                    dedup_push(&mut out, build_report(&params, map, s, 0, true)?);
                }
            }
        }
        StepMap::SimplifiedSplit => {
            let low = refine(map, StateVector::prior_default(&params), &params);
            let high = refine(map, high_seed(&params), &params);
            for s in [low, high] {
                let conv = residual(map, &s, &params)? <= opts.tol;
                dedup_push(&mut out, build_report(&params, map, s, 0, conv)?);
            }
        }
        StepMap::General => {
            let o = SolverOptions { map: Some(map), ..*opts };
            for seed in [StateVector::prior_default(&params), high_seed(&params)] {
                dedup_push(&mut out, solve_steady_state(&params, seed, &o)?);
            }
        }
    }
    out.sort_by(|a, b| (a.state.g1, a.state.b1).partial_cmp(&(b.state.g1, b.state.b1)).unwrap());
    Ok(out)
}

/// Stable fixed point with the largest `g(1)`, falling back to the largest
/// `g(1)` overall when none is stable.
pub fn select_steady_state(reports: Vec<SteadyStateReport>) -> Option<SteadyStateReport> {
    let best_stable = reports.iter().rposition(|r| r.stability == Stability::Stable);
    match best_stable {
        Some(i) => reports.into_iter().nth(i),
        None => reports.into_iter().last(),
    }
}
