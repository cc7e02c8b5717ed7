//! The one-period mean-field map and trajectories built from it.
//!
//! Three step maps are provided:
//!
//! * [`step_tally`]: exact expectation over every friend composition. It is
//!   valid in every regime; [`step_general`] is the same map restricted to
//!   the split regime.
//! * [`step_simplified`]: closed form for the split regime when blues never
//!   abandon the risky action in the good state.
//! * [`step_full_homophily`]: the one-group map under full homophily.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_regime, normalize_split, Group, GroupParams, ModelParams, StateVector, Value};
use crate::numeric::largest_fixed_point_concave;
use crate::signal::{all_safe_likelihood, composition_posterior, composition_weight};

/// Sup-norm distance between successive states that counts as settled.
pub const SETTLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMap {
    General,
    SimplifiedSplit,
    FullHomophily,
}

/// Indicator of the risky action for a no-reveal composition. Off-path
/// compositions use the prior default; they never carry weight.
pub(crate) fn composition_is_risky(
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
    n_own: u32,
    n_other: u32,
) -> bool {
    let cost = params.group(observer).cost;
    match composition_posterior(params, state, observer, n_own, n_other) {
        Ok(belief) => belief >= cost,
        Err(_) => params.p >= cost,
    }
}

/// Next-period fractions of high-cost `observer` agents taking the risky
/// action, as `(v = 0, v = 1)`.
fn step_group(params: &ModelParams, state: &StateVector, observer: Group) -> (f64, f64) {
    let d = params.group(observer).degree;
    let mut next0 = 0.0;
    // Mass that stays safe when v = 1. Subtracting it from one avoids the
    // rounding in the sum of the weights.
    let mut safe1 = 0.0;
    for n_own in 0..=d {
        for n_other in 0..=d - n_own {
            let w = composition_weight(params, observer, n_own, n_other);
            if w == 0.0 {
                continue;
            }
            if composition_is_risky(params, state, observer, n_own, n_other) {
                next0 += w * all_safe_likelihood(state, observer, Value::Zero, n_own, n_other);
            } else {
                // Only a revealed success (v = 1) moves this agent to risky.
                safe1 += w * all_safe_likelihood(state, observer, Value::One, n_own, n_other);
            }
        }
    }
    (next0.min(1.0), (1.0 - safe1).clamp(0.0, 1.0))
}

/// Exact mean-field map by enumeration of friend compositions, valid in
/// every regime.
pub fn step_tally(state: &StateVector, params: &ModelParams) -> StateVector {
    let (g0, g1) = step_group(params, state, Group::Green);
    let (b0, b1) = step_group(params, state, Group::Blue);
    StateVector { g0, g1, b0, b1 }
}

fn check_state(state: &StateVector) -> Result<()> {
    if state.in_unit_cube() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("state outside [0,1]^4: {state:?}")))
    }
}

fn require_split(params: &ModelParams) -> Result<()> {
    let regime = classify_regime(params);
    if regime.is_split() {
        Ok(())
    } else {
        Err(Error::RegimeMismatch(format!("expected the split regime, found {:?}", regime.kind)))
    }
}

/// Mean-field map in the split regime (`c_g > p >= c_b`, either labeling).
pub fn step_general(state: &StateVector, params: &ModelParams) -> Result<StateVector> {
    require_split(params)?;
    check_state(state)?;
    Ok(step_tally(state, params))
}

pub(crate) fn normalize_state(state: &StateVector, swapped: bool) -> StateVector {
    if swapped {
        state.swapped()
    } else {
        *state
    }
}

fn simplified_green(g1: f64, green: &GroupParams, pi_blue: f64) -> f64 {
    let h = green.homophily;
    let a = h * green.pi * g1 + (1.0 - h) * pi_blue;
    1.0 - (1.0 - a).powi(green.degree as i32)
}

/// Closed-form map of the split regime with `b(1) = 1`.
pub fn step_simplified(state: &StateVector, params: &ModelParams) -> Result<StateVector> {
    require_split(params)?;
    check_state(state)?;
    let (norm, swapped) = normalize_split(params);
    let s = normalize_state(state, swapped);
    let next = StateVector {
        g0: 0.0,
        g1: simplified_green(s.g1, &norm.green, norm.blue.pi),
        b0: (1.0 - norm.blue.homophily * norm.blue.pi).powi(norm.blue.degree as i32),
        b1: 1.0,
    };
    Ok(if swapped { next.swapped() } else { next })
}

/// One-group map under full homophily.
///
/// For a group that defaults to the risky action this is the reduced map
/// along the equilibrium path: everyone risky when `v = 1`, and only agents
/// who see no high-cost friend at all when `v = 0`.
pub fn step_full_homophily(g: f64, group: &GroupParams, p: f64, v: Value) -> f64 {
    let d = group.degree as i32;
    match (group.default_risky(p), v) {
        (true, Value::One) => 1.0,
        (true, Value::Zero) => (1.0 - group.pi).powi(d),
        (false, Value::One) => 1.0 - (1.0 - group.pi * g).powi(d),
        (false, Value::Zero) => 0.0,
    }
}

fn step_full_homophily_state(state: &StateVector, params: &ModelParams) -> Result<StateVector> {
    if !params.is_full_homophily() {
        return Err(Error::RegimeMismatch("full-homophily map needs h = 1 for both groups".into()));
    }
    check_state(state)?;
    let mut next = StateVector::default();
    for group in Group::ALL {
        for v in Value::ALL {
            let x = step_full_homophily(state.get(group, v), params.group(group), params.p, v);
            next.set(group, v, x);
        }
    }
    Ok(next)
}

/// Largest root of the simplified green equation, in the normalized
/// (green = high-cost) labeling.
pub(crate) fn simplified_green_fixed_point(norm: &ModelParams) -> f64 {
    largest_fixed_point_concave(|g| simplified_green(g, &norm.green, norm.blue.pi))
}

/// Candidate steady state of the simplified split dynamics, in the caller's
/// labeling.
pub fn simplified_candidate(params: &ModelParams) -> Result<StateVector> {
    require_split(params)?;
    let (norm, swapped) = normalize_split(params);
    let s = StateVector {
        g0: 0.0,
        g1: simplified_green_fixed_point(&norm),
        b0: (1.0 - norm.blue.homophily * norm.blue.pi).powi(norm.blue.degree as i32),
        b1: 1.0,
    };
    Ok(if swapped { s.swapped() } else { s })
}

/// Whether, at `state`, every composition a risky-default (blue-role)
/// agent can see when `v = 1` keeps its posterior at or above its cost, so
/// that `b'(1) = 1`.
pub fn simplified_applicable_at(params: &ModelParams, state: &StateVector) -> bool {
    let (norm, swapped) = normalize_split(params);
    let s = normalize_state(state, swapped);
    let observer = Group::Blue;
    let d = norm.blue.degree;
    for n_own in 0..=d {
        for n_other in 0..=d - n_own {
            let w = composition_weight(&norm, observer, n_own, n_other);
            let on_path = w * all_safe_likelihood(&s, observer, Value::One, n_own, n_other) > 0.0;
            if on_path && !composition_is_risky(&norm, &s, observer, n_own, n_other) {
                return false;
            }
        }
    }
    true
}

/// Whether the simplified split dynamics hold at their own candidate
/// steady state.
pub fn check_simplified_applicable(params: &ModelParams) -> Result<bool> {
    let candidate = simplified_candidate(params)?;
    Ok(simplified_applicable_at(params, &candidate))
}

pub fn step(map: StepMap, state: &StateVector, params: &ModelParams) -> Result<StateVector> {
    match map {
        StepMap::General => {
            check_state(state)?;
            Ok(step_tally(state, params))
        }
        StepMap::SimplifiedSplit => step_simplified(state, params),
        StepMap::FullHomophily => step_full_homophily_state(state, params),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// States for `t = 0..=T`.
    pub states: Vec<StateVector>,
    pub params: ModelParams,
    pub map: StepMap,
    /// First `t` whose state is within [`SETTLE_TOL`] of the previous one.
    pub settled_at: Option<usize>,
}

pub fn iterate(initial: StateVector, params: &ModelParams, steps: usize, map: StepMap) -> Result<Trajectory> {
    check_state(&initial)?;
    if map == StepMap::SimplifiedSplit && !check_simplified_applicable(params)? {
        return Err(Error::RegimeMismatch(
            "simplified split map does not apply: some blue posterior falls below c_b when v = 1".into(),
        ));
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial);
    let mut settled_at = None;
    let mut current = initial;
    for t in 1..=steps {
        let next = step(map, &current, params)?;
        if settled_at.is_none() && next.sup_distance(&current) <= SETTLE_TOL {
            settled_at = Some(t);
        }
        states.push(next);
        current = next;
    }
    Ok(Trajectory { states, params: *params, map, settled_at })
}

/// `g_t(1) >= g_t(0)` and `b_t(1) >= b_t(0)` for every `t >= 1`.
pub fn check_monotonicity(trajectory: &Trajectory) -> bool {
    trajectory.states.iter().skip(1).all(|s| s.g1 >= s.g0 && s.b1 >= s.b0)
}
