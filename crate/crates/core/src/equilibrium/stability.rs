//! Jacobians of the step maps and stability classification.

use serde::{Deserialize, Serialize};

use crate::dynamics::{normalize_state, step, StepMap};
use crate::error::{Error, Result};
use crate::model::{normalize_split, Group, ModelParams, StateVector, Value};
use crate::numeric::{spectral_radius, Matrix2};
use crate::signal::{composition_posterior, composition_weight, multinomial_coefficient};

/// Width of the band around `rho = 1` where linearization is inconclusive.
pub const MARGIN_BAND: f64 = 1e-6;
/// Posteriors closer than this to the cost make a composition's indicator
/// unstable under perturbation.
pub const REGULARITY_BAND: f64 = 1e-9;

pub const PROBE_RADIUS: f64 = 1e-3;
pub const PROBE_ITERATIONS: usize = 10_000;
/// Distance to the fixed point at which a probe counts as returned.
pub const PROBE_RETURN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
    NonRegular,
}

/// Outcome of iterating the map from perturbed copies of a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub returned: usize,
    pub total: usize,
}

impl ProbeResult {
    pub fn all_returned(&self) -> bool {
        self.returned == self.total
    }
}

fn pow_or_zero(x: f64, n: u32, coef: u32) -> f64 {
    // coef * x^(n - 1), zero when coef is zero even if x is.
    if coef == 0 {
        0.0
    } else {
        f64::from(coef) * x.powi(n as i32 - 1)
    }
}

/// Derivatives of the next-period `v` fraction of `observer` with respect to
/// the current `v` fractions of (own group, other group).
///
/// Indicators are held fixed, which is exact at regular points. Returns
/// `NonRegular` when some on-path posterior sits on the cost or an
/// off-path composition would gain mass under perturbation.
pub(crate) fn tally_partials(
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
    v: Value,
) -> Result<[f64; 2]> {
    let cost = params.group(observer).cost;
    let d = params.group(observer).degree;
    let s_own = 1.0 - state.get(observer, v);
    let s_oth = 1.0 - state.get(observer.other(), v);
    let mut own = 0.0;
    let mut oth = 0.0;
    for n_own in 0..=d {
        for n_oth in 0..=d - n_own {
            let w = composition_weight(params, observer, n_own, n_oth);
            if w == 0.0 {
                continue;
            }
            let d_own = w * pow_or_zero(s_own, n_own, n_own) * s_oth.powi(n_oth as i32);
            let d_oth = w * s_own.powi(n_own as i32) * pow_or_zero(s_oth, n_oth, n_oth);
            let risky = match composition_posterior(params, state, observer, n_own, n_oth) {
                Ok(belief) => {
                    if (belief - cost).abs() < REGULARITY_BAND {
                        return Err(Error::NonRegular(format!(
                            "{observer} posterior {belief} within {REGULARITY_BAND:e} of cost {cost} \
                             at composition ({n_own}, {n_oth})"
                        )));
                    }
                    belief >= cost
                }
                Err(_) => {
                    if d_own != 0.0 || d_oth != 0.0 {
                        return Err(Error::NonRegular(format!(
                            "{observer} off-path composition ({n_own}, {n_oth}) gains mass under perturbation"
                        )));
                    }
                    continue;
                }
            };
            match (v, risky) {
                // v = 1: next = 1 - sum_safe w q1, and dq1/da = -n (..)
                (Value::One, false) => {
                    own += d_own;
                    oth += d_oth;
                }
                // v = 0: next = sum_risky w q0
                (Value::Zero, true) => {
                    own -= d_own;
                    oth -= d_oth;
                }
                _ => {}
            }
        }
    }
    Ok([own, oth])
}

/// Smallest `|posterior - cost|` over every composition either group can
/// see with positive probability under some `v`. Indicators of the exact
/// map are locally constant within this distance.
pub fn regularity_margin(state: &StateVector, params: &ModelParams) -> f64 {
    let mut margin = f64::INFINITY;
    for observer in Group::ALL {
        let cost = params.group(observer).cost;
        let d = params.group(observer).degree;
        for n_own in 0..=d {
            for n_oth in 0..=d - n_own {
                if let Ok(belief) = composition_posterior(params, state, observer, n_own, n_oth) {
                    margin = margin.min((belief - cost).abs());
                }
            }
        }
    }
    margin
}

/// Derivative of the next-period `v = 1` fraction of `observer` with
/// respect to its own homophily, indicators held fixed.
pub(crate) fn tally_homophily_partial(params: &ModelParams, state: &StateVector, observer: Group) -> f64 {
    let own_p = params.group(observer);
    let oth_p = params.group(observer.other());
    let d = own_p.degree;
    let h = own_p.homophily;
    let s_own = 1.0 - state.get(observer, Value::One);
    let s_oth = 1.0 - state.get(observer.other(), Value::One);
    let x = h * own_p.pi * s_own;
    let y = (1.0 - h) * oth_p.pi * s_oth;
    let z = h * (1.0 - own_p.pi) + (1.0 - h) * (1.0 - oth_p.pi);
    let dx = own_p.pi * s_own;
    let dy = -oth_p.pi * s_oth;
    let dz = oth_p.pi - own_p.pi;
    let mut total = 0.0;
    for n_own in 0..=d {
        for n_oth in 0..=d - n_own {
            let rest = d - n_own - n_oth;
            let c = multinomial_coefficient(d, n_own, n_oth);
            let term = c
                * (pow_or_zero(x, n_own, n_own) * dx * y.powi(n_oth as i32) * z.powi(rest as i32)
                    + x.powi(n_own as i32) * pow_or_zero(y, n_oth, n_oth) * dy * z.powi(rest as i32)
                    + x.powi(n_own as i32) * y.powi(n_oth as i32) * pow_or_zero(z, rest, rest) * dz);
            if term == 0.0 {
                continue;
            }
            let cost = own_p.cost;
            let risky = match composition_posterior(params, state, observer, n_own, n_oth) {
                Ok(belief) => belief >= cost,
                Err(_) => params.p >= cost,
            };
            if !risky {
                total -= term;
            }
        }
    }
    total
}

fn block(params: &ModelParams, state: &StateVector, v: Value) -> Result<Matrix2> {
    let [gg, gb] = tally_partials(params, state, Group::Green, v)?;
    let [bb, bg] = tally_partials(params, state, Group::Blue, v)?;
    Ok([[gg, gb], [bg, bb]])
}

/// Jacobian of the `v = 1` block of the exact map in `(g(1), b(1))`.
pub fn jacobian_v1(state: &StateVector, params: &ModelParams) -> Result<Matrix2> {
    block(params, state, Value::One)
}

/// Jacobian of the `v = 0` block of the exact map in `(g(0), b(0))`.
pub fn jacobian_v0(state: &StateVector, params: &ModelParams) -> Result<Matrix2> {
    block(params, state, Value::Zero)
}

/// Green row of the simplified split map in `(g(1), b(1))`, green taken as
/// the high-cost group.
fn simplified_green_row(norm: &ModelParams, g1: f64, b1: f64) -> [f64; 2] {
    let green = &norm.green;
    let pi_b = norm.blue.pi;
    let h = green.homophily;
    let a = h * green.pi * g1 + (1.0 - h) * pi_b * b1;
    let lead = f64::from(green.degree) * (1.0 - a).powi(green.degree as i32 - 1);
    [lead * h * green.pi, lead * (1.0 - h) * pi_b]
}

/// Jacobian of the `v = 1` block of the simplified split map. The row of
/// the low-cost group is zero since its `v = 1` fraction is pinned at 1.
pub fn jacobian_v1_simplified(state: &StateVector, params: &ModelParams) -> Matrix2 {
    let (norm, swapped) = normalize_split(params);
    let s = normalize_state(state, swapped);
    let [gg, gb] = simplified_green_row(&norm, s.g1, s.b1);
    if swapped {
        [[0.0, 0.0], [gb, gg]]
    } else {
        [[gg, gb], [0.0, 0.0]]
    }
}

/// Jacobian of the `v = 1` block of the full-homophily map (diagonal).
pub fn jacobian_v1_full_homophily(state: &StateVector, params: &ModelParams) -> Matrix2 {
    let diag = |group: Group| {
        let gp = params.group(group);
        if gp.default_risky(params.p) {
            0.0
        } else {
            let g = state.get(group, Value::One);
            f64::from(gp.degree) * gp.pi * (1.0 - gp.pi * g).powi(gp.degree as i32 - 1)
        }
    };
    [[diag(Group::Green), 0.0], [0.0, diag(Group::Blue)]]
}

/// Both Jacobian blocks `(v = 1, v = 0)` of the given map.
pub fn map_jacobians(map: StepMap, state: &StateVector, params: &ModelParams) -> Result<(Matrix2, Matrix2)> {
    match map {
        StepMap::General => Ok((jacobian_v1(state, params)?, jacobian_v0(state, params)?)),
        StepMap::SimplifiedSplit => Ok((jacobian_v1_simplified(state, params), [[0.0; 2]; 2])),
        StepMap::FullHomophily => Ok((jacobian_v1_full_homophily(state, params), [[0.0; 2]; 2])),
    }
}

pub fn stability_from_radius(rho: f64) -> Stability {
    if rho < 1.0 - MARGIN_BAND {
        Stability::Stable
    } else if rho > 1.0 + MARGIN_BAND {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Iterate the map from `fixed +- eps e_i` (clamped to the unit cube) and
/// count the starts that come back within [`PROBE_RETURN_TOL`].
pub fn probe_stability(map: StepMap, fixed: &StateVector, params: &ModelParams, eps: f64, max_iter: usize) -> ProbeResult {
    let mut returned = 0;
    let mut total = 0;
    for i in 0..4 {
        for sign in [1.0, -1.0] {
            total += 1;
            let mut a = fixed.to_array();
            a[i] += sign * eps;
            let mut x = StateVector::from_array(a).clamped();
            if probe_returns(map, &mut x, fixed, params, max_iter) {
                returned += 1;
            }
        }
    }
    ProbeResult { returned, total }
}

fn probe_returns(map: StepMap, x: &mut StateVector, fixed: &StateVector, params: &ModelParams, max_iter: usize) -> bool {
    for _ in 0..=max_iter {
        if x.sup_distance(fixed) <= PROBE_RETURN_TOL {
            return true;
        }
        let Ok(next) = step(map, x, params) else {
            return false;
        };
        // Settled somewhere else.
        if next.sup_distance(x) <= 1e-15 {
            return next.sup_distance(fixed) <= PROBE_RETURN_TOL;
        }
        *x = next;
    }
    false
}

/// Spectral radius over both decoupled blocks.
pub fn block_radius(j1: &Matrix2, j0: &Matrix2) -> f64 {
    spectral_radius(j1).max(spectral_radius(j0))
}
