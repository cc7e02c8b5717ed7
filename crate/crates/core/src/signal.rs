//! Signal profiles seen by a high-cost agent, their state-conditional
//! multinomial probabilities, the Bayes posterior on `v = 1`, and the
//! resulting action.
//!
//! A friend drawn from the previous generation falls in one of five cells:
//! a high-cost member of the own or the other group who took the risky
//! action, one who took the safe action, or a zero-cost agent (who always
//! takes the risky action and reveals nothing). Any observed high-cost
//! taker reveals `v` through the sign of its payoff. Absent such a reveal,
//! the observer updates on how many high-cost friends of each group played
//! safe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Group, ModelParams, StateVector, Value};

/// Below this joint likelihood a tally is treated as off the equilibrium path.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Took the risky action and got a nonnegative payoff.
    Plus,
    /// Took the risky action and got a negative payoff.
    Minus,
    /// Took the safe action.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostLabel {
    Zero,
    CostB,
    CostG,
}

/// One friend as seen by the observer: `(o, c, theta')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalObservation {
    outcome: Outcome,
    cost: CostLabel,
    group: Group,
}

impl SignalObservation {
    pub fn new(outcome: Outcome, cost: CostLabel, group: Group) -> Result<Self> {
        if cost == CostLabel::Zero && outcome != Outcome::Plus {
            return Err(Error::Precondition(
                "zero-cost agents always take the risky action with a nonnegative payoff".into(),
            ));
        }
        let matches_group = match cost {
            CostLabel::Zero => true,
            CostLabel::CostB => group == Group::Blue,
            CostLabel::CostG => group == Group::Green,
        };
        if !matches_group {
            return Err(Error::Precondition(format!("cost label {cost:?} cannot belong to group {group}")));
        }
        Ok(SignalObservation { outcome, cost, group })
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn cost(&self) -> CostLabel {
        self.cost
    }

    pub fn group(&self) -> Group {
        self.group
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Revealed {
    /// Some positive-cost friend took the risky action and succeeded.
    Plus,
    /// Some positive-cost friend took the risky action and failed.
    Minus,
    Nothing,
}

/// Counts of observation categories seen by one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignalTally {
    /// Blue high-cost friends who played safe.
    pub n_b: u32,
    /// Green high-cost friends who played safe.
    pub n_g: u32,
    /// Zero-cost friends (always `+`).
    pub n_zero: u32,
    pub revealed: Revealed,
}

impl SignalTally {
    pub fn unrevealed(n_b: u32, n_g: u32, n_zero: u32) -> Self {
        SignalTally { n_b, n_g, n_zero, revealed: Revealed::Nothing }
    }

    pub fn total(&self) -> u32 {
        self.n_b + self.n_g + self.n_zero
    }

    pub fn count(&self, group: Group) -> u32 {
        match group {
            Group::Blue => self.n_b,
            Group::Green => self.n_g,
        }
    }

    /// Tally with the blue and green counts exchanged.
    pub fn swapped(&self) -> Self {
        SignalTally { n_b: self.n_g, n_g: self.n_b, ..*self }
    }

    /// Summarize a full observation vector.
    pub fn from_observations(observations: &[SignalObservation]) -> Result<Self> {
        let mut tally = SignalTally::unrevealed(0, 0, 0);
        for obs in observations {
            match (obs.outcome, obs.cost) {
                (Outcome::Plus, CostLabel::Zero) => tally.n_zero += 1,
                (Outcome::None, CostLabel::CostB) => tally.n_b += 1,
                (Outcome::None, CostLabel::CostG) => tally.n_g += 1,
                (Outcome::Plus, _) => tally.revealed = merge_reveal(tally.revealed, Revealed::Plus)?,
                (Outcome::Minus, _) => tally.revealed = merge_reveal(tally.revealed, Revealed::Minus)?,
                (Outcome::None, CostLabel::Zero) => unreachable!("rejected by SignalObservation::new"),
            }
        }
        Ok(tally)
    }

    pub fn check(&self, degree: u32) -> Result<()> {
        let total = self.total();
        let fits = match self.revealed {
            Revealed::Nothing => total == degree,
            _ => total < degree,
        };
        if fits {
            Ok(())
        } else {
            Err(Error::TallyDegree { degree, total })
        }
    }
}

fn merge_reveal(current: Revealed, new: Revealed) -> Result<Revealed> {
    match (current, new) {
        (Revealed::Nothing, r) => Ok(r),
        (a, b) if a == b => Ok(a),
        _ => Err(Error::Precondition("both a success and a failure observed in one profile".into())),
    }
}

/// Posterior probability that `v = 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PosteriorBelief(f64);

impl PosteriorBelief {
    pub fn new(value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value), "belief {value}");
        PosteriorBelief(value)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Risky,
    Safe,
}

/// Ties go to the risky action.
pub fn decide(belief: PosteriorBelief, cost: f64) -> Action {
    if belief.value() >= cost {
        Action::Risky
    } else {
        Action::Safe
    }
}

/// Per-draw probabilities of the five friend cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellProbabilities {
    pub own_taker: f64,
    pub own_safe: f64,
    pub other_taker: f64,
    pub other_safe: f64,
    pub zero_cost: f64,
}

impl CellProbabilities {
    pub fn sum(&self) -> f64 {
        self.own_taker + self.own_safe + self.other_taker + self.other_safe + self.zero_cost
    }

    pub fn taker(&self) -> f64 {
        self.own_taker + self.other_taker
    }
}

pub fn category_probabilities(
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
    v: Value,
) -> CellProbabilities {
    let own = params.group(observer);
    let other = params.group(observer.other());
    let h = own.homophily;
    let own_high = h * own.pi;
    let other_high = (1.0 - h) * other.pi;
    let a_own = state.get(observer, v);
    let a_other = state.get(observer.other(), v);
    CellProbabilities {
        own_taker: own_high * a_own,
        own_safe: own_high * (1.0 - a_own),
        other_taker: other_high * a_other,
        other_safe: other_high * (1.0 - a_other),
        zero_cost: zero_cost_mass(params, observer),
    }
}

fn zero_cost_mass(params: &ModelParams, observer: Group) -> f64 {
    let own = params.group(observer);
    let other = params.group(observer.other());
    own.homophily * (1.0 - own.pi) + (1.0 - own.homophily) * (1.0 - other.pi)
}

/// `n! / (a! b! (n-a-b)!)` in floating point.
pub fn multinomial_coefficient(n: u32, a: u32, b: u32) -> f64 {
    debug_assert!(a + b <= n);
    binomial(n, a) * binomial(n - a, b)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// State-independent part of the probability of a no-reveal composition:
/// `C * (h pi_own)^n_own * ((1-h) pi_other)^n_other * z^(d - n_own - n_other)`.
pub(crate) fn composition_weight(params: &ModelParams, observer: Group, n_own: u32, n_other: u32) -> f64 {
    let own = params.group(observer);
    let other = params.group(observer.other());
    let d = own.degree;
    let h = own.homophily;
    let z = zero_cost_mass(params, observer);
    multinomial_coefficient(d, n_own, n_other)
        * (h * own.pi).powi(n_own as i32)
        * ((1.0 - h) * other.pi).powi(n_other as i32)
        * z.powi((d - n_own - n_other) as i32)
}

/// Probability that every high-cost friend in the composition played safe.
pub(crate) fn all_safe_likelihood(state: &StateVector, observer: Group, v: Value, n_own: u32, n_other: u32) -> f64 {
    let a_own = state.get(observer, v);
    let a_other = state.get(observer.other(), v);
    (1.0 - a_own).powi(n_own as i32) * (1.0 - a_other).powi(n_other as i32)
}

fn own_other(tally: &SignalTally, observer: Group) -> (u32, u32) {
    (tally.count(observer), tally.count(observer.other()))
}

/// Multinomial probability of a no-reveal tally given `v` and the previous
/// generation's fractions.
pub fn profile_probability(
    tally: &SignalTally,
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
    v: Value,
) -> Result<f64> {
    if tally.revealed != Revealed::Nothing {
        return Err(Error::Precondition("profile_probability takes a no-reveal tally".into()));
    }
    tally.check(params.group(observer).degree)?;
    let (n_own, n_other) = own_other(tally, observer);
    Ok(composition_weight(params, observer, n_own, n_other) * all_safe_likelihood(state, observer, v, n_own, n_other))
}

/// Bayes' rule on two state likelihoods. Returns `p` exactly when the
/// likelihoods coincide.
pub(crate) fn bayes(p: f64, like_one: f64, like_zero: f64) -> Result<f64> {
    if like_one <= UNDERFLOW_FLOOR && like_zero <= UNDERFLOW_FLOOR {
        return Err(Error::OffPath);
    }
    if like_one == like_zero {
        return Ok(p);
    }
    if like_one == 0.0 {
        return Ok(0.0);
    }
    let ratio = like_zero / like_one;
    Ok(p / (p + (1.0 - p) * ratio))
}

/// Posterior that `v = 1` for a no-reveal composition given the previous
/// generation's fractions in both states.
pub(crate) fn composition_posterior(
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
    n_own: u32,
    n_other: u32,
) -> Result<f64> {
    if composition_weight(params, observer, n_own, n_other) == 0.0 {
        return Err(Error::OffPath);
    }
    let one = all_safe_likelihood(state, observer, Value::One, n_own, n_other);
    let zero = all_safe_likelihood(state, observer, Value::Zero, n_own, n_other);
    bayes(params.p, one, zero)
}

pub fn posterior(
    tally: &SignalTally,
    params: &ModelParams,
    state: &StateVector,
    observer: Group,
) -> Result<PosteriorBelief> {
    match tally.revealed {
        Revealed::Plus => Ok(PosteriorBelief(1.0)),
        Revealed::Minus => Ok(PosteriorBelief(0.0)),
        Revealed::Nothing => {
            tally.check(params.group(observer).degree)?;
            let (n_own, n_other) = own_other(tally, observer);
            composition_posterior(params, state, observer, n_own, n_other).map(PosteriorBelief)
        }
    }
}

/// Action of a high-cost observer. Off-path tallies fall back to the prior
/// default; they carry no probability mass.
pub fn act(tally: &SignalTally, params: &ModelParams, state: &StateVector, observer: Group) -> Result<Action> {
    let cost = params.group(observer).cost;
    match posterior(tally, params, state, observer) {
        Ok(belief) => Ok(decide(belief, cost)),
        Err(Error::OffPath) => Ok(decide(PosteriorBelief(params.p), cost)),
        Err(e) => Err(e),
    }
}

/// All no-reveal tallies of a given degree, ordered by `n_b` then `n_g`.
pub fn enumerate_tallies(degree: u32) -> Vec<SignalTally> {
    let mut out = Vec::with_capacity(((degree + 1) * (degree + 2) / 2) as usize);
    for n_b in 0..=degree {
        for n_g in 0..=degree - n_b {
            out.push(SignalTally::unrevealed(n_b, n_g, degree - n_b - n_g));
        }
    }
    out
}

/// Probability of observing at least one high-cost taker.
pub fn reveal_probability(params: &ModelParams, state: &StateVector, observer: Group, v: Value) -> f64 {
    let cells = category_probabilities(params, state, observer, v);
    1.0 - (1.0 - cells.taker()).powi(params.group(observer).degree as i32)
}
