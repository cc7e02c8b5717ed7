//! Finite-population Monte Carlo of the generative process.
//!
//! Each generation holds `N` agents per group. An agent draws its cost,
//! samples `d` friends from the previous generation (own group with
//! probability `h`, uniform within the group), and acts on its Bayesian
//! posterior. Posteriors are computed against the mean-field fractions of
//! the previous period, not the empirical finite-`N` ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::step_tally;
use crate::error::{Error, Result};
use crate::model::{validate_params, Group, ModelParams, StateVector, Value};
use crate::multicost::GroupPair;
use crate::signal::{act, decide, Action, CostLabel, Outcome, PosteriorBelief, Revealed, SignalObservation, SignalTally};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VRealization {
    One,
    Zero,
    /// Draw `v = 1` with probability `p` from a dedicated stream.
    SampleFromPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Agents per group and generation.
    pub population: usize,
    /// Generations after the initial one.
    pub generations: usize,
    pub seed: u64,
    pub v: VRealization,
    /// High-cost risky fractions of generation 0; prior defaults if absent.
    pub initial: Option<StateVector>,
}

/// One agent of a realized generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentRecord {
    pub zero_cost: bool,
    pub risky: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub blue: Vec<AgentRecord>,
    pub green: Vec<AgentRecord>,
}

impl Generation {
    pub fn group(&self, group: Group) -> &[AgentRecord] {
        match group {
            Group::Blue => &self.blue,
            Group::Green => &self.green,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationOutcome {
    pub t: usize,
    pub v: Value,
    /// Fraction of agents whose response as a high-cost agent is risky.
    /// Every agent's response is evaluated, whatever its realized cost.
    pub high_cost: GroupPair<f64>,
    pub high_cost_se: GroupPair<f64>,
    /// Fraction of realized zero-cost agents playing risky; absent when
    /// the group has none.
    pub zero_cost: GroupPair<Option<f64>>,
    /// Fraction of all agents playing risky.
    pub realized: GroupPair<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbmRun {
    pub v: Value,
    pub outcomes: Vec<GenerationOutcome>,
    /// Mean-field trajectory for the same initial state, `t = 0..=T`.
    pub mean_field: Vec<StateVector>,
    /// Per generation, the largest absolute gap between simulated and
    /// mean-field high-cost fractions over the two groups.
    pub gaps: Vec<f64>,
}

impl AbmRun {
    pub fn terminal_gap(&self) -> f64 {
        *self.gaps.last().expect("a run has at least one generation")
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream per `(generation, group, agent)`.
fn agent_rng(seed: u64, t: usize, group: Group, agent: usize) -> ChaCha8Rng {
    let g = match group {
        Group::Blue => 0u64,
        Group::Green => 1u64,
    };
    let key = splitmix(splitmix(splitmix(seed) ^ t as u64) ^ g) ^ agent as u64;
    ChaCha8Rng::seed_from_u64(splitmix(key))
}

fn v_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0x005E_ED0F_0000_0001))
}

pub fn realize_v(config: &SimConfig) -> Value {
    match config.v {
        VRealization::One => Value::One,
        VRealization::Zero => Value::Zero,
        VRealization::SampleFromPrior => {
            if v_rng(config.seed).random_bool(config.params.p) {
                Value::One
            } else {
                Value::Zero
            }
        }
    }
}

fn cost_label(group: Group) -> CostLabel {
    match group {
        Group::Blue => CostLabel::CostB,
        Group::Green => CostLabel::CostG,
    }
}

/// Draw `d` friends for an agent of `group` from the previous generation.
pub fn sample_friends(
    group: Group,
    params: &ModelParams,
    previous: &Generation,
    v: Value,
    rng: &mut impl Rng,
) -> Result<Vec<SignalObservation>> {
    let gp = params.group(group);
    let mut out = Vec::with_capacity(gp.degree as usize);
    for _ in 0..gp.degree {
        let friend_group = if rng.random_bool(gp.homophily) { group } else { group.other() };
        let pool = previous.group(friend_group);
        if pool.is_empty() {
            return Err(Error::EmptyGeneration(friend_group));
        }
        let friend = pool[rng.random_range(0..pool.len())];
        let obs = if friend.zero_cost {
            SignalObservation::new(Outcome::Plus, CostLabel::Zero, friend_group)?
        } else if friend.risky {
            let outcome = if v == Value::One { Outcome::Plus } else { Outcome::Minus };
            SignalObservation::new(outcome, cost_label(friend_group), friend_group)?
        } else {
            SignalObservation::new(Outcome::None, cost_label(friend_group), friend_group)?
        };
        out.push(obs);
    }
    Ok(out)
}

/// Action of a high-cost observer for every no-reveal tally, indexed by
/// `(n_b, n_g)`.
struct DecisionTable {
    degree: u32,
    risky: Vec<bool>,
}

impl DecisionTable {
    fn new(params: &ModelParams, belief_state: &StateVector, observer: Group) -> Result<Self> {
        let d = params.group(observer).degree;
        let side = d as usize + 1;
        let mut risky = vec![false; side * side];
        for n_b in 0..=d {
            for n_g in 0..=d - n_b {
                let tally = SignalTally::unrevealed(n_b, n_g, d - n_b - n_g);
                risky[n_b as usize * side + n_g as usize] =
                    act(&tally, params, belief_state, observer)? == Action::Risky;
            }
        }
        Ok(DecisionTable { degree: d, risky })
    }

    fn risky(&self, tally: &SignalTally, cost: f64) -> bool {
        match tally.revealed {
            Revealed::Plus => decide(PosteriorBelief::new(1.0), cost) == Action::Risky,
            Revealed::Minus => decide(PosteriorBelief::new(0.0), cost) == Action::Risky,
            Revealed::Nothing => {
                let side = self.degree as usize + 1;
                self.risky[tally.n_b as usize * side + tally.n_g as usize]
            }
        }
    }
}

/// Response as a high-cost agent, and whether the agent is zero-cost.
type AgentDraw = (bool, AgentRecord);

fn summarize(t: usize, v: Value, draws: &GroupPair<Vec<AgentDraw>>) -> GenerationOutcome {
    let stats = |xs: &[AgentDraw]| {
        let n = xs.len() as f64;
        let high = xs.iter().filter(|(r, _)| *r).count() as f64 / n;
        let zeros: Vec<_> = xs.iter().filter(|(_, a)| a.zero_cost).collect();
        let zero = if zeros.is_empty() {
            None
        } else {
            Some(zeros.iter().filter(|(_, a)| a.risky).count() as f64 / zeros.len() as f64)
        };
        let realized = xs.iter().filter(|(_, a)| a.risky).count() as f64 / n;
        (high, (high * (1.0 - high) / n).sqrt(), zero, realized)
    };
    let (bh, bse, bz, br) = stats(&draws.blue);
    let (gh, gse, gz, gr) = stats(&draws.green);
    GenerationOutcome {
        t,
        v,
        high_cost: GroupPair { blue: bh, green: gh },
        high_cost_se: GroupPair { blue: bse, green: gse },
        zero_cost: GroupPair { blue: bz, green: gz },
        realized: GroupPair { blue: br, green: gr },
    }
}

fn initial_generation(config: &SimConfig, v: Value, alpha0: &StateVector) -> GroupPair<Vec<AgentDraw>> {
    let draw = |group: Group| {
        let gp = config.params.group(group);
        (0..config.population)
            .into_par_iter()
            .map(|i| {
                let mut rng = agent_rng(config.seed, 0, group, i);
                let zero_cost = !rng.random_bool(gp.pi);
                let response = rng.random_bool(alpha0.get(group, v));
                (response, AgentRecord { zero_cost, risky: zero_cost || response })
            })
            .collect()
    };
    GroupPair { blue: draw(Group::Blue), green: draw(Group::Green) }
}

/// Simulate generation `t` given the realized previous generation and the
/// mean-field fractions agents use to interpret what they see.
pub fn simulate_generation(
    previous: &Generation,
    config: &SimConfig,
    t: usize,
    v: Value,
    belief_state: &StateVector,
) -> Result<GenerationOutcome> {
    Ok(simulate(previous, config, t, v, belief_state)?.0)
}

fn simulate(
    previous: &Generation,
    config: &SimConfig,
    t: usize,
    v: Value,
    belief_state: &StateVector,
) -> Result<(GenerationOutcome, Generation)> {
    let params = &config.params;
    let mut draws = GroupPair { blue: Vec::new(), green: Vec::new() };
    for group in Group::ALL {
        let table = DecisionTable::new(params, belief_state, group)?;
        let gp = params.group(group);
        let out: Result<Vec<AgentDraw>> = (0..config.population)
            .into_par_iter()
            .map(|i| {
                let mut rng = agent_rng(config.seed, t, group, i);
                let zero_cost = !rng.random_bool(gp.pi);
                let friends = sample_friends(group, params, previous, v, &mut rng)?;
                let tally = SignalTally::from_observations(&friends)?;
                let response = table.risky(&tally, gp.cost);
                Ok((response, AgentRecord { zero_cost, risky: zero_cost || response }))
            })
            .collect();
        match group {
            Group::Blue => draws.blue = out?,
            Group::Green => draws.green = out?,
        }
    }
    let outcome = summarize(t, v, &draws);
    Ok((outcome, records(draws)))
}

fn records(draws: GroupPair<Vec<AgentDraw>>) -> Generation {
    Generation {
        blue: draws.blue.into_iter().map(|(_, a)| a).collect(),
        green: draws.green.into_iter().map(|(_, a)| a).collect(),
    }
}

fn gap(outcome: &GenerationOutcome, mf: &StateVector) -> f64 {
    Group::ALL
        .into_iter()
        .map(|g| (outcome.high_cost.get(g) - mf.get(g, outcome.v)).abs())
        .fold(0.0, f64::max)
}

/// Run `T` generations after the initial one and compare with the
/// mean-field trajectory of the exact map.
pub fn run_abm(config: &SimConfig) -> Result<AbmRun> {
    validate_params(config.params)?;
    if config.population == 0 || config.generations == 0 {
        return Err(Error::Precondition("population and generations must be at least 1".into()));
    }
    let alpha0 = config.initial.unwrap_or_else(|| StateVector::prior_default(&config.params));
    if !alpha0.in_unit_cube() {
        return Err(Error::Precondition(format!("initial state outside [0,1]^4: {alpha0:?}")));
    }
    let v = realize_v(config);
    let mut mean_field = vec![alpha0];
    for _ in 0..config.generations {
        let next = step_tally(mean_field.last().unwrap(), &config.params);
        mean_field.push(next);
    }
    let first = initial_generation(config, v, &alpha0);
    let mut outcomes = vec![summarize(0, v, &first)];
    let mut previous = records(first);
    for t in 1..=config.generations {
        let (outcome, generation) = simulate(&previous, config, t, v, &mean_field[t - 1])?;
        outcomes.push(outcome);
        previous = generation;
    }
    let gaps = outcomes.iter().zip(&mean_field).map(|(o, mf)| gap(o, mf)).collect();
    Ok(AbmRun { v, outcomes, mean_field, gaps })
}
