//! Finitely many costs and values with cost-dependent friendship.
//!
//! Agent types are `(group, cost)` pairs. Each type draws its friends i.i.d.
//! from a row of `friend_dist` and sees, per friend, whether it took the
//! risky action and if so whether the payoff `v - c'` was positive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Group;

/// Row sums and distributions must match 1 to this tolerance.
pub const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPair<T> {
    pub blue: T,
    pub green: T,
}

impl<T> GroupPair<T> {
    pub fn get(&self, group: Group) -> &T {
        match group {
            Group::Blue => &self.blue,
            Group::Green => &self.green,
        }
    }
}

/// Friend distribution: explicit rows indexed like [`CostValueModel::type_index`],
/// or the string `"colorblind"` for color-blind perfect cost homophily.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FriendDist {
    Named(String),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostValueModel {
    /// Ascending, nonnegative.
    pub values: Vec<f64>,
    pub prior: Vec<f64>,
    /// Ascending, nonnegative, disjoint from `values`.
    pub costs: Vec<f64>,
    pub group_shares: GroupPair<f64>,
    /// Per group, a distribution over `costs`.
    pub cost_dist: GroupPair<Vec<f64>>,
    /// Per group and cost, the number of friends.
    pub degrees: GroupPair<Vec<u32>>,
    pub friend_dist: FriendDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeId {
    pub group: Group,
    pub cost: usize,
}

fn check_distribution(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidModel(format!("{name}: entries must lie in [0, 1]")));
    }
    let sum: f64 = xs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidModel(format!("{name}: sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_ascending(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidModel(format!("{name}: empty support")));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidModel(format!("{name}: entries must be finite and nonnegative")));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidModel(format!("{name}: must be strictly ascending")));
    }
    Ok(())
}

impl CostValueModel {
    pub fn n_types(&self) -> usize {
        2 * self.costs.len()
    }

    /// Blue types first, then green, each in cost order.
    pub fn type_index(&self, t: TypeId) -> usize {
        let offset = match t.group {
            Group::Blue => 0,
            Group::Green => self.costs.len(),
        };
        offset + t.cost
    }

    pub fn type_at(&self, index: usize) -> TypeId {
        let n = self.costs.len();
        if index < n {
            TypeId { group: Group::Blue, cost: index }
        } else {
            TypeId { group: Group::Green, cost: index - n }
        }
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.n_types()).map(|i| self.type_at(i))
    }

    pub fn cost_of(&self, t: TypeId) -> f64 {
        self.costs[t.cost]
    }

    /// Population share of a type.
    pub fn type_mass(&self, t: TypeId) -> f64 {
        self.group_shares.get(t.group) * self.cost_dist.get(t.group)[t.cost]
    }

    /// Indices of types with positive mass.
    pub fn populated_types(&self) -> Vec<usize> {
        (0..self.n_types()).filter(|&i| self.type_mass(self.type_at(i)) > 0.0).collect()
    }

    pub fn degree_of(&self, t: TypeId) -> u32 {
        self.degrees.get(t.group)[t.cost]
    }

    pub fn validate(&self) -> Result<()> {
        check_ascending("values", &self.values)?;
        check_ascending("costs", &self.costs)?;
        if self.prior.len() != self.values.len() {
            return Err(Error::InvalidModel("prior: length differs from values".into()));
        }
        check_distribution("prior", &self.prior)?;
        if let Some(v) = self.values.iter().find(|v| self.costs.contains(v)) {
            return Err(Error::InvalidModel(format!("value {v} is also a cost")));
        }
        check_distribution("group_shares", &[self.group_shares.blue, self.group_shares.green])?;
        for group in Group::ALL {
            let dist = self.cost_dist.get(group);
            if dist.len() != self.costs.len() {
                return Err(Error::InvalidModel(format!("cost_dist.{group}: length differs from costs")));
            }
            check_distribution(&format!("cost_dist.{group}"), dist)?;
            let degrees = self.degrees.get(group);
            if degrees.len() != self.costs.len() {
                return Err(Error::InvalidModel(format!("degrees.{group}: length differs from costs")));
            }
            if degrees.contains(&0) {
                return Err(Error::InvalidModel(format!("degrees.{group}: degree must be at least 1")));
            }
        }
        match &self.friend_dist {
            FriendDist::Named(name) if name == "colorblind" => {}
            FriendDist::Named(name) => {
                return Err(Error::InvalidModel(format!("friend_dist: unknown name {name:?}")));
            }
            FriendDist::Rows(rows) => {
                if rows.len() != self.n_types() {
                    return Err(Error::InvalidModel(format!("friend_dist: expected {} rows", self.n_types())));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != self.n_types() {
                        return Err(Error::InvalidModel(format!("friend_dist[{i}]: expected {} entries", self.n_types())));
                    }
                    check_distribution(&format!("friend_dist[{i}]"), row)?;
                }
            }
        }
        Ok(())
    }

    /// Friend distribution rows, resolving the color-blind shorthand.
    pub fn friend_rows(&self) -> Result<Vec<Vec<f64>>> {
        match &self.friend_dist {
            FriendDist::Rows(rows) => Ok(rows.clone()),
            FriendDist::Named(_) => colorblind_pch_friend_dist(self),
        }
    }

    fn prior_mean(&self) -> f64 {
        self.values.iter().zip(&self.prior).map(|(v, p)| v * p).sum()
    }
}

/// Every cost has a value strictly below and one strictly above it.
pub fn check_assumption_nontrivial(model: &CostValueModel) -> bool {
    model.costs.iter().all(|&c| model.values.iter().any(|&v| v < c) && model.values.iter().any(|&v| v > c))
}

/// `alpha[type][value]`: fraction of a type taking the risky action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePolicy {
    pub alpha: Vec<Vec<f64>>,
}

impl StatePolicy {
    pub fn get(&self, model: &CostValueModel, t: TypeId, v: usize) -> f64 {
        self.alpha[model.type_index(t)][v]
    }

    pub fn sup_distance(&self, other: &StatePolicy) -> f64 {
        self.alpha
            .iter()
            .flatten()
            .zip(other.alpha.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn in_unit_cube(&self) -> bool {
        self.alpha.iter().flatten().all(|x| (0.0..=1.0).contains(x))
    }
}

/// Agents act as if they knew `v`: risky iff `c < v`.
pub fn complete_learning_policy(model: &CostValueModel) -> StatePolicy {
    let alpha = model
        .types()
        .map(|t| {
            let c = model.cost_of(t);
            model.values.iter().map(|&v| if c < v { 1.0 } else { 0.0 }).collect()
        })
        .collect();
    StatePolicy { alpha }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FriendOutcome {
    Success,
    Failure,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FriendObservation {
    pub friend: TypeId,
    pub outcome: FriendOutcome,
}

/// Probability under each value of one friend's observed outcome, given the
/// friend's type.
fn outcome_likelihood(model: &CostValueModel, policy: &StatePolicy, obs: FriendObservation) -> Vec<f64> {
    let c = model.cost_of(obs.friend);
    model
        .values
        .iter()
        .enumerate()
        .map(|(vi, &v)| {
            let a = policy.get(model, obs.friend, vi);
            match obs.outcome {
                FriendOutcome::Success if v > c => a,
                FriendOutcome::Failure if v < c => a,
                FriendOutcome::Safe => 1.0 - a,
                _ => 0.0,
            }
        })
        .collect()
}

fn normalize_posterior(model: &CostValueModel, likelihood: &[f64]) -> Result<Vec<f64>> {
    let joint: Vec<f64> = model.prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(Error::OffPath);
    }
    Ok(joint.into_iter().map(|x| x / total).collect())
}

/// Posterior over values after a profile of friend observations.
pub fn mc_posterior(profile: &[FriendObservation], model: &CostValueModel, previous: &StatePolicy) -> Result<Vec<f64>> {
    let mut like = vec![1.0; model.values.len()];
    for &obs in profile {
        for (l, x) in like.iter_mut().zip(outcome_likelihood(model, previous, obs)) {
            *l *= x;
        }
    }
    normalize_posterior(model, &like)
}

fn posterior_mean(model: &CostValueModel, posterior: &[f64]) -> f64 {
    model.values.iter().zip(posterior).map(|(v, p)| v * p).sum()
}

/// Risky iff the posterior mean reaches the cost; off-path profiles use the
/// prior mean.
fn decides_risky(model: &CostValueModel, likelihood: &[f64], cost: f64) -> bool {
    match normalize_posterior(model, likelihood) {
        Ok(post) => posterior_mean(model, &post) >= cost,
        Err(_) => model.prior_mean() >= cost,
    }
}

/// Per-draw outcome categories with their probability under each value.
fn categories(model: &CostValueModel, policy: &StatePolicy, row: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for (j, &w) in row.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let friend = model.type_at(j);
        for outcome in [FriendOutcome::Success, FriendOutcome::Failure, FriendOutcome::Safe] {
            let l: Vec<f64> = outcome_likelihood(model, policy, FriendObservation { friend, outcome })
                .into_iter()
                .map(|x| w * x)
                .collect();
            if l.iter().any(|&x| x > 0.0) {
                out.push(l);
            }
        }
    }
    out
}

struct Enumeration<'a> {
    model: &'a CostValueModel,
    cats: &'a [Vec<f64>],
    cost: f64,
    factorial: Vec<f64>,
    next: Vec<f64>,
}

impl Enumeration<'_> {
    /// Depth-first over multisets of categories: `like` is the product of
    /// category probabilities so far, `inv_fact` the product of `1/n_i!`.
    fn visit(&mut self, start: usize, remaining: u32, like: &[f64], inv_fact: f64, total: u32) {
        if remaining == 0 {
            let coef = self.factorial[total as usize] * inv_fact;
            if decides_risky(self.model, like, self.cost) {
                for (n, l) in self.next.iter_mut().zip(like) {
                    *n += coef * l;
                }
            }
            return;
        }
        for k in start..self.cats.len() {
            // take `m` copies of category k, then move past it
            let mut cur = like.to_vec();
            for m in 1..=remaining {
                for (c, x) in cur.iter_mut().zip(&self.cats[k]) {
                    *c *= x;
                }
                let f = inv_fact / self.factorial[m as usize];
                self.visit(k + 1, remaining - m, &cur, f, total);
            }
        }
    }
}

/// Next-period policy: for each type and value, the probability that the
/// friend profile leads to `E[v | profile] >= c`.
pub fn mc_step(policy: &StatePolicy, model: &CostValueModel) -> Result<StatePolicy> {
    model.validate()?;
    if policy.alpha.len() != model.n_types() || policy.alpha.iter().any(|r| r.len() != model.values.len()) {
        return Err(Error::InvalidModel("policy shape does not match the model".into()));
    }
    if !policy.in_unit_cube() {
        return Err(Error::Precondition("policy entries outside [0, 1]".into()));
    }
    let rows = model.friend_rows()?;
    let alpha = model
        .types()
        .map(|t| {
            let d = model.degree_of(t);
            let cats = categories(model, policy, &rows[model.type_index(t)]);
            let mut factorial = vec![1.0; d as usize + 1];
            for i in 1..=d as usize {
                factorial[i] = factorial[i - 1] * i as f64;
            }
            let mut e = Enumeration { model, cats: &cats, cost: model.cost_of(t), factorial, next: vec![0.0; model.values.len()] };
            e.visit(0, d, &vec![1.0; model.values.len()], 1.0, d);
            e.next.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
        })
        .collect();
    Ok(StatePolicy { alpha })
}

/// A linked pair of types with a value strictly between their costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PchWitness {
    pub observer: TypeId,
    pub friend: TypeId,
    pub link_weight: f64,
    pub value: f64,
}

/// Whether no positive-probability link separates costs by a value, with a
/// witness link when one does.
pub fn is_perfect_cost_homophily(model: &CostValueModel) -> Result<(bool, Option<PchWitness>)> {
    let rows = model.friend_rows()?;
    for observer in model.types() {
        for friend in model.types() {
            let w = rows[model.type_index(observer)][model.type_index(friend)];
            if w <= 0.0 {
                continue;
            }
            let (lo, hi) = {
                let (a, b) = (model.cost_of(observer), model.cost_of(friend));
                (a.min(b), a.max(b))
            };
            if let Some(&value) = model.values.iter().find(|&&v| lo < v && v < hi) {
                return Ok((false, Some(PchWitness { observer, friend, link_weight: w, value })));
            }
        }
    }
    Ok((true, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub directions: usize,
    pub eps: f64,
    pub iterations: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { directions: 20, eps: 1e-2, iterations: 1_000, tol: 1e-6, seed: 0 }
    }
}

/// A friend profile that cannot separate two values on opposite sides of
/// the observer's cost, so complete learning fails for one of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingProfile {
    pub witness: PchWitness,
    pub outcome: FriendOutcome,
    pub posterior_mean: f64,
    /// Value at which the observer acts against complete learning.
    pub wrong_value: f64,
    /// `h^d`: probability of the profile under that value.
    pub bound: f64,
    /// `|mc_step(CL) - CL|` for the observer at `wrong_value`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteLearningVerdict {
    pub perfect_cost_homophily: bool,
    pub fixed_point_residual: f64,
    pub probes_returned: usize,
    pub probes_total: usize,
    pub breaking: Option<BreakingProfile>,
    /// Complete learning is a fixed point and every probe returned.
    pub stable_unique: bool,
}

fn breaking_profile(model: &CostValueModel, witness: PchWitness, cl: &StatePolicy, next: &StatePolicy) -> BreakingProfile {
    let c = model.cost_of(witness.observer);
    let c_friend = model.cost_of(witness.friend);
    let d = model.degree_of(witness.observer);
    // Friend costlier: it plays safe both at the separating value and below
    // the observer's cost. Cheaper: it succeeds at the separating value and
    // above the observer's cost.
    let (outcome, low, high) = if c_friend > c {
        (FriendOutcome::Safe, model.values[0], witness.value)
    } else {
        (FriendOutcome::Success, witness.value, *model.values.last().unwrap())
    };
    let profile = vec![FriendObservation { friend: witness.friend, outcome }; d as usize];
    let post = mc_posterior(&profile, model, cl).expect("profile has positive likelihood at the separating value");
    let mean = posterior_mean(model, &post);
    let wrong_value = if mean >= c { low } else { high };
    let vi = model.values.iter().position(|&v| v == wrong_value).unwrap();
    let oi = model.type_index(witness.observer);
    BreakingProfile {
        witness,
        outcome,
        posterior_mean: mean,
        wrong_value,
        bound: witness.link_weight.powi(d as i32),
        deviation: (next.alpha[oi][vi] - cl.alpha[oi][vi]).abs(),
    }
}

fn probe_returns(model: &CostValueModel, start: StatePolicy, target: &StatePolicy, cfg: &ProbeConfig) -> Result<bool> {
    let mut x = start;
    for _ in 0..=cfg.iterations {
        if x.sup_distance(target) <= cfg.tol {
            return Ok(true);
        }
        let next = mc_step(&x, model)?;
        if next.sup_distance(&x) <= 1e-15 {
            return Ok(next.sup_distance(target) <= cfg.tol);
        }
        x = next;
    }
    Ok(false)
}

/// Check complete learning as a fixed point, probe its stability from random
/// perturbations, and when cost homophily fails build the profile that
/// breaks it.
pub fn verify_complete_learning(model: &CostValueModel, cfg: &ProbeConfig) -> Result<CompleteLearningVerdict> {
    model.validate()?;
    if let Some(t) = model.types().find(|&t| model.degree_of(t) <= 1) {
        return Err(Error::Precondition(format!("every degree must exceed 1; type {t:?} has {}", model.degree_of(t))));
    }
    if !check_assumption_nontrivial(model) {
        return Err(Error::Precondition("some cost lacks values on both sides".into()));
    }
    let cl = complete_learning_policy(model);
    let next = mc_step(&cl, model)?;
    let residual = next.sup_distance(&cl);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut returned = 0;
    for _ in 0..cfg.directions {
        let alpha = cl
            .alpha
            .iter()
            .map(|row| row.iter().map(|a| (a + cfg.eps * rng.random_range(-1.0..=1.0)).clamp(0.0, 1.0)).collect())
            .collect();
        if probe_returns(model, StatePolicy { alpha }, &cl, cfg)? {
            returned += 1;
        }
    }
    let (pch, witness) = is_perfect_cost_homophily(model)?;
    let breaking = witness.map(|w| breaking_profile(model, w, &cl, &next));
    Ok(CompleteLearningVerdict {
        perfect_cost_homophily: pch,
        fixed_point_residual: residual,
        probes_returned: returned,
        probes_total: cfg.directions,
        breaking,
        stable_unique: residual <= 1e-12 && returned == cfg.directions,
    })
}

/// Friends share the observer's cost and are drawn in proportion to each
/// group's mass at that cost.
pub fn colorblind_pch_friend_dist(model: &CostValueModel) -> Result<Vec<Vec<f64>>> {
    let n = model.costs.len();
    let lam = &model.group_shares;
    let mut rows = vec![vec![0.0; 2 * n]; 2 * n];
    for c in 0..n {
        let g = lam.green * model.cost_dist.green[c];
        let b = lam.blue * model.cost_dist.blue[c];
        if g + b <= 0.0 {
            return Err(Error::InvalidModel(format!("cost {} has zero population mass", model.costs[c])));
        }
        for group in Group::ALL {
            let row = &mut rows[model.type_index(TypeId { group, cost: c })];
            row[model.type_index(TypeId { group: Group::Green, cost: c })] = g / (g + b);
            row[model.type_index(TypeId { group: Group::Blue, cost: c })] = b / (g + b);
        }
    }
    Ok(rows)
}

/// Own-group share of friends averaged over each group's cost distribution,
/// under color-blind perfect cost homophily.
pub fn incidental_homophily(model: &CostValueModel) -> Result<GroupPair<f64>> {
    let rows = colorblind_pch_friend_dist(model)?;
    let avg = |group: Group| {
        (0..model.costs.len())
            .map(|c| {
                let i = model.type_index(TypeId { group, cost: c });
                model.cost_dist.get(group)[c] * rows[i][i]
            })
            .sum()
    };
    Ok(GroupPair { blue: avg(Group::Blue), green: avg(Group::Green) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostHomophilyRow {
    pub cost: f64,
    /// `Pr_g(c) / Pr_b(c)`; infinite when only greens carry the cost.
    pub ratio: f64,
    pub green_own_share: f64,
    pub blue_own_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyByCost {
    pub rows: Vec<CostHomophilyRow>,
    pub lambda_g: f64,
    pub lambda_b: f64,
    /// `ratio` is nondecreasing in cost.
    pub lr_dominant: bool,
    /// Smallest cost with `ratio >= 1`.
    pub c_bar: Option<f64>,
}

/// Own-group friend shares by cost under color-blind perfect cost homophily.
pub fn homophily_by_cost(model: &CostValueModel) -> Result<HomophilyByCost> {
    let rows = colorblind_pch_friend_dist(model)?;
    let table: Vec<CostHomophilyRow> = (0..model.costs.len())
        .map(|c| {
            let (pg, pb) = (model.cost_dist.green[c], model.cost_dist.blue[c]);
            let gi = model.type_index(TypeId { group: Group::Green, cost: c });
            let bi = model.type_index(TypeId { group: Group::Blue, cost: c });
            CostHomophilyRow {
                cost: model.costs[c],
                ratio: if pb > 0.0 { pg / pb } else { f64::INFINITY },
                green_own_share: rows[gi][gi],
                blue_own_share: rows[bi][bi],
            }
        })
        .collect();
    let lr_dominant = table.windows(2).all(|w| w[0].ratio <= w[1].ratio);
    let c_bar = table.iter().find(|r| r.ratio >= 1.0).map(|r| r.cost);
    Ok(HomophilyByCost {
        rows: table,
        lambda_g: model.group_shares.green,
        lambda_b: model.group_shares.blue,
        lr_dominant,
        c_bar,
    })
}
