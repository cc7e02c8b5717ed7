//! Domain types shared by every other module: groups, parameters, the
//! mean-field state and the regime classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ParamViolation, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Blue,
    Green,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Blue, Group::Green];

    pub fn other(self) -> Group {
        match self {
            Group::Blue => Group::Green,
            Group::Green => Group::Blue,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Blue => "blue",
            Group::Green => "green",
        })
    }
}

/// Realization of the common value of the risky action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Zero,
    One,
}

impl Value {
    pub const ALL: [Value; 2] = [Value::Zero, Value::One];

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Zero => 0.0,
            Value::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    /// Cost of the risky action for the high-cost members of the group.
    pub cost: f64,
    /// Share of the group carrying the positive cost.
    pub pi: f64,
    /// Number of friends observed from the previous generation.
    pub degree: u32,
    /// Probability that each observed friend belongs to the own group.
    pub homophily: f64,
}

impl GroupParams {
    fn validate(&self, group: Group) -> std::result::Result<(), ParamViolation> {
        if self.cost.is_nan() || self.cost <= 0.0 {
            return Err(ParamViolation::CostNotPositive(group, self.cost));
        }
        if self.cost == 1.0 {
            return Err(ParamViolation::CostEqualsOne(group));
        }
        if self.cost > 1.0 {
            return Err(ParamViolation::CostAboveOne(group, self.cost));
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(ParamViolation::PiOutOfRange(group, self.pi));
        }
        if self.degree == 0 {
            return Err(ParamViolation::DegreeZero(group));
        }
        if !(0.0..=1.0).contains(&self.homophily) {
            return Err(ParamViolation::HomophilyOutOfRange(group, self.homophily));
        }
        Ok(())
    }

    /// Action a high-cost member takes on the prior alone (ties go to risky).
    pub fn default_risky(&self, p: f64) -> bool {
        p >= self.cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Prior probability that the risky action is worth 1.
    pub p: f64,
    pub green: GroupParams,
    pub blue: GroupParams,
}

impl ModelParams {
    pub fn group(&self, group: Group) -> &GroupParams {
        match group {
            Group::Blue => &self.blue,
            Group::Green => &self.green,
        }
    }

    pub fn group_mut(&mut self, group: Group) -> &mut GroupParams {
        match group {
            Group::Blue => &mut self.blue,
            Group::Green => &mut self.green,
        }
    }

    /// Swap the blue and green labels.
    pub fn swapped(&self) -> ModelParams {
        ModelParams { p: self.p, green: self.blue, blue: self.green }
    }

    /// Groups without any high-cost members. Their high-cost fractions are
    /// still defined by the dynamics but never observed.
    pub fn uninformative_groups(&self) -> Vec<Group> {
        Group::ALL.into_iter().filter(|&g| self.group(g).pi == 0.0).collect()
    }

    pub fn is_full_homophily(&self) -> bool {
        self.green.homophily == 1.0 && self.blue.homophily == 1.0
    }
}

/// Check every parameter invariant, reporting the first violation.
pub fn validate_params(params: ModelParams) -> Result<ModelParams> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(ParamViolation::POutOfRange(params.p).into());
    }
    params.green.validate(Group::Green)?;
    params.blue.validate(Group::Blue)?;
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeKind {
    /// Both high-cost groups take the risky action on the prior.
    BothRisky,
    /// Both high-cost groups take the safe action on the prior.
    BothSafe,
    /// Green defaults to safe, blue to risky.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// Set when the caller's blue group is the high-cost one, so the groups
    /// must be swapped to put the model in the `c_g > p >= c_b` orientation.
    pub relabeled: bool,
}

impl Regime {
    pub fn is_split(&self) -> bool {
        self.kind == RegimeKind::Split
    }
}

pub fn classify_regime(params: &ModelParams) -> Regime {
    let green_risky = params.green.default_risky(params.p);
    let blue_risky = params.blue.default_risky(params.p);
    let (kind, relabeled) = match (green_risky, blue_risky) {
        (true, true) => (RegimeKind::BothRisky, false),
        (false, false) => (RegimeKind::BothSafe, false),
        (false, true) => (RegimeKind::Split, false),
        (true, false) => (RegimeKind::Split, true),
    };
    Regime { kind, relabeled }
}

/// Put a split model in the orientation where green is the high-cost group.
/// Returns the (possibly swapped) params and whether a swap happened.
pub fn normalize_split(params: &ModelParams) -> (ModelParams, bool) {
    let regime = classify_regime(params);
    if regime.relabeled {
        (params.swapped(), true)
    } else {
        (*params, false)
    }
}

/// Fractions of high-cost agents taking the risky action, per group and
/// per realized value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVector {
    pub g0: f64,
    pub g1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl StateVector {
    pub fn new(g0: f64, g1: f64, b0: f64, b1: f64) -> Self {
        StateVector { g0, g1, b0, b1 }
    }

    /// Profile where every high-cost agent follows the prior.
    pub fn prior_default(params: &ModelParams) -> Self {
        let g = if params.green.default_risky(params.p) { 1.0 } else { 0.0 };
        let b = if params.blue.default_risky(params.p) { 1.0 } else { 0.0 };
        StateVector { g0: g, g1: g, b0: b, b1: b }
    }

    pub fn get(&self, group: Group, v: Value) -> f64 {
        match (group, v) {
            (Group::Green, Value::Zero) => self.g0,
            (Group::Green, Value::One) => self.g1,
            (Group::Blue, Value::Zero) => self.b0,
            (Group::Blue, Value::One) => self.b1,
        }
    }

    pub fn set(&mut self, group: Group, v: Value, x: f64) {
        match (group, v) {
            (Group::Green, Value::Zero) => self.g0 = x,
            (Group::Green, Value::One) => self.g1 = x,
            (Group::Blue, Value::Zero) => self.b0 = x,
            (Group::Blue, Value::One) => self.b1 = x,
        }
    }

    pub fn swapped(&self) -> Self {
        StateVector { g0: self.b0, g1: self.b1, b0: self.g0, b1: self.g1 }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.g0, self.g1, self.b0, self.b1]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        StateVector { g0: a[0], g1: a[1], b0: a[2], b1: a[3] }
    }

    pub fn sup_distance(&self, other: &StateVector) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn in_unit_cube(&self) -> bool {
        self.to_array().iter().all(|x| (0.0..=1.0).contains(x))
    }

    pub fn clamped(&self) -> Self {
        let a = self.to_array().map(|x| x.clamp(0.0, 1.0));
        StateVector::from_array(a)
    }
}
