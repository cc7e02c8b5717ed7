//! Social learning with cost heterogeneity and homophily: Bayesian signal
//! updating, mean-field dynamics, steady states, a multi-cost extension and
//! an agent-based simulator.

pub mod abm;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod multicost;
pub mod numeric;
pub mod signal;

pub use error::{Error, ParamViolation, Result};
pub use model::{
    classify_regime, normalize_split, validate_params, Group, GroupParams, ModelParams, Regime, RegimeKind,
    StateVector, Value,
};
