#![allow(dead_code)]

use homophily_core::{GroupParams, ModelParams, StateVector};
use proptest::prelude::*;

pub fn group(cost: f64, pi: f64, degree: u32, homophily: f64) -> GroupParams {
    GroupParams { cost, pi, degree, homophily }
}

/// Split-regime parameters: green defaults to safe, blue to risky.
pub fn split_params(max_degree: u32) -> impl Strategy<Value = ModelParams> {
    (0.05f64..0.95).prop_flat_map(move |p| {
        (
            Just(p),
            (p + 1e-3).min(0.999)..0.999,
            0.001..=p,
            0.0f64..=1.0,
            0.0f64..=1.0,
            1..=max_degree,
            1..=max_degree,
            0.0f64..=1.0,
            0.0f64..=1.0,
        )
            .prop_map(|(p, cg, cb, pig, pib, dg, db, hg, hb)| ModelParams {
                p,
                green: group(cg, pig, dg, hg),
                blue: group(cb, pib, db, hb),
            })
    })
}

/// Parameters in any regime.
pub fn any_params(max_degree: u32) -> impl Strategy<Value = ModelParams> {
    (
        0.02f64..0.98,
        0.01f64..0.99,
        0.01f64..0.99,
        0.0f64..=1.0,
        0.0f64..=1.0,
        1..=max_degree,
        1..=max_degree,
        0.0f64..=1.0,
        0.0f64..=1.0,
    )
        .prop_map(|(p, cg, cb, pig, pib, dg, db, hg, hb)| ModelParams {
            p,
            green: group(cg, pig, dg, hg),
            blue: group(cb, pib, db, hb),
        })
}

pub fn unit_state() -> impl Strategy<Value = StateVector> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b, c, d)| StateVector::new(a, b, c, d))
}

/// Interior states, away from the faces of the cube.
pub fn interior_state() -> impl Strategy<Value = StateVector> {
    (0.01f64..0.99, 0.01f64..0.99, 0.01f64..0.99, 0.01f64..0.99)
        .prop_map(|(a, b, c, d)| StateVector::new(a, b, c, d))
}
