//! Exhaustive enumeration of every ordered sequence of friend draws. Shares
//! no code with the library beyond the parameter types.

use homophily_core::{Group, ModelParams, StateVector, Value};

/// What one draw shows the observer.
#[derive(Clone, Copy)]
enum Draw {
    OwnTaker,
    OwnSafe,
    OtherTaker,
    OtherSafe,
    Zero,
}

const DRAWS: [Draw; 5] = [Draw::OwnTaker, Draw::OwnSafe, Draw::OtherTaker, Draw::OtherSafe, Draw::Zero];

fn draw_probability(params: &ModelParams, state: &StateVector, observer: Group, v: Value, draw: Draw) -> f64 {
    let (own, other) = match observer {
        Group::Green => (&params.green, &params.blue),
        Group::Blue => (&params.blue, &params.green),
    };
    let frac = |g: Group| match (g, v) {
        (Group::Green, Value::Zero) => state.g0,
        (Group::Green, Value::One) => state.g1,
        (Group::Blue, Value::Zero) => state.b0,
        (Group::Blue, Value::One) => state.b1,
    };
    let h = own.homophily;
    let a_own = frac(observer);
    let a_other = frac(observer.other());
    match draw {
        Draw::OwnTaker => h * own.pi * a_own,
        Draw::OwnSafe => h * own.pi * (1.0 - a_own),
        Draw::OtherTaker => (1.0 - h) * other.pi * a_other,
        Draw::OtherSafe => (1.0 - h) * other.pi * (1.0 - a_other),
        Draw::Zero => h * (1.0 - own.pi) + (1.0 - h) * (1.0 - other.pi),
    }
}

/// Next-period `(v = 0, v = 1)` fractions for high-cost `observer` agents.
fn oracle_group(params: &ModelParams, state: &StateVector, observer: Group) -> (f64, f64) {
    let own = match observer {
        Group::Green => &params.green,
        Group::Blue => &params.blue,
    };
    let d = own.degree;
    let total = 5usize.pow(d);
    let mut next = [0.0f64; 2];
    for code in 0..total {
        let mut c = code;
        let mut like = [1.0f64; 2];
        let mut taker = false;
        for _ in 0..d {
            let draw = DRAWS[c % 5];
            c /= 5;
            if matches!(draw, Draw::OwnTaker | Draw::OtherTaker) {
                taker = true;
            }
            like[0] *= draw_probability(params, state, observer, Value::Zero, draw);
            like[1] *= draw_probability(params, state, observer, Value::One, draw);
        }
        for (vi, &l) in like.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let risky = if taker {
                // a taker's payoff sign reveals v; costs lie in (0, 1)
                vi == 1
            } else {
                let num = params.p * like[1];
                let den = num + (1.0 - params.p) * like[0];
                num / den >= own.cost
            };
            if risky {
                next[vi] += l;
            }
        }
    }
    (next[0], next[1])
}

pub fn oracle_step(params: &ModelParams, state: &StateVector) -> StateVector {
    let (g0, g1) = oracle_group(params, state, Group::Green);
    let (b0, b1) = oracle_group(params, state, Group::Blue);
    StateVector::new(g0, g1, b0, b1)
}
