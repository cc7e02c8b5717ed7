//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any fails.

#[path = "../../core/tests/common/brute.rs"]
mod brute;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use homophily_core::abm::{run_abm, SimConfig, VRealization};
use homophily_core::dynamics::{iterate, step_general, step_tally, StepMap};
use homophily_core::equilibrium::{
    degree_threshold, find_steady_states, full_homophily_steady_states, jacobian_v0, jacobian_v1, regularity_margin,
    select_steady_state, solve_steady_state, sweep, DegreeThreshold, SolverOptions, Stability, SteadyStateReport,
    SweepGrid,
};
use homophily_core::multicost::{
    complete_learning_policy, homophily_by_cost, incidental_homophily, is_perfect_cost_homophily, mc_step,
    verify_complete_learning, CostValueModel, FriendDist, GroupPair, ProbeConfig,
};
use homophily_core::{GroupParams, ModelParams, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn baseline(hg: f64, dg: u32) -> ModelParams {
    ModelParams {
        p: 0.5,
        green: GroupParams { cost: 0.8, pi: 0.6, degree: dg, homophily: hg },
        blue: GroupParams { cost: 0.2, pi: 0.3, degree: 2, homophily: 1.0 },
    }
}

/// Split-regime draw with green the high-cost group.
fn split_draw(r: &mut ChaCha8Rng, max_degree: u32) -> ModelParams {
    let p = r.random_range(0.05..0.95);
    ModelParams {
        p,
        green: GroupParams {
            cost: r.random_range(p + 1e-3..0.999),
            pi: r.random_range(0.0..=1.0),
            degree: r.random_range(1..=max_degree),
            homophily: r.random_range(0.0..=1.0),
        },
        blue: GroupParams {
            cost: r.random_range(0.001..=p),
            pi: r.random_range(0.0..=1.0),
            degree: r.random_range(1..=max_degree),
            homophily: r.random_range(0.0..=1.0),
        },
    }
}

fn unit_state(r: &mut ChaCha8Rng) -> StateVector {
    StateVector::new(r.random(), r.random(), r.random(), r.random())
}

// ---------------------------------------------------------------------------

/// Largest root of `1 - (1 - pi g)^d = g` by plain bisection; needs `pi d > 1`.
fn oracle_full_homophily_root(pi: f64, d: u32) -> f64 {
    let f = |g: f64| 1.0 - (1.0 - pi * g).powi(d as i32) - g;
    if f(1.0) == 0.0 {
        return 1.0;
    }
    // f(x) >= (pi d - 1) x - C(d,2) pi^2 x^2 > 0 below this point
    let pairs = f64::from(d * (d - 1) / 2);
    let mut lo = (0.5 * (pi * f64::from(d) - 1.0) / (pairs * pi * pi)).min(0.5);
    let mut hi = 1.0;
    assert!(f(lo) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Expected `(g0, g1)` steady states of one fully homophilous group.
fn full_homophily_expected(g: &GroupParams, p: f64) -> Vec<(f64, f64)> {
    let d = g.degree;
    if g.cost <= p {
        vec![((1.0 - g.pi).powi(d as i32), 1.0)]
    } else if g.pi * f64::from(d) <= 1.0 {
        vec![(0.0, 0.0)]
    } else {
        vec![(0.0, 0.0), (0.0, oracle_full_homophily_root(g.pi, d))]
    }
}

fn random_full_homophily_group(r: &mut ChaCha8Rng, p: f64) -> GroupParams {
    loop {
        let g = GroupParams {
            cost: r.random_range(0.01..0.99),
            pi: r.random_range(0.01..=1.0),
            degree: r.random_range(1..=8),
            homophily: 1.0,
        };
        let pd = g.pi * f64::from(g.degree);
        if (g.cost - p).abs() > 1e-6 && (pd - 1.0).abs() >= 1e-3 {
            return g;
        }
    }
}

fn full_homophily_closed_forms() -> Outcome {
    let mut r = rng(1);
    let mut bad = Vec::new();
    let mut roots = 0;
    let mut worst_root = 0.0f64;
    for i in 0..200 {
        let p = r.random_range(0.05..0.95);
        let green = random_full_homophily_group(&mut r, p);
        let blue = random_full_homophily_group(&mut r, p);
        let params = ModelParams { p, green, blue };
        for g in [green, blue] {
            let expected = full_homophily_expected(&g, p);
            let got = full_homophily_steady_states(&g, p).unwrap();
            let ok = got.len() == expected.len()
                && got.iter().zip(&expected).all(|(a, e)| (a.g0 - e.0).abs() <= 1e-9 && (a.g1 - e.1).abs() <= 1e-9);
            if expected.len() == 2 {
                roots += 1;
                worst_root = worst_root.max((got.last().unwrap().g1 - expected[1].1).abs());
            }
            if !ok {
                bad.push(format!("draw {i}: {g:?} expected {expected:?}"));
            }
        }
        // the full solver returns the product of the two one-group sets
        let reports = find_steady_states(&params, &SolverOptions::default()).unwrap();
        let eg = full_homophily_expected(&green, p);
        let eb = full_homophily_expected(&blue, p);
        let all_found = reports.len() == eg.len() * eb.len()
            && reports.iter().all(|rep| {
                let s = rep.state;
                eg.iter().any(|e| (s.g0 - e.0).abs() <= 1e-9 && (s.g1 - e.1).abs() <= 1e-9)
                    && eb.iter().any(|e| (s.b0 - e.0).abs() <= 1e-9 && (s.b1 - e.1).abs() <= 1e-9)
            });
        if !all_found {
            bad.push(format!("draw {i}: solver set mismatch"));
        }
    }
    let example = full_homophily_steady_states(&GroupParams { cost: 0.8, pi: 0.6, degree: 3, homophily: 1.0 }, 0.5)
        .unwrap()
        .last()
        .unwrap()
        .g1;
    let pass = bad.is_empty() && worst_root <= 1e-10 && (example - 0.9043).abs() < 1e-4;
    outcome(
        pass,
        format!(
            "200 draws, {} mismatches, {roots} positive roots within {worst_root:.1e} of bisection, pi=0.6 d=3 root {example:.6}{}",
            bad.len(),
            bad.first().map(|b| format!(" [{b}]")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------

fn good_state_dominates() -> Outcome {
    let mut r = rng(2);
    let mut violations = 0;
    let mut first = None;
    for i in 0..1000 {
        let mut params = split_draw(&mut r, 8);
        let mut init = unit_state(&mut r);
        if r.random_bool(0.5) {
            params = params.swapped();
            init = init.swapped();
        }
        let traj = iterate(init, &params, 50, StepMap::General).unwrap();
        for (t, s) in traj.states.iter().enumerate().skip(1) {
            if !(s.g1 >= s.g0 && s.b1 >= s.b0) {
                violations += 1;
                first.get_or_insert(format!("draw {i}, t = {t}: {s:?}"));
            }
        }
    }
    outcome(violations == 0, format!("1000 draws x 50 steps, {violations} violations{}", first.map(|f| format!(" [{f}]")).unwrap_or_default()))
}

// ---------------------------------------------------------------------------

fn homophily_degree_crossing() -> Outcome {
    let dbar = match degree_threshold(0.6, 0.3) {
        Ok(DegreeThreshold::Finite(x)) => x,
        other => return outcome(false, format!("threshold not finite: {other:?}")),
    };
    let expected = 0.5f64.ln() / 0.7f64.ln();
    let mut notes = vec![format!("d_bar = {dbar:.4}")];
    let mut pass = (dbar - expected).abs() <= 1e-12 && (dbar - 1.9434).abs() < 1e-4;
    let table = sweep(&SweepGrid::uniform_hg(10, vec![1, 2, 4, 8]), &baseline(0.5, 2), &SolverOptions::default());
    for d in [1u32, 2, 4, 8] {
        let col: Vec<f64> = table.column(d).map(|row| row.report.as_ref().map_or(f64::NAN, |rep| rep.state.g1)).collect();
        let steps: Vec<f64> = col.windows(2).map(|w| w[1] - w[0]).collect();
        let ok = col.len() == 11
            && if d == 1 { steps.iter().all(|&s| s < -1e-9) } else { steps.iter().all(|&s| s > 1e-9) };
        pass &= ok;
        notes.push(format!("d_g={d} {} [{:.4} -> {:.4}]", if d == 1 { "down" } else { "up" }, col[0], col[10]));
    }
    let stable = table.rows.iter().all(|row| row.report.as_ref().is_some_and(|rep| rep.stability == Stability::Stable));
    pass &= stable;
    notes.push(format!("all stable: {stable}"));
    outcome(pass, notes.join(", "))
}

// ---------------------------------------------------------------------------

fn selected(params: &ModelParams) -> Option<SteadyStateReport> {
    select_steady_state(find_steady_states(params, &SolverOptions::default()).ok()?)
}

fn homophily_sensitivity_sign() -> Outcome {
    let mut r = rng(4);
    let step = 1e-4;
    let (mut checked, mut agree, mut attempts) = (0, 0, 0);
    let mut first_bad = None;
    while checked < 200 && attempts < 20_000 {
        attempts += 1;
        let mut params = split_draw(&mut r, 6);
        params.green.homophily = r.random_range(0.01..0.99);
        let Some(rep) = selected(&params) else { continue };
        let s = rep.state;
        let gap = params.green.pi * s.g1 - params.blue.pi * s.b1;
        if !(rep.converged && rep.stability == Stability::Stable) || gap.abs() <= 1e-6 {
            continue;
        }
        let resolve = |h: f64| {
            let mut q = params;
            q.green.homophily = h;
            solve_steady_state(&q, s, &SolverOptions::default()).ok().filter(|x| x.converged).map(|x| x.state.g1)
        };
        let (Some(up), Some(dn)) = (resolve(params.green.homophily + step), resolve(params.green.homophily - step)) else {
            continue;
        };
        checked += 1;
        let fd = (up - dn) / (2.0 * step);
        if fd.signum() == gap.signum() && fd != 0.0 {
            agree += 1;
        } else {
            first_bad.get_or_insert(format!("{params:?}: fd {fd:e}, gap {gap:e}"));
        }
    }
    outcome(
        checked == 200 && agree == checked,
        format!("{agree}/{checked} stable regular points agree ({attempts} draws){}", first_bad.map(|b| format!(" [{b}]")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------------------

fn jacobian_correctness() -> Outcome {
    let mut r = rng(5);
    let h = 1e-6;
    let (mut points, mut worst, mut negative) = (0, 0.0f64, 0);
    while points < 100 {
        let params = split_draw(&mut r, 6);
        let s = StateVector::new(r.random_range(0.01..0.99), r.random_range(0.01..0.99), r.random_range(0.01..0.99), r.random_range(0.01..0.99));
        if regularity_margin(&s, &params) <= 1e-4 {
            continue;
        }
        points += 1;
        let j1 = jacobian_v1(&s, &params).unwrap();
        let j0 = jacobian_v0(&s, &params).unwrap();
        let fd = |k: usize| {
            let (mut up, mut dn) = (s.to_array(), s.to_array());
            up[k] += h;
            dn[k] -= h;
            let a = step_tally(&StateVector::from_array(up), &params).to_array();
            let b = step_tally(&StateVector::from_array(dn), &params).to_array();
            std::array::from_fn::<f64, 4, _>(|i| (a[i] - b[i]) / (2.0 * h))
        };
        // state order g0, g1, b0, b1
        let (dg0, dg1, db0, db1) = (fd(0), fd(1), fd(2), fd(3));
        let pairs = [
            (j1[0][0], dg1[1]),
            (j1[0][1], db1[1]),
            (j1[1][0], dg1[3]),
            (j1[1][1], db1[3]),
            (j0[0][0], dg0[0]),
            (j0[0][1], db0[0]),
            (j0[1][0], dg0[2]),
            (j0[1][1], db0[2]),
        ];
        for (a, n) in pairs {
            worst = worst.max((a - n).abs());
        }
        negative += j1.iter().flatten().filter(|&&x| x < 0.0).count();
    }
    // stable fixed points
    let (mut stable, mut rho_ok, mut inv_ok, mut reducible) = (0, 0, 0, 0);
    while stable < 100 {
        let params = split_draw(&mut r, 6);
        let Some(rep) = selected(&params) else { continue };
        if rep.stability != Stability::Stable {
            continue;
        }
        stable += 1;
        let j = rep.jacobian.unwrap();
        if rep.spectral_radius.unwrap() < 1.0 {
            rho_ok += 1;
        }
        let a = [[1.0 - j[0][0], -j[0][1]], [-j[1][0], 1.0 - j[1][1]]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let irreducible = j[0][1] > 0.0 && j[1][0] > 0.0;
        let ok = if irreducible {
            inv.iter().flatten().all(|&x| x > 0.0)
        } else {
            reducible += 1;
            // a zero coupling leaves the matching inverse entry at zero
            inv[0][0] > 0.0 && inv[1][1] > 0.0 && inv.iter().flatten().all(|&x| x >= 0.0)
        };
        if ok {
            inv_ok += 1;
        }
    }
    outcome(
        worst <= 1e-5 && negative == 0 && rho_ok == stable && inv_ok == stable,
        format!(
            "100 regular points, max |analytic - fd| {worst:.1e}, {negative} negative v=1 entries; {stable} stable points: rho<1 in {rho_ok}, (I-J)^-1 positive in {inv_ok} ({reducible} reducible, zero coupling entries allowed)"
        ),
    )
}

// ---------------------------------------------------------------------------

fn brute_force_oracle() -> Outcome {
    let mut r = rng(6);
    let (mut n, mut worst) = (0, 0.0f64);
    while n < 100 {
        let mut params = split_draw(&mut r, 4);
        let mut s = unit_state(&mut r);
        if r.random_bool(0.5) {
            params = params.swapped();
            s = s.swapped();
        }
        if regularity_margin(&s, &params) < 1e-9 {
            continue;
        }
        n += 1;
        let a = step_general(&s, &params).unwrap();
        worst = worst.max(a.sup_distance(&brute::oracle_step(&params, &s)));
    }
    outcome(worst <= 1e-10, format!("100 instances with d <= 4, max sup distance {worst:.1e}"))
}

// ---------------------------------------------------------------------------

fn abm_consistency() -> Outcome {
    let params = baseline(0.5, 2);
    let target = selected(&params).unwrap().state.g1;
    let start = Instant::now();
    let mut within = 0;
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for seed in 0..20 {
        let t = Instant::now();
        let config = SimConfig { params, population: 100_000, generations: 30, seed, v: VRealization::One, initial: None };
        let run = run_abm(&config).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let g = run.outcomes.last().unwrap().high_cost.green;
        worst = worst.max((g - target).abs());
        if (g - target).abs() <= 0.01 {
            within += 1;
        }
    }
    let total = start.elapsed().as_secs_f64();
    outcome(
        within >= 19 && total <= 60.0 && (target - 0.5172).abs() < 1e-4,
        format!("g*(1) = {target:.6}, {within}/20 seeds within 0.01 (max gap {worst:.4}), 20 runs in {total:.1}s, slowest {slowest:.1}s"),
    )
}

// ---------------------------------------------------------------------------

fn normalized(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let s: f64 = xs.iter().sum();
    xs.into_iter().map(|x| x / s).collect()
}

fn sorted_costs(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut c: Vec<f64> = (0..n).map(|_| r.random_range(0.05..0.95)).collect();
        c.sort_by(f64::total_cmp);
        if c.windows(2).all(|w| w[1] - w[0] > 0.05) {
            return c;
        }
    }
}

/// Cost-homophilous model: friends always share the observer's cost.
fn cost_homophilous_model(r: &mut ChaCha8Rng) -> CostValueModel {
    let n = 2;
    let costs = sorted_costs(r, n);
    let mut values = vec![0.0, 1.0];
    for w in costs.windows(2) {
        values.push(r.random_range(w[0]..w[1]));
    }
    values.sort_by(f64::total_cmp);
    let prior = normalized(r, values.len());
    let mut rows = Vec::new();
    for observer in 0..2 * n {
        let k = observer % n;
        let mut row = vec![0.0; 2 * n];
        let split = r.random_range(0.1..0.9);
        row[k] = split;
        row[n + k] = 1.0 - split;
        rows.push(row);
    }
    CostValueModel {
        values,
        prior,
        costs,
        group_shares: {
            let l = r.random_range(0.2..0.8);
            GroupPair { blue: 1.0 - l, green: l }
        },
        cost_dist: GroupPair { blue: normalized(r, n), green: normalized(r, n) },
        degrees: GroupPair {
            blue: (0..n).map(|_| r.random_range(2..=3)).collect(),
            green: (0..n).map(|_| r.random_range(2..=3)).collect(),
        },
        friend_dist: FriendDist::Rows(rows),
    }
}

fn complete_learning() -> Outcome {
    let mut r = rng(8);
    let cfg = ProbeConfig::default();
    let (mut fixed, mut probes_ok, mut worst) = (0, 0, 0.0f64);
    for _ in 0..20 {
        let m = cost_homophilous_model(&mut r);
        assert!(homophily_core::multicost::check_assumption_nontrivial(&m));
        let v = verify_complete_learning(&m, &cfg).unwrap();
        worst = worst.max(v.fixed_point_residual);
        if v.perfect_cost_homophily && v.fixed_point_residual <= 1e-12 {
            fixed += 1;
        }
        if v.probes_total == 20 && v.probes_returned == 20 {
            probes_ok += 1;
        }
    }
    let mut broken = 0;
    for _ in 0..20 {
        let mut m = cost_homophilous_model(&mut r);
        let n = m.costs.len();
        let FriendDist::Rows(rows) = &mut m.friend_dist else { unreachable!() };
        // move some weight from one observer's own-cost friends to the other cost
        let observer = r.random_range(0..2 * n);
        let k = observer % n;
        let eps = r.random_range(0.05..0.3);
        let target = if r.random_bool(0.5) { 1 - k } else { n + 1 - k };
        for j in [k, n + k] {
            rows[observer][j] *= 1.0 - eps;
        }
        rows[observer][target] += eps;
        let (pch, witness) = is_perfect_cost_homophily(&m).unwrap();
        let v = verify_complete_learning(&m, &cfg).unwrap();
        let cl = complete_learning_policy(&m);
        let moved = mc_step(&cl, &m).unwrap().sup_distance(&cl);
        let demonstrated = !pch
            && witness.is_some()
            && !v.stable_unique
            && moved > 0.0
            && v.breaking.as_ref().is_some_and(|b| b.deviation >= b.bound - 1e-12 && b.bound > 0.0);
        if demonstrated {
            broken += 1;
        }
    }
    outcome(
        fixed == 20 && probes_ok == 20 && broken == 20,
        format!("20 cost-homophilous models: fixed point in {fixed} (max residual {worst:.1e}), all probes return in {probes_ok}; 20 violating models: witness breaks complete learning in {broken}"),
    )
}

// ---------------------------------------------------------------------------

fn colorblind_model(r: &mut ChaCha8Rng, n: usize, green: Vec<f64>, blue: Vec<f64>, lambda: f64) -> CostValueModel {
    CostValueModel {
        values: vec![0.0, 1.0],
        prior: normalized(r, 2),
        costs: sorted_costs(r, n),
        group_shares: GroupPair { blue: 1.0 - lambda, green: lambda },
        cost_dist: GroupPair { blue, green },
        degrees: GroupPair { blue: vec![2; n], green: vec![2; n] },
        friend_dist: FriendDist::Named("colorblind".into()),
    }
}

fn incidental_homophily_criterion() -> Outcome {
    let mut r = rng(9);
    let mut exceed = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..200 {
        let n = r.random_range(2..=5);
        let lambda = r.random_range(0.1..0.9);
        let (pg, pb) = (normalized(&mut r, n), normalized(&mut r, n));
        let m = colorblind_model(&mut r, n, pg, pb, lambda);
        let avg = incidental_homophily(&m).unwrap();
        let margin = (avg.green - lambda).min(avg.blue - (1.0 - lambda));
        min_margin = min_margin.min(margin);
        if margin > 0.0 {
            exceed += 1;
        }
    }
    let mut shaped = 0;
    let mut first_bad = None;
    for i in 0..200 {
        let n = r.random_range(2..=5);
        let lambda = r.random_range(0.1..0.9);
        let pb = normalized(&mut r, n);
        let mut ratios: Vec<f64> = (0..n).map(|_| r.random_range(0.1..3.0)).collect();
        ratios.sort_by(f64::total_cmp);
        let raw: Vec<f64> = pb.iter().zip(&ratios).map(|(b, q)| b * q).collect();
        let s: f64 = raw.iter().sum();
        let pg: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let m = colorblind_model(&mut r, n, pg.clone(), pb.clone(), lambda);
        let t = homophily_by_cost(&m).unwrap();
        let c_bar = t.c_bar;
        let mut ok = t.lr_dominant;
        for w in t.rows.windows(2) {
            ok &= w[1].green_own_share >= w[0].green_own_share && w[1].blue_own_share <= w[0].blue_own_share;
        }
        for (k, row) in t.rows.iter().enumerate() {
            let green_share = lambda * pg[k] / (lambda * pg[k] + (1.0 - lambda) * pb[k]);
            ok &= (row.green_own_share - green_share).abs() <= 1e-12;
            let above = c_bar.is_some_and(|c| row.cost >= c);
            ok &= if above {
                row.green_own_share >= lambda - 1e-12 && row.blue_own_share <= 1.0 - lambda + 1e-12
            } else {
                row.green_own_share < lambda && row.blue_own_share > 1.0 - lambda
            };
        }
        if ok {
            shaped += 1;
        } else {
            first_bad.get_or_insert(i);
        }
    }
    let example = colorblind_model(&mut rng(0), 2, vec![0.2, 0.8], vec![0.8, 0.2], 0.5);
    let avg = incidental_homophily(&example).unwrap();
    let example_ok = (avg.green - 0.68).abs() <= 1e-12 && (avg.blue - 0.68).abs() <= 1e-12;
    outcome(
        exceed == 200 && shaped == 200 && example_ok,
        format!(
            "{exceed}/200 averages above lambda (min margin {min_margin:.2e}), {shaped}/200 ordered distributions monotone with flip at c_bar{}, two-cost example {:.4}/{:.4}",
            first_bad.map(|i| format!(" [first bad {i}]")).unwrap_or_default(),
            avg.green,
            avg.blue
        ),
    )
}

// ---------------------------------------------------------------------------

const DETERMINISM_CONFIG: &str = r#"{
  "model": {"p": 0.5,
    "green": {"cost": 0.8, "pi": 0.6, "degree": 2, "homophily": 0.5},
    "blue": {"cost": 0.2, "pi": 0.3, "degree": 2, "homophily": 1.0}},
  "dynamics": {"steps": 50},
  "abm": {"population": 5000, "generations": 8, "v": "sample_from_prior"},
  "multicost": {
    "values": [0.0, 0.5, 1.0], "prior": [0.3, 0.4, 0.3], "costs": [0.3, 0.7],
    "group_shares": {"blue": 0.5, "green": 0.5},
    "cost_dist": {"blue": [0.8, 0.2], "green": [0.2, 0.8]},
    "degrees": {"blue": [2, 2], "green": [2, 2]},
    "friend_dist": "colorblind"},
  "seed": 7
}"#;

const COMMANDS: [&str; 6] = ["dynamics", "steady", "sweep", "incidental", "multicost-verify", "abm"];

fn run_all(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    for c in COMMANDS {
        let status = Command::new(env!("CARGO_BIN_EXE_homophily"))
            .current_dir(dir)
            .args([c, "--config", "config.json", "--out", &format!("{c}.out")])
            .status()
            .unwrap();
        if !status.success() {
            return Err(format!("{c} exited with {status}"));
        }
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "config.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    Ok(files)
}

fn cli_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    match (run_all(a.path()), run_all(b.path())) {
        (Ok(x), Ok(y)) => {
            let same = x == y;
            outcome(same && x.len() == 8, format!("{} commands, {} files, byte-identical: {same}", COMMANDS.len(), x.len()))
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

// ---------------------------------------------------------------------------

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("full-homophily closed forms", full_homophily_closed_forms),
        ("good-state fractions dominate along trajectories", good_state_dominates),
        ("homophily/degree crossing", homophily_degree_crossing),
        ("homophily sensitivity sign", homophily_sensitivity_sign),
        ("jacobian", jacobian_correctness),
        ("brute-force oracle", brute_force_oracle),
        ("agent-based consistency", abm_consistency),
        ("complete learning under cost homophily", complete_learning),
        ("incidental homophily", incidental_homophily_criterion),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.1}s)",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
