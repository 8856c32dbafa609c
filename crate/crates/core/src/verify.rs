//! Named invariant suites behind the `verify` CLI subcommand: compact,
//! seeded re-checks of the structural properties the library promises.

use rand::Rng;
use serde::Serialize;

use crate::decompose::{decompose, verify_decomposition};
use crate::driver::{brute_force, sviridenko_greedy};
use crate::error::{Error, Result};
use crate::greedy::exact_set_marginal_expectation;
use crate::grid::{build_grid, classify_elements, large_element_count_bound, restricted_grid};
use crate::lp::{enumerate_box_lp_vertices, solve_box_lp, BoxLp2, LpOutcome};
use crate::multilinear::{
    check_discretization_lemma, estimate_mean, exact_marginals_all, exact_multilinear,
    FractionalPoint,
};
use crate::oracle::{check_monotone_submodular, total_curvature};
use crate::rng::RngStream;
use crate::rounding::{round, weight_tail_profile, RoundingInput};
use crate::set::ElemSet;
use crate::testgen;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteResult {
    fn collect(suite: &str, checks: Vec<CheckOutcome>) -> Self {
        Self {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

fn ok(name: &str) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: true,
        witness: None,
    }
}

fn fail(name: &str, witness: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: false,
        witness: Some(witness),
    }
}

fn check(name: &str, condition: bool, witness: impl FnOnce() -> String) -> CheckOutcome {
    if condition {
        ok(name)
    } else {
        fail(name, witness())
    }
}

pub const SUITES: &[&str] = &[
    "estimator",
    "discretization-lemma",
    "grid-coverage",
    "decomposition-chain",
    "lp-oracle",
    "budget-identities",
    "oracle-invariants",
    "multilinearity",
    "rounding-feasibility",
    "restricted-grid",
    "sviridenko-ratio",
];

/// Runs one named suite. Unknown names are an error (usage); failing checks
/// are results, not errors.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    let rng = RngStream::new(seed);
    match name {
        "estimator" => Ok(estimator_suite(&rng)),
        "discretization-lemma" => Ok(discretization_suite(&rng)),
        "grid-coverage" => Ok(grid_coverage_suite(&rng)),
        "decomposition-chain" => Ok(decomposition_suite(&rng)),
        "lp-oracle" => Ok(lp_suite(&rng)),
        "budget-identities" => Ok(budget_suite(&rng)),
        "oracle-invariants" => Ok(oracle_suite(&rng)),
        "multilinearity" => Ok(multilinearity_suite(&rng)),
        "rounding-feasibility" => Ok(rounding_suite(&rng)),
        "restricted-grid" => Ok(restricted_grid_suite(&rng)),
        "sviridenko-ratio" => Ok(sviridenko_suite(&rng)),
        _ => Err(Error::Invalid(format!(
            "unknown suite {name:?}; available: {}",
            SUITES.join(", ")
        ))),
    }
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteResult>> {
    SUITES.iter().map(|s| run_suite(s, seed)).collect()
}

fn estimator_suite(rng: &RngStream) -> SuiteResult {
    let d = 1.0f64;
    let (alpha, beta, delta) = (0.1, 0.1, 0.01);
    let meta = 50;
    let mut violations = 0;
    for trial in 0..meta {
        let est = estimate_mean(
            |r| if r.random::<f64>() < 0.5 { d } else { 0.0 },
            d,
            alpha,
            beta,
            delta,
            &rng.substream(trial),
        )
        .unwrap();
        let mu = 0.5 * d;
        if (est - mu).abs() > alpha * mu + beta * d {
            violations += 1;
        }
    }
    let allowed = (meta as f64 * 0.02).ceil() as usize;
    SuiteResult::collect(
        "estimator",
        vec![check(
            "bernoulli-mean-within-bound",
            violations <= allowed,
            || format!("{violations}/{meta} estimates out of bound"),
        )],
    )
}

fn discretization_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let mut failures = 0;
    let trials = 200;
    for trial in 0..trials {
        let stream = rng.substream(trial);
        let n = 3 + (trial as usize % 4);
        let f = testgen::random_submodular_table(n, &stream).unwrap();
        let mut r = stream.substream(1).rng();
        let x = FractionalPoint::new((0..n).map(|_| r.random_range(0.0..1.0)).collect()).unwrap();
        let eps = r.random_range(0.05..0.9);
        let y = FractionalPoint::new(
            (0..n)
                .map(|e| r.random_range(0.0..=f64::min((1.0 - x.get(e)) / eps, 1.0)))
                .collect(),
        )
        .unwrap();
        if !check_discretization_lemma(&f, &x, &y, eps).unwrap() {
            failures += 1;
        }
    }
    checks.push(check("ascent-inequality-holds", failures == 0, || {
        format!("{failures}/{trials} random cases violated the inequality")
    }));
    SuiteResult::collect("discretization-lemma", checks)
}

fn grid_coverage_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    for (cell, (eps, n, d)) in [(0.1f64, 8usize, 0.7f64), (0.25, 10, 2.0), (0.5, 2, 1.0)]
        .into_iter()
        .enumerate()
    {
        let grid = build_grid(eps, n, d).unwrap();
        let mut r = rng.substream(cell as u64).rng();
        let mut bad = 0;
        for _ in 0..2000 {
            let v = r.random::<f64>() * n as f64 * d;
            let vp = grid.cover_above(v).unwrap();
            if !(v <= vp + 1e-12 && (1.0 - eps) * vp - eps * d <= v + 1e-12) {
                bad += 1;
            }
        }
        checks.push(check(&format!("sandwich-eps{eps}-n{n}"), bad == 0, || {
            format!("{bad} of 2000 draws escaped the sandwich")
        }));
    }
    SuiteResult::collect("grid-coverage", checks)
}

fn decomposition_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..20u64 {
        let n = 4 + (trial as usize % 4);
        let f = testgen::random_submodular_table(n, &rng.substream(trial)).unwrap();
        for eps in [0.1, 0.25, 0.5] {
            let d = decompose(&f, eps).unwrap();
            let report = verify_decomposition(&d, &f).unwrap();
            if !report.passed {
                failures.push(format!("trial {trial} eps {eps}: {:?}", report.failures));
            }
        }
    }
    checks.push(check("split-chain-holds", failures.is_empty(), || {
        failures.join("; ")
    }));
    SuiteResult::collect("decomposition-chain", checks)
}

fn lp_suite(rng: &RngStream) -> SuiteResult {
    let mut r = rng.rng();
    let mut bad = Vec::new();
    for trial in 0..100 {
        let k = 1 + (trial % 5);
        let support: ElemSet = (0..k).collect();
        let coeff = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..k)
                .map(|_| {
                    if r.random::<f64>() < 0.2 {
                        0.0
                    } else {
                        r.random()
                    }
                })
                .collect()
        };
        let theta = coeff(&mut r);
        let ell = coeff(&mut r);
        let w = coeff(&mut r);
        let a = r.random::<f64>() * 1.3 * theta.iter().sum::<f64>().max(0.1);
        let b = r.random::<f64>() * 1.3 * ell.iter().sum::<f64>().max(0.1);
        let lp = BoxLp2::new(k, &support, w, theta, a, ell, b).unwrap();
        match (solve_box_lp(&lp).unwrap(), enumerate_box_lp_vertices(&lp)) {
            (LpOutcome::Infeasible, None) => {}
            (LpOutcome::Optimal { objective, .. }, Some((_, best))) => {
                if (objective - best).abs() > 1e-6 {
                    bad.push(format!("trial {trial}: {objective} vs {best}"));
                }
            }
            _ => bad.push(format!("trial {trial}: feasibility disagreement")),
        }
    }
    SuiteResult::collect(
        "lp-oracle",
        vec![check("matches-vertex-enumeration", bad.is_empty(), || {
            bad.join("; ")
        })],
    )
}

fn budget_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let mut marginal_bad = 0;
    let mut curvature_bad = 0;
    for trial in 0..10u64 {
        let inst = testgen::random_budget(3, 3, &rng.substream(trial)).unwrap();
        let n = inst.ground_size();
        if n > 10 {
            continue;
        }
        let (f, _) = crate::budget::budget_oracle::<f64>(&inst).unwrap();
        for mask in 0u64..(1 << n) {
            let s = ElemSet::from_mask(mask, n);
            for e in 0..n {
                if s.contains(e) {
                    continue;
                }
                let closed = crate::budget::budget_marginal::<f64>(&inst, &s, e).unwrap();
                let diff = f.eval(&s.with(e)).unwrap() - f.eval(&s).unwrap();
                if (closed - diff).abs() > 1e-12 {
                    marginal_bad += 1;
                }
            }
        }
        let exact = total_curvature(&f).unwrap();
        let bound = crate::budget::budget_curvature_bound::<f64>(&inst).unwrap();
        if exact > bound + 1e-9 {
            curvature_bad += 1;
        }
    }
    checks.push(check("closed-form-marginals", marginal_bad == 0, || {
        format!("{marginal_bad} disagreements")
    }));
    checks.push(check(
        "curvature-bound-dominates",
        curvature_bad == 0,
        || format!("{curvature_bad} instances above the bound"),
    ));
    SuiteResult::collect("budget-identities", checks)
}

fn oracle_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let mut structure_bad = 0;
    let mut lemma_bad = 0;
    for trial in 0..10u64 {
        let n = 4 + (trial as usize % 3);
        let f = testgen::random_submodular_table(n, &rng.substream(trial)).unwrap();
        if !check_monotone_submodular(&f).unwrap().passed {
            structure_bad += 1;
        }
        // Complement-marginal sum dominates (1 - c_f) f(S) for every S.
        let c_f = total_curvature(&f).unwrap();
        let full: ElemSet = (0..n).collect();
        let f_full = f.eval(&full).unwrap();
        let sum: f64 = (0..n)
            .map(|e| f_full - f.eval(&full.without(e)).unwrap())
            .sum();
        for mask in 0u64..(1 << n) {
            let s = ElemSet::from_mask(mask, n);
            if sum < (1.0 - c_f) * f.eval(&s).unwrap() - 1e-9 {
                lemma_bad += 1;
            }
        }
    }
    checks.push(check(
        "generated-functions-valid",
        structure_bad == 0,
        || format!("{structure_bad} instances failed"),
    ));
    checks.push(check(
        "complement-marginal-sum-bound",
        lemma_bad == 0,
        || format!("{lemma_bad} subsets violated"),
    ));
    SuiteResult::collect("oracle-invariants", checks)
}

fn multilinearity_suite(rng: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let mut affine_bad = 0;
    let mut slope_bad = 0;
    for trial in 0..10u64 {
        let n = 4 + (trial as usize % 3);
        let stream = rng.substream(trial);
        let f = testgen::random_submodular_table(n, &stream).unwrap();
        let mut r = stream.substream(2).rng();
        let coords: Vec<f64> = (0..n).map(|_| r.random()).collect();
        let x = FractionalPoint::new(coords).unwrap();
        for e in 0..n {
            // Affine in each coordinate: midpoint value is the average.
            let mut lo = x.clone();
            lo.set(e, 0.0);
            let mut hi = x.clone();
            hi.set(e, 1.0);
            let mut mid = x.clone();
            mid.set(e, 0.5);
            let (flo, fhi, fmid) = (
                exact_multilinear(&f, &lo).unwrap(),
                exact_multilinear(&f, &hi).unwrap(),
                exact_multilinear(&f, &mid).unwrap(),
            );
            if (fmid - 0.5 * (flo + fhi)).abs() > 1e-9 {
                affine_bad += 1;
            }
            // Slope identity: F(x or 1_e) - F(x) = E[f_{R(x)}(e)].
            let diff = fhi - exact_multilinear(&f, &x).unwrap();
            let marg = exact_marginals_all(&f, &x).unwrap()[e];
            if (diff - marg).abs() > 1e-9 {
                slope_bad += 1;
            }
        }
    }
    checks.push(check("coordinatewise-affine", affine_bad == 0, || {
        format!("{affine_bad} coordinates bent")
    }));
    checks.push(check("slope-identity", slope_bad == 0, || {
        format!("{slope_bad} coordinates disagreed")
    }));
    SuiteResult::collect("multilinearity", checks)
}

fn rounding_suite(rng: &RngStream) -> SuiteResult {
    let mut infeasible = 0;
    let mut tail_bad = 0;
    let mut states = 0;
    for trial in 0..4u64 {
        let inst = testgen::coverage_with_curvature(6, 0.25, &rng.substream(trial)).unwrap();
        let dec = decompose(&inst.f, 0.25).unwrap();
        let Ok(run) = crate::driver::known_optimum_run(&dec, &inst.w, 0.25) else {
            continue;
        };
        states += 1;
        let input = RoundingInput::from_state(&run.state, &inst.w);
        for t in 0..500u64 {
            let s = round(&input, &rng.substream(1000 + trial * 500 + t)).unwrap();
            if !s.is_empty() && inst.w.set_weight(&s) > 1.0 {
                infeasible += 1;
            }
        }
        let w_opt = inst.w.set_weight(&run.optimum).max(1e-9);
        let tail = weight_tail_profile(
            &input,
            w_opt,
            &[1.5, 2.0],
            1000,
            &rng.substream(9000 + trial),
        )
        .unwrap();
        if tail[1].1 > tail[0].1 {
            tail_bad += 1;
        }
    }
    SuiteResult::collect(
        "rounding-feasibility",
        vec![
            check("no-overweight-output", infeasible == 0, || {
                format!("{infeasible} violations")
            }),
            check("tail-monotone", tail_bad == 0, || {
                format!("{tail_bad} states")
            }),
            check("states-built", states > 0, || {
                "no verification states produced".into()
            }),
        ],
    )
}

fn restricted_grid_suite(rng: &RngStream) -> SuiteResult {
    // Synthetic regime check of the restriction plus a coupled-run check
    // that the recorded small-segment guesses stay inside it.
    let grid = build_grid(0.25f64, 10, 1.0).unwrap();
    let floor = grid.values()[grid.len() - 2];
    let mut synthetic_bad = 0;
    for &gamma0 in grid.values() {
        for c_g in [0.0, 0.4, 0.8, 0.95] {
            let restricted = restricted_grid(&grid, gamma0, c_g);
            let lo = (1.0 - c_g) * gamma0;
            if lo < floor {
                continue;
            }
            for step in 0..=10 {
                let q = lo + (gamma0 - lo) * step as f64 / 10.0;
                if !restricted.values().contains(&grid.cover_below(q)) {
                    synthetic_bad += 1;
                }
            }
        }
    }
    let mut run_bad = 0;
    let mut runs = 0;
    for trial in 0..4u64 {
        let inst = testgen::coverage_with_curvature(7, 0.3, &rng.substream(trial)).unwrap();
        let dec = decompose(&inst.f, 0.25).unwrap();
        let Ok(run) = crate::driver::known_optimum_run(&dec, &inst.w, 0.25) else {
            continue;
        };
        runs += 1;
        let c_g = total_curvature(&dec.g).unwrap();
        let eps = run.epsilon;
        let base = build_grid(eps, dec.n(), run.d).unwrap();
        let restricted = restricted_grid(&base, run.state.profile.gamma_s[0], c_g);
        for &gamma in &run.state.profile.gamma_s[1..] {
            if !restricted.values().contains(&gamma) {
                run_bad += 1;
            }
        }
    }
    SuiteResult::collect(
        "restricted-grid",
        vec![
            check("synthetic-regime", synthetic_bad == 0, || {
                format!("{synthetic_bad} misses")
            }),
            check("coupled-runs", run_bad == 0 && runs > 0, || {
                format!("{run_bad} guesses escaped over {runs} runs")
            }),
        ],
    )
}

fn sviridenko_suite(rng: &RngStream) -> SuiteResult {
    let mut bad = Vec::new();
    let ratio_floor = 1.0 - 1.0 / std::f64::consts::E;
    for trial in 0..10u64 {
        let inst = testgen::random_coverage(7, 10, 0.4, &rng.substream(trial)).unwrap();
        let opt = brute_force(&inst.f, &inst.w).unwrap();
        let sv = sviridenko_greedy(&inst.f, &inst.w).unwrap();
        if opt.objective > 0.0 && sv.objective < ratio_floor * opt.objective - 1e-9 {
            bad.push(format!(
                "trial {trial}: {} < {} * {}",
                sv.objective, ratio_floor, opt.objective
            ));
        }
        if sv.weight > 1.0 {
            bad.push(format!("trial {trial}: weight {}", sv.weight));
        }
    }
    SuiteResult::collect(
        "sviridenko-ratio",
        vec![check("ratio-floor-and-feasibility", bad.is_empty(), || {
            bad.join("; ")
        })],
    )
}

/// Checks used by the large-element bound property: the guessed-ceiling
/// count really dominates the optimum's large-element count.
pub fn large_bound_dominates(seed: u64) -> Result<bool> {
    let rng = RngStream::new(seed);
    for trial in 0..5u64 {
        let inst = testgen::random_coverage(8, 10, 0.5, &rng.substream(trial))?;
        let dec = decompose(&inst.f, 0.6)?;
        let c_g = total_curvature(&dec.g)?;
        if c_g >= 1.0 {
            continue;
        }
        let eps = 0.6;
        let (_, _, d) = crate::oracle::singleton_maxima(&dec.g, &dec.ell)?;
        let grid = build_grid(eps, dec.n(), d)?;
        let (optimum, _) = crate::driver::brute_force_by(dec.n(), &inst.w, |s| {
            Ok(dec.g.eval(s)? + dec.ell.eval(s)?)
        })?;
        let v_g = grid.cover_above(dec.g.eval(&optimum)?)?;
        let v_l = grid.cover_above(dec.ell.eval(&optimum)?)?;
        let class = classify_elements(&dec.g, &dec.ell, v_g, v_l, eps)?;
        let o_large = optimum.iter().filter(|&e| class.large.contains(e)).count() as u64;
        let bound = large_element_count_bound(c_g, eps)?;
        if o_large > bound {
            return Ok(false);
        }
        // Exact quantities needed by the exactness path must stay finite.
        let _ = exact_set_marginal_expectation(&dec.g, &FractionalPoint::zero(dec.n()), &optimum)?;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for result in run_all(7).unwrap() {
            assert!(result.passed, "{}: {:?}", result.suite, result.checks);
        }
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", 1).is_err());
    }

    #[test]
    fn large_bound_property() {
        assert!(large_bound_dominates(3).unwrap());
    }
}
