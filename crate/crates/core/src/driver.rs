//! Top-level algorithms: exact brute force, cost-benefit greedy, the
//! partial-enumeration greedy, the guess-driven curvature pipeline, and the
//! curvature dispatcher that picks between them.

use serde::Serialize;

use crate::decompose::{decompose, Decomposition};
use crate::error::{Error, Result};
use crate::greedy::{
    guessing_continuous_greedy, normalize_epsilon, EstimationMode, GreedyConfig, GreedyOutcome,
    GreedyState, GuessSource,
};
use crate::grid::{
    build_grid, classify_elements, enumerate_guess_profiles, large_element_count_bound,
    per_copy_grid, GuessProfile,
};
use crate::multilinear::EXACT_CAP;
use crate::oracle::{singleton_maxima, total_curvature, ValueOracle, WeightFn, CHECK_CAP};
use crate::real::Real;
use crate::rng::RngStream;
use crate::rounding::{round, RoundingInput};
use crate::set::ElemSet;

/// Bitmask enumeration limit for the exact optimum.
pub const BRUTE_CAP: usize = 20;
/// Default ceiling on enumerated guess profiles.
pub const DEFAULT_PROFILE_BUDGET: u64 = 1_000_000;

/// How the curvature pipeline obtains its guesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuessMode {
    /// Full Cartesian enumeration of guess profiles (toy sizes only).
    Enumerate,
    /// Good guesses derived from the brute-force optimum (verification).
    KnownOptimum,
    /// A single warm-started profile with no guarantee.
    Heuristic,
}

/// Complete execution mode: guessing strategy plus estimation flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveMode {
    pub guess: GuessMode,
    pub estimation: EstimationMode,
}

impl SolveMode {
    pub const KNOWN_O: SolveMode = SolveMode {
        guess: GuessMode::KnownOptimum,
        estimation: EstimationMode::Exact,
    };
    pub const EXACT: SolveMode = SolveMode {
        guess: GuessMode::Heuristic,
        estimation: EstimationMode::Exact,
    };
    pub const SAMPLED: SolveMode = SolveMode {
        guess: GuessMode::Heuristic,
        estimation: EstimationMode::Sampled,
    };
    pub const ENUMERATE: SolveMode = SolveMode {
        guess: GuessMode::Enumerate,
        estimation: EstimationMode::Sampled,
    };

    /// Parses the CLI mode names.
    pub fn from_token(token: &str) -> Option<SolveMode> {
        match token {
            "exact" => Some(Self::EXACT),
            "sampled" | "heuristic" => Some(Self::SAMPLED),
            "known-O" | "known-o" => Some(Self::KNOWN_O),
            "enumerate" => Some(Self::ENUMERATE),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match (self.guess, self.estimation) {
            (GuessMode::KnownOptimum, _) => "known-O".into(),
            (GuessMode::Enumerate, EstimationMode::Sampled) => "enumerate".into(),
            (GuessMode::Enumerate, EstimationMode::Exact) => "enumerate+exact".into(),
            (GuessMode::Heuristic, EstimationMode::Exact) => "exact".into(),
            (GuessMode::Heuristic, EstimationMode::Sampled) => "sampled".into(),
        }
    }
}

/// Per-run diagnostics carried in every report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub v_g: Option<f64>,
    pub v_l: Option<f64>,
    pub m: Option<usize>,
    pub g_hat_x: Option<f64>,
    pub l_x: Option<f64>,
    pub w_x: Option<f64>,
    pub profiles_tried: u64,
    pub profiles_rejected: u64,
    pub oracle_calls: u64,
    pub route: Option<String>,
}

/// The outcome of one algorithm run. The chosen set is always feasible and
/// the objective is re-evaluated on it at report time.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub chosen_set: Vec<usize>,
    pub objective: f64,
    pub weight: f64,
    pub algorithm: String,
    pub seed: u64,
    pub mode: String,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    fn new(algorithm: &str, chosen: &ElemSet, objective: f64, weight: f64) -> Self {
        Self {
            chosen_set: chosen.to_indices(),
            objective,
            weight,
            algorithm: algorithm.into(),
            seed: 0,
            mode: String::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn chosen(&self) -> ElemSet {
        ElemSet::from_indices(&self.chosen_set)
    }
}

/// Exact optimum of an arbitrary set objective under the knapsack, by
/// bitmask enumeration; ties go to the smallest mask.
pub fn brute_force_by<R: Real>(
    n: usize,
    w: &WeightFn<R>,
    mut value: impl FnMut(&ElemSet) -> Result<R>,
) -> Result<(ElemSet, R)> {
    if n > BRUTE_CAP {
        return Err(Error::GroundTooLarge {
            what: "brute-force optimum",
            n,
            cap: BRUTE_CAP,
        });
    }
    let mut best_set = ElemSet::empty();
    let mut best_val = value(&best_set)?;
    for mask in 1u64..(1u64 << n) {
        let s = ElemSet::from_mask(mask, n);
        if w.set_weight(&s) > R::one() {
            continue;
        }
        let v = value(&s)?;
        if v > best_val {
            best_val = v;
            best_set = s;
        }
    }
    Ok((best_set, best_val))
}

/// Exact optimum of `f` under the knapsack.
pub fn brute_force<R: Real>(f: &ValueOracle<R>, w: &WeightFn<R>) -> Result<RunReport> {
    let calls0 = f.calls();
    let (set, val) = brute_force_by(f.n(), w, |s| f.eval(s))?;
    let mut report = RunReport::new("brute", &set, val.to64(), w.set_weight(&set).to64());
    report.diagnostics.oracle_calls = f.calls() - calls0;
    Ok(report)
}

/// Candidates in marginal-per-weight order: zero-weight elements rank first
/// (by marginal, then index), the rest by ratio.
fn best_ratio_candidate<R: Real>(
    f: &ValueOracle<R>,
    w: &WeightFn<R>,
    s: &ElemSet,
) -> Result<Option<(usize, R)>> {
    let mut best: Option<(usize, R, bool, R)> = None; // (elem, marginal, zero_w, ratio)
    for e in 0..f.n() {
        if s.contains(e) {
            continue;
        }
        let gain = f.marginal(s, e)?;
        if gain <= R::zero() {
            continue;
        }
        let zero_w = w.of(e) <= R::zero();
        let ratio = if zero_w {
            R::infinity()
        } else {
            gain / w.of(e)
        };
        let better = match best {
            None => true,
            Some((be, bg, bz, br)) => {
                if zero_w != bz {
                    zero_w
                } else if zero_w {
                    gain > bg || (gain == bg && e < be)
                } else {
                    ratio > br || (ratio == br && e < be)
                }
            }
        };
        if better {
            best = Some((e, gain, zero_w, ratio));
        }
    }
    Ok(best.map(|(e, gain, _, _)| (e, gain)))
}

/// Cost-benefit greedy with a best-singleton guard.
pub fn greedy_cost_benefit<R: Real>(f: &ValueOracle<R>, w: &WeightFn<R>) -> Result<RunReport> {
    let calls0 = f.calls();
    let mut s = ElemSet::empty();
    let mut weight = R::zero();
    loop {
        // Among elements that still fit, take the best marginal-per-weight.
        let mut pick: Option<(usize, R)> = None;
        for e in 0..f.n() {
            if s.contains(e) || weight + w.of(e) > R::one() {
                continue;
            }
            let gain = f.marginal(&s, e)?;
            if gain <= R::zero() {
                continue;
            }
            let zero_w = w.of(e) <= R::zero();
            let ratio = if zero_w {
                R::infinity()
            } else {
                gain / w.of(e)
            };
            let better = match pick {
                None => true,
                Some((pe, pr)) => ratio > pr || (ratio == pr && e < pe),
            };
            if better {
                pick = Some((e, ratio));
            }
        }
        let Some((e, _)) = pick else { break };
        s.insert(e);
        weight += w.of(e);
    }
    // Guard: a single heavy element can beat any ratio-greedy chain.
    let mut best_single = ElemSet::empty();
    let mut best_single_val = R::zero();
    for e in 0..f.n() {
        if w.of(e) <= R::one() {
            let v = f.singleton(e)?;
            if v > best_single_val {
                best_single_val = v;
                best_single = ElemSet::singleton(e);
            }
        }
    }
    let greedy_val = f.eval(&s)?;
    let (set, val) = if best_single_val > greedy_val {
        (best_single, best_single_val)
    } else {
        (s, greedy_val)
    };
    let mut report = RunReport::new("greedy", &set, val.to64(), w.set_weight(&set).to64());
    report.diagnostics.oracle_calls = f.calls() - calls0;
    Ok(report)
}

/// Partial-enumeration greedy: every feasible start of size at most three is
/// completed by ratio greedy (stopping at the first non-fitting pick), and
/// the best completion wins.
pub fn sviridenko_greedy<R: Real>(f: &ValueOracle<R>, w: &WeightFn<R>) -> Result<RunReport> {
    let n = f.n();
    let calls0 = f.calls();
    let mut best_set = ElemSet::empty();
    let mut best_val = f.eval(&best_set)?;

    let complete = |start: ElemSet| -> Result<(ElemSet, R)> {
        let mut s = start;
        let mut weight = w.set_weight(&s);
        while let Some((e, _gain)) = best_ratio_candidate(f, w, &s)? {
            if weight + w.of(e) > R::one() {
                break;
            }
            s.insert(e);
            weight += w.of(e);
        }
        let v = f.eval(&s)?;
        Ok((s, v))
    };

    let consider = |cand: (ElemSet, R), best_set: &mut ElemSet, best_val: &mut R| {
        if cand.1 > *best_val {
            *best_set = cand.0;
            *best_val = cand.1;
        }
    };

    let mut starts: Vec<ElemSet> = vec![ElemSet::empty()];
    for a in 0..n {
        starts.push(ElemSet::singleton(a));
        for b in a + 1..n {
            starts.push(ElemSet::from_indices(&[a, b]));
            for c in b + 1..n {
                starts.push(ElemSet::from_indices(&[a, b, c]));
            }
        }
    }
    for start in starts {
        if w.set_weight(&start) > R::one() {
            continue;
        }
        let cand = complete(start)?;
        consider(cand, &mut best_set, &mut best_val);
    }

    let mut report = RunReport::new(
        "sviridenko",
        &best_set,
        best_val.to64(),
        w.set_weight(&best_set).to64(),
    );
    report.diagnostics.oracle_calls = f.calls() - calls0;
    Ok(report)
}

/// Everything a known-optimum verification run exposes: the trajectory, the
/// optimum it was coupled to, and the guesses it recorded.
pub struct KnownOptimumRun<R: Real> {
    pub state: Box<GreedyState<R>>,
    pub optimum: ElemSet,
    pub o_large: Vec<usize>,
    pub o_small: ElemSet,
    pub g_opt: R,
    pub ell_opt: R,
    pub v_g: R,
    pub v_l: R,
    pub d: R,
    pub epsilon: R,
}

/// Runs the ascent coupled to the brute-force optimum of `g + ell`. The
/// exact-expectation trajectory is deterministic; only rounding consumes
/// randomness downstream.
pub fn known_optimum_run<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    epsilon: R,
) -> Result<KnownOptimumRun<R>> {
    let (optimum, _) = brute_force_by(dec.n(), w, |s| Ok(dec.g.eval(s)? + dec.ell.eval(s)?))?;
    coupled_run(dec, w, &optimum, epsilon)
}

/// Good guesses for a given optimal set: every grid value is the largest one
/// under the exact trajectory quantity it stands for, so each satisfies its
/// sandwich definition. The trajectory expectations come from a coupled
/// exact run.
pub fn good_guesses_from_optimum<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    optimum: &ElemSet,
    epsilon: R,
) -> Result<GuessProfile<R>> {
    Ok(coupled_run(dec, w, optimum, epsilon)?.state.profile)
}

/// Coupled ascent against a caller-supplied optimal set.
pub fn coupled_run<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    optimum: &ElemSet,
    epsilon: R,
) -> Result<KnownOptimumRun<R>> {
    let n = dec.n();
    if n > CHECK_CAP {
        return Err(Error::GroundTooLarge {
            what: "known-optimum mode",
            n,
            cap: CHECK_CAP,
        });
    }
    let opt_weight = w.set_weight(optimum);
    if opt_weight > R::one() + R::tol() {
        return Err(Error::InfeasibleOptimum {
            weight: opt_weight.to64(),
        });
    }
    let optimum = optimum.clone();
    let eps = normalize_epsilon(epsilon)?;
    let (_, _, d) = singleton_maxima(&dec.g, &dec.ell)?;
    let base_grid = build_grid(eps, n, d)?;
    let g_opt = dec.g.eval(&optimum)?;
    let ell_opt = dec.ell.eval(&optimum)?;
    let v_g = base_grid.cover_above(g_opt)?;
    let v_l = base_grid.cover_above(ell_opt)?;
    let class = classify_elements(&dec.g, &dec.ell, v_g, v_l, eps)?;
    let o_large: Vec<usize> = optimum
        .iter()
        .filter(|&e| class.large.contains(e))
        .collect();
    let o_small: ElemSet = optimum
        .iter()
        .filter(|&e| class.small.contains(e))
        .collect();
    let m = o_large.len();
    let cfg = GreedyConfig {
        epsilon: eps,
        delta: eps,
        mode: EstimationMode::Exact,
        d,
        per_copy_grid: if m > 0 {
            Some(per_copy_grid(eps, m, d)?)
        } else {
            None
        },
        base_grid,
    };
    let outcome = guessing_continuous_greedy(
        dec,
        w,
        &class.large,
        &class.small,
        m,
        GuessSource::KnownOptimum {
            o_large: &o_large,
            o_small: &o_small,
        },
        &cfg,
        &RngStream::new(0),
    )?;
    let mut state = match outcome {
        GreedyOutcome::Completed(state) => state,
        GreedyOutcome::Rejected(reason) => {
            return Err(Error::Invalid(format!(
                "good guesses were rejected ({reason:?}); this indicates a defect"
            )))
        }
    };
    state.profile.v_g = v_g;
    state.profile.v_l = v_l;
    Ok(KnownOptimumRun {
        state,
        optimum,
        o_large,
        o_small,
        g_opt,
        ell_opt,
        v_g,
        v_l,
        d,
        epsilon: eps,
    })
}

struct Candidate<R: Real> {
    set: ElemSet,
    objective: R,
    diag: Diagnostics,
}

fn better_candidate<R: Real>(new: &Candidate<R>, cur: &Option<Candidate<R>>) -> bool {
    match cur {
        None => true,
        Some(best) => {
            new.objective > best.objective
                || (new.objective == best.objective
                    && new.set.cmp_mask(&best.set) == std::cmp::Ordering::Less)
        }
    }
}

fn state_diagnostics<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    state: &GreedyState<R>,
    profile: &GuessProfile<R>,
) -> Diagnostics {
    let mut diag = Diagnostics {
        v_g: Some(profile.v_g.to64()),
        v_l: Some(profile.v_l.to64()),
        m: Some(profile.m),
        l_x: Some(state.total_linear(&dec.ell_coeffs).to64()),
        w_x: Some(state.total_weight(w).to64()),
        ..Diagnostics::default()
    };
    if dec.n() <= EXACT_CAP {
        diag.g_hat_x = state.ghat_exact(&dec.g).ok().map(|v| v.to64());
    }
    diag
}

/// The guess-driven curvature pipeline. Loops over guessed optimum values,
/// classifies elements, runs the copied-ground-set ascent per profile,
/// rounds every completed state, and returns the best `g + ell` candidate.
pub fn knapsack_curvature<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    epsilon: R,
    mode: SolveMode,
    rng: &RngStream,
    budget: u64,
) -> Result<RunReport> {
    let n = dec.n();
    if w.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.n(),
        });
    }
    let calls0 = dec.base_calls();
    let eps = normalize_epsilon(epsilon)?;
    let iterations = (R::one() / eps).round().to64() as usize;
    let objective_of = |s: &ElemSet| -> Result<R> { Ok(dec.g.eval(s)? + dec.ell.eval(s)?) };

    let mut tried = 0u64;
    let mut rejected = 0u64;
    let mut best: Option<Candidate<R>> = None;

    match mode.guess {
        GuessMode::KnownOptimum => {
            if mode.estimation != EstimationMode::Exact {
                return Err(Error::Invalid(
                    "known-O mode requires exact estimation".into(),
                ));
            }
            let run = known_optimum_run(dec, w, eps)?;
            tried = 1;
            let s = round(
                &RoundingInput::from_state(&run.state, w),
                &rng.substream(0x40),
            )?;
            let cand = Candidate {
                objective: objective_of(&s)?,
                diag: state_diagnostics(dec, w, &run.state, &run.state.profile),
                set: s,
            };
            best = Some(cand);
        }
        GuessMode::Heuristic => {
            if mode.estimation == EstimationMode::Exact && n > EXACT_CAP {
                return Err(Error::GroundTooLarge {
                    what: "exact estimation",
                    n,
                    cap: EXACT_CAP,
                });
            }
            let (_, _, d) = singleton_maxima(&dec.g, &dec.ell)?;
            let base_grid = build_grid(eps, n, d)?;
            let warm = greedy_cost_benefit(&dec.f, w)?;
            let warm_set = warm.chosen();
            let g_w = dec.g.eval(&warm_set)?;
            let l_w = dec.ell.eval(&warm_set)?;
            let v_g = base_grid.cover_above(g_w)?;
            let v_l = base_grid.cover_above(l_w)?;
            let class = classify_elements(&dec.g, &dec.ell, v_g, v_l, eps)?;
            let anchors: Vec<usize> = warm_set
                .iter()
                .filter(|&e| class.large.contains(e))
                .collect();
            let m = anchors.len();
            let pc = if m > 0 {
                Some(per_copy_grid(eps, m, d)?)
            } else {
                None
            };
            let small_warm: ElemSet = warm_set
                .iter()
                .filter(|&e| class.small.contains(e))
                .collect();
            let g_small = dec.g.eval(&small_warm)?;
            let l_small = dec.ell.eval(&small_warm)?;
            let decay = |v: R, t: usize| v * (R::one() - eps).powi(t as i32);
            let profile = GuessProfile {
                v_g,
                v_l,
                m,
                gamma_ti: anchors
                    .iter()
                    .map(|&a| {
                        let g_a = dec.g.singleton(a).unwrap_or(R::zero());
                        (0..iterations)
                            .map(|t| {
                                pc.as_ref()
                                    .expect("per-copy grid")
                                    .cover_below(decay(g_a, t))
                            })
                            .collect()
                    })
                    .collect(),
                lambda_i: anchors
                    .iter()
                    .map(|&a| {
                        pc.as_ref()
                            .expect("per-copy grid")
                            .cover_below(dec.ell_coeffs[a])
                    })
                    .collect(),
                gamma_s: (0..iterations)
                    .map(|t| base_grid.cover_below(decay(g_small, t)))
                    .collect(),
                lambda_s: base_grid.cover_below(l_small),
            };
            let cfg = GreedyConfig {
                epsilon: eps,
                delta: eps,
                mode: mode.estimation,
                d,
                base_grid,
                per_copy_grid: pc,
            };
            tried = 1;
            let outcome = guessing_continuous_greedy(
                dec,
                w,
                &class.large,
                &class.small,
                m,
                GuessSource::Profile(&profile),
                &cfg,
                &rng.substream(0x17),
            )?;
            match outcome {
                GreedyOutcome::Completed(state) => {
                    let s = round(&RoundingInput::from_state(&state, w), &rng.substream(0x40))?;
                    let cand = Candidate {
                        objective: objective_of(&s)?,
                        diag: state_diagnostics(dec, w, &state, &profile),
                        set: s,
                    };
                    best = Some(cand);
                }
                GreedyOutcome::Rejected(_) => rejected = 1,
            }
        }
        GuessMode::Enumerate => {
            if mode.estimation == EstimationMode::Exact && n > EXACT_CAP {
                return Err(Error::GroundTooLarge {
                    what: "exact estimation",
                    n,
                    cap: EXACT_CAP,
                });
            }
            let (_, _, d) = singleton_maxima(&dec.g, &dec.ell)?;
            let base_grid = build_grid(eps, n, d)?;
            let c_g = total_curvature(&dec.g)?;
            let m_cap = large_element_count_bound(c_g, eps)?;

            // Distinct classifications only: the guessed values enter the
            // run solely through the large/small split.
            let mut cells: Vec<(R, R, crate::grid::ElementClassification<R>)> = Vec::new();
            let mut seen: Vec<ElemSet> = Vec::new();
            for &v_g in base_grid.values() {
                for &v_l in base_grid.values() {
                    let class = classify_elements(&dec.g, &dec.ell, v_g, v_l, eps)?;
                    if seen.contains(&class.large) {
                        continue;
                    }
                    seen.push(class.large.clone());
                    cells.push((v_g, v_l, class));
                }
            }

            // Count everything first so the budget check precedes any work.
            let mut total: u128 = 0;
            for (v_g, v_l, class) in &cells {
                let m_max = (m_cap.min(class.large.len() as u64)) as usize;
                for m in 0..=m_max {
                    let en = enumerate_guess_profiles(
                        &base_grid,
                        d,
                        *v_g,
                        *v_l,
                        m,
                        iterations,
                        c_g,
                        u64::MAX,
                    )?;
                    total = total
                        .checked_add(en.count())
                        .ok_or(Error::EnumerationBudget {
                            needed: u128::MAX,
                            budget,
                        })?;
                }
            }
            if total > budget as u128 {
                return Err(Error::EnumerationBudget {
                    needed: total,
                    budget,
                });
            }

            for (cell_idx, (v_g, v_l, class)) in cells.iter().enumerate() {
                let m_max = (m_cap.min(class.large.len() as u64)) as usize;
                for m in 0..=m_max {
                    let en = enumerate_guess_profiles(
                        &base_grid,
                        d,
                        *v_g,
                        *v_l,
                        m,
                        iterations,
                        c_g,
                        u64::MAX,
                    )?;
                    let pc = if m > 0 {
                        Some(per_copy_grid(eps, m, d)?)
                    } else {
                        None
                    };
                    let cfg = GreedyConfig {
                        epsilon: eps,
                        delta: eps,
                        mode: mode.estimation,
                        d,
                        base_grid: base_grid.clone(),
                        per_copy_grid: pc,
                    };
                    for (p_idx, profile) in en.iter().enumerate() {
                        tried += 1;
                        let sub = rng
                            .substream(0x2e)
                            .substream(cell_idx as u64)
                            .substream(m as u64)
                            .substream(p_idx as u64);
                        let outcome = guessing_continuous_greedy(
                            dec,
                            w,
                            &class.large,
                            &class.small,
                            m,
                            GuessSource::Profile(&profile),
                            &cfg,
                            &sub,
                        )?;
                        match outcome {
                            GreedyOutcome::Completed(state) => {
                                let s = round(
                                    &RoundingInput::from_state(&state, w),
                                    &sub.substream(0x40),
                                )?;
                                let cand = Candidate {
                                    objective: objective_of(&s)?,
                                    diag: state_diagnostics(dec, w, &state, &profile),
                                    set: s,
                                };
                                if better_candidate(&cand, &best) {
                                    best = Some(cand);
                                }
                            }
                            GreedyOutcome::Rejected(_) => rejected += 1,
                        }
                    }
                }
            }
        }
    }

    let (set, objective, mut diag) = match best {
        Some(c) => (c.set, c.objective, c.diag),
        None => {
            let empty = ElemSet::empty();
            let obj = objective_of(&empty)?;
            (empty, obj, Diagnostics::default())
        }
    };
    diag.profiles_tried = tried;
    diag.profiles_rejected = rejected;
    diag.oracle_calls = dec.base_calls() - calls0;
    Ok(RunReport {
        chosen_set: set.to_indices(),
        objective: objective.to64(),
        weight: w.set_weight(&set).to64(),
        algorithm: "curvature".into(),
        seed: rng.seed(),
        mode: mode.label(),
        diagnostics: diag,
    })
}

/// Curvature-aware entry point: high-curvature inputs go to the
/// partial-enumeration greedy, the rest are decomposed and handed to the
/// guess-driven pipeline at half the accuracy parameter.
pub fn dispatch<R: Real>(
    f: &ValueOracle<R>,
    w: &WeightFn<R>,
    epsilon: R,
    mode: SolveMode,
    rng: &RngStream,
    budget: u64,
) -> Result<RunReport> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    let calls0 = f.calls();
    let c_f = total_curvature(f)?;
    let threshold = R::one() - R::of(std::f64::consts::E) * epsilon;
    if c_f >= threshold {
        let mut report = sviridenko_greedy(f, w)?;
        report.algorithm = "dispatch(sviridenko)".into();
        report.seed = rng.seed();
        report.mode = mode.label();
        report.diagnostics.route = Some("sviridenko".into());
        report.diagnostics.oracle_calls = f.calls() - calls0;
        Ok(report)
    } else {
        let dec = decompose(f, epsilon)?;
        let mut report = knapsack_curvature(&dec, w, epsilon / R::of(2.0), mode, rng, budget)?;
        report.algorithm = "dispatch(curvature)".into();
        report.diagnostics.route = Some("curvature".into());
        report.diagnostics.oracle_calls = f.calls() - calls0;
        // g + ell reproduces f, so the objective carries over; re-evaluate
        // against f for the report anyway.
        let chosen = report.chosen();
        report.objective = f.eval(&chosen)?.to64();
        Ok(report)
    }
}
