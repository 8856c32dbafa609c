//! The guessing continuous-greedy ascent over a copied ground set.
//!
//! The ground set is expanded into `m` full copies (one per guessed large
//! optimal element) plus one shared segment for the small elements. Each of
//! the `1/eps` iterations picks, per copy, a minimum-weight element clearing
//! the guessed marginal and linear thresholds, then adds an LP direction on
//! the small segment. Expectations are either exact (small ground sets) or
//! sampled through the mean estimator.

use std::sync::Arc;

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::grid::{GuessProfile, ValueGrid};
use crate::lp::{solve_box_lp, BoxLp2, LpOutcome};
use crate::multilinear::{
    estimate_marginal_over_random_set, exact_marginals_all, exact_multilinear,
    subset_probabilities, FractionalPoint, EXACT_CAP,
};
use crate::oracle::{SetFunction, ValueOracle, WeightFn};
use crate::real::Real;
use crate::rng::RngStream;
use crate::set::ElemSet;

/// How marginal expectations are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimationMode {
    /// Exact expectations by subset enumeration (needs a small ground set).
    Exact,
    /// Monte Carlo estimates with the relative+additive error contract.
    Sampled,
}

/// Layout of the copied ground set: `m` full copies of the base set followed
/// by one slot per small element. Index `i * n + b` is copy `i` of base
/// element `b`; index `m * n + s` is the `s`-th small element.
#[derive(Clone, Debug)]
pub struct CopiedGroundSet {
    base_n: usize,
    m: usize,
    small: Vec<usize>,
    small_slot: Vec<Option<usize>>,
}

impl CopiedGroundSet {
    pub fn new(base_n: usize, m: usize, small: &ElemSet) -> Self {
        let small: Vec<usize> = small.iter().collect();
        let mut small_slot = vec![None; base_n];
        for (slot, &b) in small.iter().enumerate() {
            small_slot[b] = Some(slot);
        }
        Self {
            base_n,
            m,
            small,
            small_slot,
        }
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn copies(&self) -> usize {
        self.m
    }

    pub fn small_elements(&self) -> &[usize] {
        &self.small
    }

    /// Total number of expanded indices.
    pub fn len(&self) -> usize {
        self.m * self.base_n + self.small.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn copy_index(&self, copy: usize, base: usize) -> usize {
        debug_assert!(copy < self.m && base < self.base_n);
        copy * self.base_n + base
    }

    pub fn small_index(&self, base: usize) -> Option<usize> {
        self.small_slot[base].map(|slot| self.m * self.base_n + slot)
    }

    pub fn base_of(&self, index: usize) -> usize {
        if index < self.m * self.base_n {
            index % self.base_n
        } else {
            self.small[index - self.m * self.base_n]
        }
    }

    /// Collapses an expanded set to the base set it stands for.
    pub fn collapse_set(&self, s: &ElemSet) -> ElemSet {
        s.iter().map(|i| self.base_of(i)).collect()
    }

    /// Collapses inclusion probabilities: a base element is drawn when any
    /// of its expanded sources is, independently across base elements.
    pub fn collapse_probs<R: Real>(&self, x: &FractionalPoint<R>) -> FractionalPoint<R> {
        debug_assert_eq!(x.dim(), self.len());
        let mut miss = vec![R::one(); self.base_n];
        for idx in 0..self.len() {
            let p = x.get(idx);
            if p > R::zero() {
                let b = self.base_of(idx);
                miss[b] *= R::one() - p;
            }
        }
        FractionalPoint::new(miss.into_iter().map(|q| R::one() - q).collect())
            .expect("collapsed probabilities stay in [0,1]")
    }

    /// Weight of an expanded point under base weights (copies each count).
    pub fn expanded_weight<R: Real>(&self, x: &FractionalPoint<R>, w: &WeightFn<R>) -> R {
        (0..self.len())
            .map(|i| x.get(i) * w.of(self.base_of(i)))
            .sum()
    }

    /// Linear value of an expanded point under base coefficients.
    pub fn expanded_linear<R: Real>(&self, x: &FractionalPoint<R>, coeffs: &[R]) -> R {
        (0..self.len())
            .map(|i| x.get(i) * coeffs[self.base_of(i)])
            .sum()
    }
}

/// The base submodular function lifted to the copied ground set: copies
/// collapse to their union before evaluation.
struct CopiedFn<R: Real> {
    base: ValueOracle<R>,
    layout: CopiedGroundSet,
}

impl<R: Real> SetFunction<R> for CopiedFn<R> {
    fn n(&self) -> usize {
        self.layout.len()
    }

    fn value(&self, s: &ElemSet) -> R {
        self.base.eval_unchecked(&self.layout.collapse_set(s))
    }
}

/// Oracle view of the lifted function over the copied ground set.
pub fn copied_oracle<R: Real>(base: &ValueOracle<R>, layout: &CopiedGroundSet) -> ValueOracle<R> {
    ValueOracle::new(Arc::new(CopiedFn {
        base: base.clone(),
        layout: layout.clone(),
    }))
}

/// Exact `E[f_{R(x)}(T)]` for a base set `T` under a base point.
pub fn exact_set_marginal_expectation<R: Real>(
    f: &ValueOracle<R>,
    x: &FractionalPoint<R>,
    t: &ElemSet,
) -> Result<R> {
    let n = f.n();
    if n > EXACT_CAP {
        return Err(Error::GroundTooLarge {
            what: "exact set-marginal expectation",
            n,
            cap: EXACT_CAP,
        });
    }
    if t.is_empty() {
        return Ok(R::zero());
    }
    let probs = subset_probabilities(x);
    let mut total = R::zero();
    for (mask, &p) in probs.iter().enumerate() {
        if p > R::zero() {
            let s = ElemSet::from_mask(mask as u64, n);
            total += p * (f.eval(&s.union(t))? - f.eval(&s)?);
        }
    }
    Ok(total)
}

/// Why a guess profile was abandoned mid-run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// No element in a copy cleared the marginal/linear thresholds.
    NoLargeCandidate { time: usize, copy: usize },
    /// The small-element LP had no feasible direction.
    SmallLpInfeasible { time: usize },
}

/// Result of one guessing-continuous-greedy run. Rejection is an ordinary
/// outcome: the enumeration driver feeds many hopeless profiles.
pub enum GreedyOutcome<R: Real> {
    Completed(Box<GreedyState<R>>),
    Rejected(RejectReason),
}

impl<R: Real> GreedyOutcome<R> {
    pub fn completed(self) -> Option<Box<GreedyState<R>>> {
        match self {
            GreedyOutcome::Completed(s) => Some(s),
            GreedyOutcome::Rejected(_) => None,
        }
    }
}

/// Full trajectory of one run.
pub struct GreedyState<R: Real> {
    pub copied: CopiedGroundSet,
    /// One point per copy, supported on that copy's segment.
    pub y: Vec<FractionalPoint<R>>,
    /// Accumulated small-element direction, supported on the small segment.
    pub z: FractionalPoint<R>,
    pub epsilon: R,
    pub iterations: usize,
    /// Per iteration: the LP direction added to `z`.
    pub v_history: Vec<FractionalPoint<R>>,
    /// Per iteration, per copy: the chosen base element.
    pub e_history: Vec<Vec<usize>>,
    /// The guesses the run actually consumed (recorded for replay).
    pub profile: GuessProfile<R>,
}

impl<R: Real> GreedyState<R> {
    /// The combined point `sum_i y_i + z` over the copied ground set.
    pub fn x(&self) -> FractionalPoint<R> {
        let mut x = FractionalPoint::zero(self.copied.len());
        for y in &self.y {
            x.add_scaled(y, R::one());
        }
        x.add_scaled(&self.z, R::one());
        x
    }

    /// `W(x)` under base weights.
    pub fn total_weight(&self, w: &WeightFn<R>) -> R {
        self.copied.expanded_weight(&self.x(), w)
    }

    /// `L(x)` under base linear coefficients.
    pub fn total_linear(&self, coeffs: &[R]) -> R {
        self.copied.expanded_linear(&self.x(), coeffs)
    }

    /// Exact value of the lifted multilinear extension at `x`, evaluated by
    /// collapsing the inclusion probabilities onto the base set.
    pub fn ghat_exact(&self, g: &ValueOracle<R>) -> Result<R> {
        exact_multilinear(g, &self.copied.collapse_probs(&self.x()))
    }
}

/// Where guesses come from during a run.
pub enum GuessSource<'a, R: Real> {
    /// A fixed, fully specified profile.
    Profile(&'a GuessProfile<R>),
    /// Good guesses computed on the fly from a known optimum. Requires exact
    /// estimation; records the produced profile in the state.
    KnownOptimum {
        o_large: &'a [usize],
        o_small: &'a ElemSet,
    },
}

/// Shared knobs for one run.
pub struct GreedyConfig<R: Real> {
    /// Step size; `1/epsilon` must be integral (callers normalize).
    pub epsilon: R,
    pub delta: R,
    pub mode: EstimationMode,
    /// Ceiling on singleton values of both functions, used by estimator
    /// error terms and LP bounds.
    pub d: R,
    /// Grid for small-segment guesses (known-optimum recording).
    pub base_grid: ValueGrid<R>,
    /// Grid for per-copy guesses (known-optimum recording); `None` iff `m = 0`.
    pub per_copy_grid: Option<ValueGrid<R>>,
}

fn iteration_count<R: Real>(epsilon: R) -> Result<usize> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    let inv = R::one() / epsilon;
    let rounded = inv.round();
    if (inv - rounded).abs() > R::of(1e-6) {
        return Err(Error::Invalid(format!("1/epsilon = {inv} is not integral")));
    }
    Ok(rounded.to64() as usize)
}

/// Normalizes a step size so that `1/epsilon` is an integer, rounding the
/// iteration count up (the step shrinks, never grows).
pub fn normalize_epsilon<R: Real>(epsilon: R) -> Result<R> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    let inv = R::one() / epsilon;
    let rounded = inv.round();
    let steps = if (inv - rounded).abs() <= R::of(1e-9) {
        rounded
    } else {
        inv.ceil()
    };
    Ok(R::one() / steps)
}

/// One small-element step: estimates per-element marginal expectations on
/// the small segment and solves the covering LP
/// `min W(v)` s.t. `v . theta >= (1 - eps) gamma - eps d`, `L(v) >= lambda`.
///
/// Returns the direction, or the infeasibility marker that rejects the
/// current guess profile upstream.
#[allow(clippy::too_many_arguments)]
pub fn small_elements<R: Real>(
    g: &ValueOracle<R>,
    ell_coeffs: &[R],
    w: &WeightFn<R>,
    copied: &CopiedGroundSet,
    gamma: R,
    lambda: R,
    x: &FractionalPoint<R>,
    epsilon: R,
    delta: R,
    d: R,
    mode: EstimationMode,
    rng: &RngStream,
) -> Result<LpOutcome<R>> {
    let n = R::of(g.n() as f64);
    let theta: Vec<R> = match mode {
        EstimationMode::Exact => {
            let marg = exact_marginals_all(g, &copied.collapse_probs(x))?;
            copied
                .small_elements()
                .iter()
                .map(|&b| marg[b].max(R::zero()))
                .collect()
        }
        EstimationMode::Sampled => {
            let ghat = copied_oracle(g, copied);
            let mut theta = Vec::with_capacity(copied.small_elements().len());
            for (slot, &b) in copied.small_elements().iter().enumerate() {
                let idx = copied.small_index(b).expect("small element has a slot");
                let est = estimate_marginal_over_random_set(
                    &ghat,
                    x,
                    idx,
                    epsilon,
                    epsilon / n,
                    delta / n,
                    d,
                    &rng.substream(slot as u64),
                )?;
                theta.push(est.max(R::zero()));
            }
            theta
        }
    };

    let support: ElemSet = copied
        .small_elements()
        .iter()
        .map(|&b| copied.small_index(b).expect("small element has a slot"))
        .collect();
    let weights: Vec<R> = copied.small_elements().iter().map(|&b| w.of(b)).collect();
    let ell_row: Vec<R> = copied
        .small_elements()
        .iter()
        .map(|&b| ell_coeffs[b])
        .collect();
    let lp = BoxLp2::new(
        copied.len(),
        &support,
        weights,
        theta,
        (R::one() - epsilon) * gamma - epsilon * d,
        ell_row,
        lambda,
    )?;
    solve_box_lp(&lp)
}

/// Runs the full guessing continuous-greedy ascent.
///
/// `e_large`/`e_small` partition the base ground set; copies span the whole
/// base set, the LP direction lives on `e_small`. With a `KnownOptimum`
/// source the guesses are derived from the trajectory itself (largest grid
/// value under the exact quantity) and recorded into the returned state.
#[allow(clippy::too_many_arguments)]
pub fn guessing_continuous_greedy<R: Real>(
    dec: &Decomposition<R>,
    w: &WeightFn<R>,
    e_large: &ElemSet,
    e_small: &ElemSet,
    m: usize,
    source: GuessSource<'_, R>,
    cfg: &GreedyConfig<R>,
    rng: &RngStream,
) -> Result<GreedyOutcome<R>> {
    let n = dec.n();
    let iterations = iteration_count(cfg.epsilon)?;
    let eps = cfg.epsilon;
    if e_large.union(e_small).len() != n || !e_large.is_subset_of(&(0..n).collect()) {
        return Err(Error::Invalid(
            "large/small sets must partition the ground set".into(),
        ));
    }
    if let GuessSource::Profile(p) = &source {
        p.validate(iterations)?;
        if p.m != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.m,
            });
        }
    }
    if matches!(source, GuessSource::KnownOptimum { .. }) && cfg.mode != EstimationMode::Exact {
        return Err(Error::Invalid(
            "known-optimum guesses need exact estimation".into(),
        ));
    }
    if cfg.mode == EstimationMode::Exact && n > EXACT_CAP {
        return Err(Error::GroundTooLarge {
            what: "exact-mode ascent",
            n,
            cap: EXACT_CAP,
        });
    }

    let copied = CopiedGroundSet::new(n, m, e_small);
    let ghat = copied_oracle(&dec.g, &copied);
    let mut y: Vec<FractionalPoint<R>> = (0..m)
        .map(|_| FractionalPoint::zero(copied.len()))
        .collect();
    let mut z = FractionalPoint::zero(copied.len());
    let mut v_history = Vec::with_capacity(iterations);
    let mut e_history: Vec<Vec<usize>> = Vec::with_capacity(iterations);

    // Recorded profile; for fixed-profile runs this echoes the input.
    let mut rec = GuessProfile {
        v_g: R::zero(),
        v_l: R::zero(),
        m,
        gamma_ti: vec![vec![R::zero(); iterations]; m],
        lambda_i: vec![R::zero(); m],
        gamma_s: vec![R::zero(); iterations],
        lambda_s: R::zero(),
    };

    // Per-copy linear guesses are time-independent; fix them up front.
    match &source {
        GuessSource::Profile(p) => {
            rec.v_g = p.v_g;
            rec.v_l = p.v_l;
            rec.lambda_i = p.lambda_i.clone();
            rec.lambda_s = p.lambda_s;
        }
        GuessSource::KnownOptimum { o_large, o_small } => {
            let grid = cfg.per_copy_grid.as_ref();
            for (ic, &o) in o_large.iter().enumerate() {
                let truth = dec.ell_coeffs[o];
                rec.lambda_i[ic] = grid
                    .expect("per-copy grid required when m > 0")
                    .cover_below(truth);
            }
            let ell_os: R = o_small.iter().map(|b| dec.ell_coeffs[b]).sum();
            rec.lambda_s = cfg.base_grid.cover_below(ell_os);
        }
    }

    let current_x = |y: &[FractionalPoint<R>], z: &FractionalPoint<R>| {
        let mut x = FractionalPoint::zero(copied.len());
        for yi in y {
            x.add_scaled(yi, R::one());
        }
        x.add_scaled(z, R::one());
        x
    };

    for t in 0..iterations {
        let mut picked = Vec::with_capacity(m);
        for ic in 0..m {
            let x = current_x(&y, &z);
            // Marginal expectations for every element of this copy.
            let theta: Vec<R> = match cfg.mode {
                EstimationMode::Exact => exact_marginals_all(&dec.g, &copied.collapse_probs(&x))?
                    .into_iter()
                    .map(|v| v.max(R::zero()))
                    .collect(),
                EstimationMode::Sampled => {
                    let m_r = R::of(m as f64);
                    let n_r = R::of(n as f64);
                    let mut theta = Vec::with_capacity(n);
                    for b in 0..n {
                        let idx = copied.copy_index(ic, b);
                        let sub = rng
                            .substream(0x1a)
                            .substream(t as u64)
                            .substream(ic as u64)
                            .substream(b as u64);
                        let est = estimate_marginal_over_random_set(
                            &ghat,
                            &x,
                            idx,
                            eps,
                            eps / m_r,
                            eps * cfg.delta / (R::of(2.0) * n_r * m_r),
                            cfg.d,
                            &sub,
                        )?;
                        theta.push(est.max(R::zero()));
                    }
                    theta
                }
            };

            let gamma = match &source {
                GuessSource::Profile(p) => p.gamma_ti[ic][t],
                GuessSource::KnownOptimum { o_large, .. } => {
                    let truth = theta[o_large[ic]];
                    cfg.per_copy_grid
                        .as_ref()
                        .expect("per-copy grid")
                        .cover_below(truth)
                }
            };
            rec.gamma_ti[ic][t] = gamma;
            let lambda = rec.lambda_i[ic];

            let m_r = R::of(m.max(1) as f64);
            let bar = (R::one() - eps) * gamma - eps * cfg.d / m_r;
            let mut choice: Option<usize> = None;
            #[allow(clippy::needless_range_loop)]
            for b in 0..n {
                if theta[b] >= bar && dec.ell_coeffs[b] >= lambda {
                    let better = match choice {
                        None => true,
                        Some(cur) => w.of(b) < w.of(cur),
                    };
                    if better {
                        choice = Some(b);
                    }
                }
            }
            let Some(b) = choice else {
                return Ok(GreedyOutcome::Rejected(RejectReason::NoLargeCandidate {
                    time: t,
                    copy: ic,
                }));
            };
            let idx = copied.copy_index(ic, b);
            let step = FractionalPoint::indicator(&ElemSet::singleton(idx), copied.len());
            y[ic].add_scaled(&step, eps);
            picked.push(b);
        }

        // Small-element direction at the post-update point.
        let x = current_x(&y, &z);
        let (gamma_s, lambda_s) = match &source {
            GuessSource::Profile(p) => (p.gamma_s[t], p.lambda_s),
            GuessSource::KnownOptimum { o_small, .. } => {
                let truth =
                    exact_set_marginal_expectation(&dec.g, &copied.collapse_probs(&x), o_small)?;
                (cfg.base_grid.cover_below(truth), rec.lambda_s)
            }
        };
        rec.gamma_s[t] = gamma_s;

        let outcome = small_elements(
            &dec.g,
            &dec.ell_coeffs,
            w,
            &copied,
            gamma_s,
            lambda_s,
            &x,
            eps,
            eps * cfg.delta / R::of(2.0),
            cfg.d,
            cfg.mode,
            &rng.substream(0x5e).substream(t as u64),
        )?;
        let Some((v, _)) = outcome.optimal() else {
            return Ok(GreedyOutcome::Rejected(RejectReason::SmallLpInfeasible {
                time: t,
            }));
        };
        z.add_scaled(&v, eps);
        v_history.push(v);
        e_history.push(picked);
    }

    Ok(GreedyOutcome::Completed(Box::new(GreedyState {
        copied,
        y,
        z,
        epsilon: eps,
        iterations,
        v_history,
        e_history,
        profile: rec,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::grid::{build_grid, per_copy_grid};
    use crate::oracle::WeightFn;

    fn demo_decomposition() -> Decomposition<f64> {
        let f = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap();
        decompose(&f, 0.5).unwrap()
    }

    #[test]
    fn copied_layout_round_trips() {
        let small = ElemSet::from_indices(&[1, 3]);
        let c = CopiedGroundSet::new(4, 2, &small);
        assert_eq!(c.len(), 10);
        assert_eq!(c.copy_index(1, 2), 6);
        assert_eq!(c.base_of(6), 2);
        assert_eq!(c.small_index(3), Some(9));
        assert_eq!(c.small_index(0), None);
        assert_eq!(c.base_of(9), 3);
        let s = ElemSet::from_indices(&[0, 6, 9]);
        assert_eq!(c.collapse_set(&s).to_indices(), vec![0, 2, 3]);
    }

    #[test]
    fn collapse_probs_combine_copies() {
        // Two copies of the same base element at 0.5 each: inclusion 0.75.
        let c = CopiedGroundSet::new(1, 2, &ElemSet::empty());
        let mut x = FractionalPoint::<f64>::zero(2);
        x.set(0, 0.5);
        x.set(1, 0.5);
        let p = c.collapse_probs(&x);
        assert!((p.get(0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn collapse_identity_when_no_copies() {
        let small = ElemSet::from_indices(&[0, 1]);
        let c = CopiedGroundSet::new(2, 0, &small);
        let mut x = FractionalPoint::<f64>::zero(2);
        x.set(0, 0.3);
        x.set(1, 0.9);
        let p = c.collapse_probs(&x);
        assert!((p.get(0) - 0.3).abs() < 1e-12);
        assert!((p.get(1) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn copied_oracle_collapses_unions() {
        let dec = demo_decomposition();
        let c = CopiedGroundSet::new(2, 2, &ElemSet::empty());
        let ghat = copied_oracle(&dec.g, &c);
        // Copies of both elements in different segments: same as base {0,1}.
        let s = ElemSet::from_indices(&[0, 3]);
        let base = ElemSet::from_indices(&[0, 1]);
        assert!((ghat.eval(&s).unwrap() - dec.g.eval(&base).unwrap()).abs() < 1e-12);
        // Duplicate copies of one element collapse.
        let dup = ElemSet::from_indices(&[0, 2]);
        assert!(
            (ghat.eval(&dup).unwrap() - dec.g.eval(&ElemSet::singleton(0)).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn small_elements_unconstrained_returns_zero() {
        let dec = demo_decomposition();
        let small = ElemSet::from_indices(&[0, 1]);
        let copied = CopiedGroundSet::new(2, 0, &small);
        let w = WeightFn::new(vec![0.4, 0.3]).unwrap();
        let x = FractionalPoint::zero(copied.len());
        let out = small_elements(
            &dec.g,
            &dec.ell_coeffs,
            &w,
            &copied,
            -1.0,
            0.0,
            &x,
            0.5,
            0.5,
            1.0,
            EstimationMode::Exact,
            &RngStream::new(1),
        )
        .unwrap();
        let (v, obj) = out.optimal().unwrap();
        assert_eq!(obj, 0.0);
        assert!(v.coords().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn exact_set_marginal_matches_singletons_sum_for_linear() {
        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4, 0.2]).unwrap();
        let x = FractionalPoint::new(vec![0.5, 0.1, 0.9]).unwrap();
        let t = ElemSet::from_indices(&[0, 2]);
        let got = exact_set_marginal_expectation(&l, &x, &t).unwrap();
        // Linear: E[l_R(T)] = sum over T of l(e) * Pr[e not in R].
        let expect = 0.3 * 0.5 + 0.2 * 0.1;
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn known_optimum_run_on_singleton_instance() {
        // One element, f(a) = 1, w(a) = 0.5: the ascent must saturate it.
        let f: ValueOracle<f64> = ValueOracle::table(1, vec![0.0, 1.0]).unwrap();
        let dec = decompose(&f, 0.5).unwrap();
        let w = WeightFn::new(vec![0.5]).unwrap();
        let eps = 0.5;
        let d = dec.ell_coeffs[0].max(dec.g.singleton(0).unwrap());
        let base_grid = build_grid(eps, 1, d).unwrap();
        let cfg = GreedyConfig {
            epsilon: eps,
            delta: eps,
            mode: EstimationMode::Exact,
            d,
            per_copy_grid: Some(per_copy_grid(eps, 1, d).unwrap()),
            base_grid,
        };
        let o_large = vec![0usize];
        let o_small = ElemSet::empty();
        let out = guessing_continuous_greedy(
            &dec,
            &w,
            &ElemSet::singleton(0),
            &ElemSet::empty(),
            1,
            GuessSource::KnownOptimum {
                o_large: &o_large,
                o_small: &o_small,
            },
            &cfg,
            &RngStream::new(3),
        )
        .unwrap();
        let state = out.completed().expect("good guesses never reject");
        assert_eq!(state.e_history, vec![vec![0], vec![0]]);
        let x = state.x();
        assert!((x.get(0) - 1.0).abs() < 1e-12);
        assert!((state.total_weight(&w) - 0.5).abs() < 1e-12);
        // Replaying the recorded profile reproduces the trajectory.
        let replay = guessing_continuous_greedy(
            &dec,
            &w,
            &ElemSet::singleton(0),
            &ElemSet::empty(),
            1,
            GuessSource::Profile(&state.profile),
            &cfg,
            &RngStream::new(99),
        )
        .unwrap()
        .completed()
        .unwrap();
        assert_eq!(replay.e_history, state.e_history);
        assert_eq!(replay.profile, state.profile);
    }

    #[test]
    fn hopeless_profile_is_rejected() {
        let dec = demo_decomposition();
        let w = WeightFn::new(vec![0.5, 0.5]).unwrap();
        let eps = 0.5;
        let profile = GuessProfile {
            v_g: 1.0,
            v_l: 1.0,
            m: 1,
            // Demands a marginal far above anything achievable.
            gamma_ti: vec![vec![100.0, 100.0]],
            lambda_i: vec![0.0],
            gamma_s: vec![0.0, 0.0],
            lambda_s: 0.0,
        };
        let cfg = GreedyConfig {
            epsilon: eps,
            delta: eps,
            mode: EstimationMode::Exact,
            d: 1.0,
            base_grid: build_grid(eps, 2, 1.0).unwrap(),
            per_copy_grid: Some(per_copy_grid(eps, 1, 1.0).unwrap()),
        };
        let out = guessing_continuous_greedy(
            &dec,
            &w,
            &ElemSet::from_indices(&[0, 1]),
            &ElemSet::empty(),
            1,
            GuessSource::Profile(&profile),
            &cfg,
            &RngStream::new(5),
        )
        .unwrap();
        assert!(matches!(
            out,
            GreedyOutcome::Rejected(RejectReason::NoLargeCandidate { time: 0, copy: 0 })
        ));
    }

    #[test]
    fn epsilon_normalization() {
        assert_eq!(normalize_epsilon(0.25f64).unwrap(), 0.25);
        let e = normalize_epsilon(0.3f64).unwrap();
        assert!((1.0 / e - 4.0).abs() < 1e-9);
        assert!(normalize_epsilon(0.0f64).is_err());
    }

    #[test]
    fn pure_small_run_accumulates_directions() {
        // m = 0 with everything small and a linear objective: z is exactly
        // the epsilon-weighted sum of the LP directions, and every direction
        // clears the linear floor.
        let f: ValueOracle<f64> = ValueOracle::linear(vec![0.6, 0.8, 0.4]).unwrap();
        let dec = decompose(&f, 0.5).unwrap();
        let w = WeightFn::new(vec![0.2, 0.3, 0.1]).unwrap();
        let eps = 0.25;
        let lambda_s = 0.9; // below ell(E) = 0.75 * 1.8 = 1.35, so feasible
        let profile = GuessProfile {
            v_g: 1.0,
            v_l: 2.0,
            m: 0,
            gamma_ti: vec![],
            lambda_i: vec![],
            gamma_s: vec![0.0; 4],
            lambda_s,
        };
        let cfg = GreedyConfig {
            epsilon: eps,
            delta: eps,
            mode: EstimationMode::Exact,
            d: 0.6,
            base_grid: build_grid(eps, 3, 0.6).unwrap(),
            per_copy_grid: None,
        };
        let all: ElemSet = (0..3).collect();
        let state = guessing_continuous_greedy(
            &dec,
            &w,
            &ElemSet::empty(),
            &all,
            0,
            GuessSource::Profile(&profile),
            &cfg,
            &RngStream::new(1),
        )
        .unwrap()
        .completed()
        .unwrap();
        let mut rebuilt = FractionalPoint::zero(state.copied.len());
        for v in &state.v_history {
            rebuilt.add_scaled(v, eps);
            let l_v = state.copied.expanded_linear(v, &dec.ell_coeffs);
            assert!(l_v >= lambda_s - 1e-9);
        }
        for idx in 0..state.copied.len() {
            assert!((rebuilt.get(idx) - state.z.get(idx)).abs() < 1e-9);
        }
        assert!(state.total_linear(&dec.ell_coeffs) >= lambda_s - 1e-9);
    }

    #[test]
    fn mass_accounting_per_copy() {
        // After a full run every copy holds exactly one unit of mass.
        let f: ValueOracle<f64> = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap();
        let dec = decompose(&f, 0.5).unwrap();
        let w = WeightFn::new(vec![0.5, 0.4]).unwrap();
        let eps = 0.25;
        let d = 1.0;
        let cfg = GreedyConfig {
            epsilon: eps,
            delta: eps,
            mode: EstimationMode::Exact,
            d,
            base_grid: build_grid(eps, 2, d).unwrap(),
            per_copy_grid: Some(per_copy_grid(eps, 2, d).unwrap()),
        };
        let o_large = vec![0usize, 1];
        let o_small = ElemSet::empty();
        let state = guessing_continuous_greedy(
            &dec,
            &w,
            &ElemSet::from_indices(&[0, 1]),
            &ElemSet::empty(),
            2,
            GuessSource::KnownOptimum {
                o_large: &o_large,
                o_small: &o_small,
            },
            &cfg,
            &RngStream::new(1),
        )
        .unwrap()
        .completed()
        .unwrap();
        for yi in &state.y {
            assert!((yi.sum() - 1.0).abs() < 1e-9);
        }
        // Support discipline: y_i stays on its own segment.
        for (i, yi) in state.y.iter().enumerate() {
            for idx in 0..state.copied.len() {
                if yi.get(idx) > 0.0 {
                    assert!(idx >= i * 2 && idx < (i + 1) * 2);
                }
            }
        }
    }
}
