//! Ground sets, set-function oracles, exact curvature, and sanity checks.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::set::ElemSet;

/// Upper bound on `n` for explicit-table backings (2^n stored values).
pub const TABLE_CAP: usize = 16;
/// Upper bound on `n` for exhaustive monotonicity/submodularity checks.
pub const CHECK_CAP: usize = 12;

/// A dense ground set `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.n
    }

    pub fn full_set(&self) -> ElemSet {
        (0..self.n).collect()
    }
}

/// Backing implementation of a set function.
pub trait SetFunction<R: Real>: Send + Sync {
    /// Ground-set size.
    fn n(&self) -> usize;

    /// Raw evaluation; `s` is assumed to be within range.
    fn value(&self, s: &ElemSet) -> R;
}

/// A queryable nonnegative monotone submodular set function.
///
/// Wraps a backing with a shared call counter. Cloning shares both the
/// backing and the counter, so query counts aggregate across clones. All
/// evaluations are pure; the counter is the only mutable state and may be
/// bumped concurrently.
#[derive(Clone)]
pub struct ValueOracle<R: Real> {
    backing: Arc<dyn SetFunction<R>>,
    calls: Arc<AtomicU64>,
}

impl<R: Real> ValueOracle<R> {
    pub fn new(backing: Arc<dyn SetFunction<R>>) -> Self {
        Self {
            backing,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Explicit table of all `2^n` values, in subset-bitmask order with the
    /// least significant bit standing for element 0.
    pub fn table(n: usize, values: Vec<R>) -> Result<Self> {
        Ok(Self::new(Arc::new(TableFn::new(n, values)?)))
    }

    /// Linear (modular) function with the given singleton coefficients.
    pub fn linear(coeffs: Vec<R>) -> Result<Self> {
        Ok(Self::new(Arc::new(LinearFn::new(coeffs)?)))
    }

    /// Weighted coverage: element `e` covers `covers[e]`; the value of a set
    /// is the total weight of universe items covered by at least one member.
    pub fn coverage(universe_weights: Vec<R>, covers: Vec<Vec<usize>>) -> Result<Self> {
        Ok(Self::new(Arc::new(CoverageFn::new(
            universe_weights,
            covers,
        )?)))
    }

    pub fn n(&self) -> usize {
        self.backing.n()
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet { n: self.n() }
    }

    /// Number of oracle queries made so far through this handle (and clones).
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Evaluates `f(S)` and bumps the call counter.
    pub fn eval(&self, s: &ElemSet) -> Result<R> {
        if let Some(e) = s.max_elem() {
            if e >= self.n() {
                return Err(Error::ElementOutOfRange {
                    element: e,
                    n: self.n(),
                });
            }
        }
        Ok(self.eval_unchecked(s))
    }

    /// Evaluation for internally constructed sets, skipping the range check.
    #[inline]
    pub(crate) fn eval_unchecked(&self, s: &ElemSet) -> R {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.backing.value(s)
    }

    /// Marginal gain `f_S(e) = f(S + e) - f(S)`; zero when `e` is already in `S`.
    pub fn marginal(&self, s: &ElemSet, e: usize) -> Result<R> {
        if e >= self.n() {
            return Err(Error::ElementOutOfRange {
                element: e,
                n: self.n(),
            });
        }
        if s.contains(e) {
            return Ok(R::zero());
        }
        Ok(self.eval(&s.with(e))? - self.eval(s)?)
    }

    #[inline]
    pub(crate) fn marginal_unchecked(&self, s: &ElemSet, e: usize) -> R {
        if s.contains(e) {
            return R::zero();
        }
        self.eval_unchecked(&s.with(e)) - self.eval_unchecked(s)
    }

    /// Singleton value `f({e})`.
    pub fn singleton(&self, e: usize) -> Result<R> {
        self.eval(&ElemSet::singleton(e))
    }
}

/// Total curvature `c_f = 1 - min_e f_{E-e}(e) / f(e)`, computed exactly with
/// `2n + 1` oracle queries.
///
/// Elements with `f(e) = 0` are skipped: a monotone submodular function then
/// forces `f_{E-e}(e) = 0`, and treating the 0/0 ratio as 1 contributes
/// nothing to the curvature. A zero singleton with a positive complement
/// marginal is reported as a submodularity violation.
pub fn total_curvature<R: Real>(oracle: &ValueOracle<R>) -> Result<R> {
    let n = oracle.n();
    let full = ElemSet::from_iter(0..n);
    let f_full = oracle.eval(&full)?;
    let mut min_ratio = R::one();
    for e in 0..n {
        let top = f_full - oracle.eval(&full.without(e))?;
        let single = oracle.eval(&ElemSet::singleton(e))?;
        if single <= R::zero() {
            if top > R::tol() {
                return Err(Error::ZeroSingletonPositiveMarginal {
                    element: e,
                    value: top.to64(),
                });
            }
            continue;
        }
        min_ratio = min_ratio.min(top / single);
    }
    Ok((R::one() - min_ratio).max(R::zero()).min(R::one()))
}

/// Singleton maxima `(d_g, d_l, max(d_g, d_l))` over two oracles.
pub fn singleton_maxima<R: Real>(g: &ValueOracle<R>, ell: &ValueOracle<R>) -> Result<(R, R, R)> {
    let mut d_g = R::zero();
    let mut d_l = R::zero();
    for e in 0..g.n() {
        d_g = d_g.max(g.singleton(e)?);
    }
    for e in 0..ell.n() {
        d_l = d_l.max(ell.singleton(e)?);
    }
    Ok((d_g, d_l, d_g.max(d_l)))
}

/// Outcome of an exhaustive structural check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub passed: bool,
    pub checks_run: u64,
    /// First violation, if any: a human-readable witness.
    pub witness: Option<String>,
}

impl CheckReport {
    fn pass(checks_run: u64) -> Self {
        Self {
            passed: true,
            checks_run,
            witness: None,
        }
    }

    fn fail(checks_run: u64, witness: String) -> Self {
        Self {
            passed: false,
            checks_run,
            witness: Some(witness),
        }
    }
}

/// Exhaustively verifies nonnegativity at the empty set, monotonicity, and
/// the diminishing-return property. Refuses ground sets above [`CHECK_CAP`].
pub fn check_monotone_submodular<R: Real>(oracle: &ValueOracle<R>) -> Result<CheckReport> {
    let n = oracle.n();
    if n > CHECK_CAP {
        return Err(Error::GroundTooLarge {
            what: "exhaustive structure check",
            n,
            cap: CHECK_CAP,
        });
    }
    let tol = R::tol();
    let mut values = Vec::with_capacity(1usize << n);
    for mask in 0u64..(1u64 << n) {
        values.push(oracle.eval(&ElemSet::from_mask(mask, n))?);
    }
    let mut checks = 1u64;
    if values[0] < R::zero() {
        return Ok(CheckReport::fail(
            checks,
            format!("f(empty) = {} < 0", values[0]),
        ));
    }
    // Monotonicity: f(S + e) >= f(S) for all S, e not in S.
    for mask in 0u64..(1u64 << n) {
        for e in 0..n {
            if mask & (1 << e) != 0 {
                continue;
            }
            checks += 1;
            let gain = values[(mask | (1 << e)) as usize] - values[mask as usize];
            if gain < -tol {
                return Ok(CheckReport::fail(
                    checks,
                    format!("monotonicity fails: f_S({e}) = {gain} for S = {mask:#b}"),
                ));
            }
        }
    }
    // Diminishing returns on adjacent pairs: f_S(e) >= f_{S+g}(e). Chains of
    // supersets follow by transitivity.
    for mask in 0u64..(1u64 << n) {
        for g in 0..n {
            if mask & (1 << g) != 0 {
                continue;
            }
            let sup = mask | (1 << g);
            for e in 0..n {
                if sup & (1 << e) != 0 {
                    continue;
                }
                checks += 1;
                let at_s = values[(mask | (1 << e)) as usize] - values[mask as usize];
                let at_t = values[(sup | (1 << e)) as usize] - values[sup as usize];
                if at_s < at_t - tol {
                    return Ok(CheckReport::fail(
                        checks,
                        format!(
                            "diminishing returns fail: f_S({e}) = {at_s} < f_T({e}) = {at_t} \
                             for S = {mask:#b}, T = {sup:#b}"
                        ),
                    ));
                }
            }
        }
    }
    Ok(CheckReport::pass(checks))
}

/// Per-element weights in `[0, 1]`, extended additively to sets.
#[derive(Clone, Debug)]
pub struct WeightFn<R: Real> {
    weights: Vec<R>,
}

impl<R: Real> WeightFn<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        for (e, &w) in weights.iter().enumerate() {
            if !(w >= R::zero() && w <= R::one()) {
                return Err(Error::InvalidWeight {
                    element: e,
                    value: w.to64(),
                });
            }
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn of(&self, e: usize) -> R {
        self.weights[e]
    }

    pub fn set_weight(&self, s: &ElemSet) -> R {
        s.iter().map(|e| self.weights[e]).sum()
    }

    pub fn as_slice(&self) -> &[R] {
        &self.weights
    }
}

/// A full problem instance: maximize `f(S)` subject to `w(S) <= 1`.
#[derive(Clone)]
pub struct Instance<R: Real> {
    pub ground: GroundSet,
    pub f: ValueOracle<R>,
    pub w: WeightFn<R>,
    pub epsilon: R,
}

impl<R: Real> Instance<R> {
    pub fn new(f: ValueOracle<R>, w: WeightFn<R>, epsilon: R) -> Result<Self> {
        let ground = f.ground();
        if w.n() != ground.len() {
            return Err(Error::DimensionMismatch {
                expected: ground.len(),
                got: w.n(),
            });
        }
        if !(epsilon > R::zero() && epsilon < R::one()) {
            return Err(Error::InvalidEpsilon {
                value: epsilon.to64(),
            });
        }
        Ok(Self {
            ground,
            f,
            w,
            epsilon,
        })
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }
}

// ---------------------------------------------------------------------------
// Backings

struct TableFn<R> {
    n: usize,
    values: Vec<R>,
}

impl<R: Real> TableFn<R> {
    fn new(n: usize, values: Vec<R>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        if n > TABLE_CAP {
            return Err(Error::GroundTooLarge {
                what: "explicit table",
                n,
                cap: TABLE_CAP,
            });
        }
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n,
                got: values.len(),
            });
        }
        Ok(Self { n, values })
    }
}

impl<R: Real> SetFunction<R> for TableFn<R> {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, s: &ElemSet) -> R {
        let mask = s.mask64().expect("table sets fit in one block");
        self.values[mask as usize]
    }
}

pub(crate) struct LinearFn<R> {
    coeffs: Vec<R>,
}

impl<R: Real> LinearFn<R> {
    pub(crate) fn new(coeffs: Vec<R>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { coeffs })
    }
}

impl<R: Real> SetFunction<R> for LinearFn<R> {
    fn n(&self) -> usize {
        self.coeffs.len()
    }

    fn value(&self, s: &ElemSet) -> R {
        s.iter().map(|e| self.coeffs[e]).sum()
    }
}

struct CoverageFn<R> {
    item_weights: Vec<R>,
    /// Per-element bitset over universe items.
    cover_sets: Vec<ElemSet>,
}

impl<R: Real> CoverageFn<R> {
    fn new(item_weights: Vec<R>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if covers.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        let u = item_weights.len();
        let mut cover_sets = Vec::with_capacity(covers.len());
        for items in &covers {
            for &i in items {
                if i >= u {
                    return Err(Error::ElementOutOfRange { element: i, n: u });
                }
            }
            cover_sets.push(ElemSet::from_indices(items));
        }
        Ok(Self {
            item_weights,
            cover_sets,
        })
    }
}

impl<R: Real> SetFunction<R> for CoverageFn<R> {
    fn n(&self) -> usize {
        self.cover_sets.len()
    }

    fn value(&self, s: &ElemSet) -> R {
        let mut covered = ElemSet::empty();
        for e in s.iter() {
            covered.union_with(&self.cover_sets[e]);
        }
        covered.iter().map(|i| self.item_weights[i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f(empty)=0, f(a)=1, f(b)=1, f(ab)=1.5 on E = {a, b}.
    pub(crate) fn demo_table() -> ValueOracle<f64> {
        ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap()
    }

    #[test]
    fn eval_reads_back_table() {
        let f = demo_table();
        assert_eq!(f.eval(&ElemSet::from_indices(&[0, 1])).unwrap(), 1.5);
        assert_eq!(f.eval(&ElemSet::empty()).unwrap(), 0.0);
    }

    #[test]
    fn eval_linear_additivity() {
        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        assert!((l.eval(&ElemSet::from_indices(&[0, 1])).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let f = demo_table();
        assert!(matches!(
            f.eval(&ElemSet::singleton(5)),
            Err(Error::ElementOutOfRange { element: 5, n: 2 })
        ));
    }

    #[test]
    fn marginal_cases() {
        let f = demo_table();
        // f_{b}(a) = 1.5 - 1.0
        assert_eq!(f.marginal(&ElemSet::singleton(1), 0).unwrap(), 0.5);
        // e already in S
        assert_eq!(f.marginal(&ElemSet::singleton(1), 1).unwrap(), 0.0);
        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        assert!((l.marginal(&ElemSet::singleton(0), 1).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn curvature_of_linear_is_zero() {
        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4, 0.1]).unwrap();
        assert!(total_curvature(&l).unwrap().abs() < 1e-12);
    }

    #[test]
    fn curvature_of_demo_table() {
        let f = demo_table();
        assert!((total_curvature(&f).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curvature_uses_2n_plus_1_queries() {
        let f = demo_table();
        let before = f.calls();
        total_curvature(&f).unwrap();
        assert_eq!(f.calls() - before, 2 * 2 + 1);
    }

    #[test]
    fn curvature_skips_zero_singletons() {
        // f(a) = 0 forces f_{E-a}(a) = 0 under monotone submodularity.
        let f = ValueOracle::table(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(total_curvature(&f).unwrap(), 0.0);
    }

    #[test]
    fn curvature_rejects_zero_singleton_with_positive_marginal() {
        let f = ValueOracle::table(2, vec![0.0, 0.0, 1.0, 1.5]).unwrap();
        assert!(matches!(
            total_curvature(&f),
            Err(Error::ZeroSingletonPositiveMarginal { element: 0, .. })
        ));
    }

    #[test]
    fn structure_check_passes_and_fails() {
        assert!(check_monotone_submodular(&demo_table()).unwrap().passed);
        let linear = ValueOracle::linear(vec![0.2, 0.9, 0.4]).unwrap();
        assert!(check_monotone_submodular(&linear).unwrap().passed);
        // Supermodular pair: f_b(a) = 1.5 > f_empty(a) = 1.
        let bad = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 2.5]).unwrap();
        let report = check_monotone_submodular(&bad).unwrap();
        assert!(!report.passed);
        assert!(report.witness.unwrap().contains("diminishing"));
    }

    #[test]
    fn structure_check_refuses_large_ground() {
        let l = ValueOracle::linear(vec![0.1; 13]).unwrap();
        assert!(matches!(
            check_monotone_submodular(&l),
            Err(Error::GroundTooLarge { .. })
        ));
    }

    #[test]
    fn singleton_maxima_cases() {
        let g = demo_table();
        let l = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        assert_eq!(singleton_maxima(&g, &l).unwrap(), (1.0, 0.4, 1.0));
        let zero = ValueOracle::linear(vec![0.0, 0.0]).unwrap();
        assert_eq!(singleton_maxima(&g, &zero).unwrap().1, 0.0);
        let (dg, dl, dgl) = singleton_maxima(&g, &g).unwrap();
        assert_eq!((dg, dl), (dgl, dgl));
    }

    #[test]
    fn table_cap_enforced() {
        let res = ValueOracle::<f64>::table(17, vec![0.0; 1 << 17]);
        assert!(matches!(res, Err(Error::GroundTooLarge { .. })));
    }

    #[test]
    fn weight_fn_validates_and_sums() {
        assert!(WeightFn::new(vec![0.5, 1.2]).is_err());
        let w: WeightFn<f64> = WeightFn::new(vec![0.5, 0.6]).unwrap();
        assert!((w.set_weight(&ElemSet::from_indices(&[0, 1])) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn coverage_matches_hand_count() {
        // Two elements covering overlapping items of weight 1.
        let f = ValueOracle::coverage(vec![1.0, 1.0, 1.0], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(f.eval(&ElemSet::singleton(0)).unwrap(), 2.0);
        assert_eq!(f.eval(&ElemSet::from_indices(&[0, 1])).unwrap(), 3.0);
        assert!(check_monotone_submodular(&f).unwrap().passed);
    }

    #[test]
    fn call_counter_shared_across_clones() {
        let f = demo_table();
        let g = f.clone();
        let before = f.calls();
        g.eval(&ElemSet::empty()).unwrap();
        assert_eq!(f.calls(), before + 1);
    }

    #[test]
    fn generic_over_f32() {
        let f: ValueOracle<f32> = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap();
        assert!((total_curvature(&f).unwrap() - 0.5).abs() < 1e-5);
    }
}
