//! Multilinear extension machinery: exact evaluation over small ground sets,
//! Monte Carlo estimation with a relative-plus-additive error contract, and
//! the marginal-gain inequality used to justify discrete ascent steps.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::real::Real;
use crate::rng::{uniform, RngStream};
use crate::set::ElemSet;

/// Upper bound on `n` for exact multilinear evaluation (2^n-term sums).
pub const EXACT_CAP: usize = 16;

/// A point in `[0, 1]^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint<R: Real> {
    coords: Vec<R>,
}

impl<R: Real> FractionalPoint<R> {
    pub fn new(coords: Vec<R>) -> Result<Self> {
        for (e, &c) in coords.iter().enumerate() {
            if !(c >= R::zero() && c <= R::one()) {
                return Err(Error::InvalidCoordinate {
                    element: e,
                    value: c.to64(),
                });
            }
        }
        Ok(Self { coords })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![R::zero(); n],
        }
    }

    /// Characteristic vector of a set.
    pub fn indicator(s: &ElemSet, n: usize) -> Self {
        let mut p = Self::zero(n);
        for e in s.iter() {
            p.coords[e] = R::one();
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, e: usize) -> R {
        self.coords[e]
    }

    pub fn set(&mut self, e: usize, v: R) {
        self.coords[e] = v;
    }

    pub fn coords(&self) -> &[R] {
        &self.coords
    }

    /// Coordinate-wise maximum with the unit vector of `e`.
    pub fn or_elem(&self, e: usize) -> Self {
        let mut p = self.clone();
        p.coords[e] = R::one();
        p
    }

    /// `self + step * other`, clamped into `[0, 1]` against float drift.
    pub fn add_scaled(&mut self, other: &Self, step: R) {
        for (a, &b) in self.coords.iter_mut().zip(other.coords.iter()) {
            *a = (*a + step * b).min(R::one()).max(R::zero());
        }
    }

    /// Inner product with per-element coefficients.
    pub fn dot(&self, coeffs: &[R]) -> R {
        self.coords
            .iter()
            .zip(coeffs.iter())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn sum(&self) -> R {
        self.coords.iter().copied().sum()
    }
}

/// Samples a random set: each element joins independently with probability
/// `x(e)`.
pub fn sample_set<R: Real>(x: &FractionalPoint<R>, rng: &mut ChaCha8Rng) -> ElemSet {
    let mut s = ElemSet::empty();
    for (e, &p) in x.coords().iter().enumerate() {
        if uniform::<R>(rng) < p {
            s.insert(e);
        }
    }
    s
}

/// Probability of every subset (by bitmask) under independent inclusion.
pub(crate) fn subset_probabilities<R: Real>(x: &FractionalPoint<R>) -> Vec<R> {
    let n = x.dim();
    debug_assert!(n <= EXACT_CAP);
    let mut probs = vec![R::zero(); 1usize << n];
    probs[0] = R::one();
    for e in 0..n {
        let p = x.get(e);
        let q = R::one() - p;
        let bit = 1usize << e;
        for mask in 0..bit {
            let base = probs[mask];
            probs[mask | bit] = base * p;
            probs[mask] = base * q;
        }
    }
    probs
}

/// Exact multilinear extension `F(x) = E[f(R(x))]` by full enumeration.
pub fn exact_multilinear<R: Real>(f: &ValueOracle<R>, x: &FractionalPoint<R>) -> Result<R> {
    let n = f.n();
    if n > EXACT_CAP {
        return Err(Error::GroundTooLarge {
            what: "exact multilinear evaluation",
            n,
            cap: EXACT_CAP,
        });
    }
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.dim(),
        });
    }
    let probs = subset_probabilities(x);
    let mut total = R::zero();
    for (mask, &p) in probs.iter().enumerate() {
        if p > R::zero() {
            total += p * f.eval(&ElemSet::from_mask(mask as u64, n))?;
        }
    }
    Ok(total)
}

/// Exact `E[f_{R(x)}(e)]` for every element in one sweep over subsets.
///
/// Subsets already containing `e` contribute zero to `e`'s expectation.
pub fn exact_marginals_all<R: Real>(f: &ValueOracle<R>, x: &FractionalPoint<R>) -> Result<Vec<R>> {
    let n = f.n();
    if n > EXACT_CAP {
        return Err(Error::GroundTooLarge {
            what: "exact marginal expectations",
            n,
            cap: EXACT_CAP,
        });
    }
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.dim(),
        });
    }
    let probs = subset_probabilities(x);
    let mut values = vec![R::zero(); 1usize << n];
    for (mask, v) in values.iter_mut().enumerate() {
        *v = f.eval(&ElemSet::from_mask(mask as u64, n))?;
    }
    let mut out = vec![R::zero(); n];
    for mask in 0..(1usize << n) {
        let p = probs[mask];
        if p <= R::zero() {
            continue;
        }
        for (e, acc) in out.iter_mut().enumerate() {
            let bit = 1usize << e;
            if mask & bit == 0 {
                *acc += p * (values[mask | bit] - values[mask]);
            }
        }
    }
    Ok(out)
}

/// Exact `E[f_{R(x)}(e)]` for one element.
pub fn exact_marginal_expectation<R: Real>(
    f: &ValueOracle<R>,
    x: &FractionalPoint<R>,
    e: usize,
) -> Result<R> {
    let n = f.n();
    if e >= n {
        return Err(Error::ElementOutOfRange { element: e, n });
    }
    if n > EXACT_CAP {
        return Err(Error::GroundTooLarge {
            what: "exact marginal expectation",
            n,
            cap: EXACT_CAP,
        });
    }
    let probs = subset_probabilities(x);
    let bit = 1usize << e;
    let mut total = R::zero();
    for (mask, &p) in probs.iter().enumerate() {
        if mask & bit == 0 && p > R::zero() {
            let s = ElemSet::from_mask(mask as u64, n);
            total += p * (f.eval(&s.with(e))? - f.eval(&s)?);
        }
    }
    Ok(total)
}

/// The slope of `F` at `x` in direction `e`:
/// `(F(x or 1_e) - F(x)) / (1 - x_e)`, exact. Undefined at `x_e = 1`.
pub fn partial_derivative<R: Real>(
    f: &ValueOracle<R>,
    x: &FractionalPoint<R>,
    e: usize,
) -> Result<R> {
    if e >= x.dim() {
        return Err(Error::ElementOutOfRange {
            element: e,
            n: x.dim(),
        });
    }
    if x.get(e) >= R::one() {
        return Err(Error::SaturatedCoordinate { element: e });
    }
    let up = exact_multilinear(f, &x.or_elem(e))?;
    let at = exact_multilinear(f, x)?;
    Ok((up - at) / (R::one() - x.get(e)))
}

/// Number of samples the mean estimator takes: `ceil(3 ln(2/delta) / (alpha beta))`.
///
/// Computed in f64 regardless of the scalar type so the count is the same
/// everywhere.
pub fn estimate_sample_count<R: Real>(alpha: R, beta: R, delta: R) -> Result<usize> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("delta", delta)] {
        if !(v > R::zero() && v < R::one()) {
            return Err(Error::InvalidEstimatorParam {
                name,
                value: v.to64(),
            });
        }
    }
    let count = (3.0 * (2.0 / delta.to64()).ln() / (alpha.to64() * beta.to64())).ceil();
    Ok(count as usize)
}

/// Mean estimator over a bounded sampler: averages enough independent draws
/// that `|result - mean| <= alpha * mean + beta * d` holds with probability
/// at least `1 - delta`, for draws bounded in `[0, d]`.
pub fn estimate_mean<R: Real>(
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> R,
    d: R,
    alpha: R,
    beta: R,
    delta: R,
    stream: &RngStream,
) -> Result<R> {
    if d < R::zero() {
        return Err(Error::Invalid(format!("sampler bound d = {d} negative")));
    }
    let count = estimate_sample_count(alpha, beta, delta)?;
    let mut rng = stream.rng();
    let mut total = R::zero();
    for _ in 0..count {
        let draw = sampler(&mut rng);
        if !draw.is_finite() {
            return Err(Error::NonFiniteDraw);
        }
        total += draw;
    }
    Ok(total / R::of(count as f64))
}

/// Estimates `E[f_{R(x)}(e)]` by sampling sets from `x` and averaging the
/// marginal of `e`; `d` is the caller-supplied bound on the draws.
#[allow(clippy::too_many_arguments)]
pub fn estimate_marginal_over_random_set<R: Real>(
    f: &ValueOracle<R>,
    x: &FractionalPoint<R>,
    e: usize,
    alpha: R,
    beta: R,
    delta: R,
    d: R,
    stream: &RngStream,
) -> Result<R> {
    if e >= f.n() {
        return Err(Error::ElementOutOfRange {
            element: e,
            n: f.n(),
        });
    }
    estimate_mean(
        |rng| {
            let s = sample_set(x, rng);
            f.marginal_unchecked(&s, e)
        },
        d,
        alpha,
        beta,
        delta,
        stream,
    )
}

/// Checks the discrete ascent inequality
/// `F(x + eps y) - F(x) >= eps * sum_e y(e) E[f_{R(x + eps y)}(e)]`
/// with everything evaluated exactly. Verification helper only.
pub fn check_discretization_lemma<R: Real>(
    f: &ValueOracle<R>,
    x: &FractionalPoint<R>,
    y: &FractionalPoint<R>,
    epsilon: R,
) -> Result<bool> {
    let n = f.n();
    if n > crate::oracle::CHECK_CAP {
        return Err(Error::GroundTooLarge {
            what: "discretization check",
            n,
            cap: crate::oracle::CHECK_CAP,
        });
    }
    let mut moved = x.clone();
    for e in 0..n {
        let v = x.get(e) + epsilon * y.get(e);
        if v > R::one() + R::tol() {
            return Err(Error::InvalidCoordinate {
                element: e,
                value: v.to64(),
            });
        }
        moved.set(e, v.min(R::one()));
    }
    let lhs = exact_multilinear(f, &moved)? - exact_multilinear(f, x)?;
    let marginals = exact_marginals_all(f, &moved)?;
    let rhs: R = epsilon * (0..n).map(|e| y.get(e) * marginals[e]).sum::<R>();
    Ok(lhs >= rhs - R::tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn demo_table() -> ValueOracle<f64> {
        ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap()
    }

    #[test]
    fn sample_set_degenerate_points() {
        let stream = RngStream::new(3);
        let s = ElemSet::from_indices(&[0, 2]);
        let x = FractionalPoint::<f64>::indicator(&s, 3);
        let zero = FractionalPoint::<f64>::zero(3);
        let mut rng = stream.rng();
        for _ in 0..20 {
            assert_eq!(sample_set(&x, &mut rng), s);
            assert_eq!(sample_set(&zero, &mut rng), ElemSet::empty());
        }
    }

    #[test]
    fn sample_set_frequencies() {
        let x = FractionalPoint::new(vec![0.5f64; 4]).unwrap();
        let mut rng = RngStream::new(11).rng();
        let trials = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            for e in sample_set(&x, &mut rng).iter() {
                counts[e] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.5).abs() < 0.02, "freq = {freq}");
        }
    }

    #[test]
    fn exact_multilinear_cases() {
        let f = demo_table();
        let x = FractionalPoint::new(vec![0.5, 0.5]).unwrap();
        assert!((exact_multilinear(&f, &x).unwrap() - 0.875).abs() < 1e-12);

        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        let y = FractionalPoint::new(vec![0.2, 0.9]).unwrap();
        let expect = 0.2 * 0.3 + 0.9 * 0.4;
        assert!((exact_multilinear(&l, &y).unwrap() - expect).abs() < 1e-12);

        let s = ElemSet::singleton(1);
        let ind = FractionalPoint::indicator(&s, 2);
        assert_eq!(exact_multilinear(&f, &ind).unwrap(), f.eval(&s).unwrap());
    }

    #[test]
    fn multilinearity_three_point_collinearity() {
        let f = demo_table();
        let at = |t: f64| {
            let x = FractionalPoint::new(vec![t, 0.3]).unwrap();
            exact_multilinear(&f, &x).unwrap()
        };
        let (f0, fh, f1) = (at(0.0), at(0.5), at(1.0));
        assert!((fh - 0.5 * (f0 + f1)).abs() < 1e-12);
    }

    #[test]
    fn partial_derivative_cases() {
        let f = demo_table();
        let origin = FractionalPoint::zero(2);
        assert!((partial_derivative(&f, &origin, 0).unwrap() - 1.0).abs() < 1e-12);
        let x = FractionalPoint::new(vec![0.0, 1.0]).unwrap();
        assert!((partial_derivative(&f, &x, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            partial_derivative(&f, &x, 1),
            Err(Error::SaturatedCoordinate { element: 1 })
        ));

        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        let y = FractionalPoint::new(vec![0.6, 0.1]).unwrap();
        assert!((partial_derivative(&l, &y, 1).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn slope_identity_matches_marginal_expectation() {
        // (F(x or 1_e) - F(x)) equals E[f_{R(x)}(e)] exactly.
        let f: ValueOracle<f64> = ValueOracle::coverage(
            vec![0.5, 1.0, 0.25],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        let x = FractionalPoint::new(vec![0.3, 0.7, 0.2]).unwrap();
        for e in 0..3 {
            let diff =
                exact_multilinear(&f, &x.or_elem(e)).unwrap() - exact_multilinear(&f, &x).unwrap();
            let expect = exact_marginal_expectation(&f, &x, e).unwrap();
            assert!((diff - expect).abs() < 1e-12);
            let all = exact_marginals_all(&f, &x).unwrap();
            assert!((all[e] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_count_formula() {
        assert_eq!(estimate_sample_count(0.1f64, 0.1, 0.01).unwrap(), 1590);
        assert!(estimate_sample_count(0.0f64, 0.1, 0.01).is_err());
    }

    #[test]
    fn estimate_mean_constant_sampler() {
        let stream = RngStream::new(5);
        let est = estimate_mean(|_| 0.73f64, 1.0, 0.2, 0.2, 0.1, &stream).unwrap();
        assert!((est - 0.73).abs() < 1e-12);
    }

    #[test]
    fn estimate_mean_rejects_non_finite() {
        let stream = RngStream::new(5);
        let res = estimate_mean(|_| f64::NAN, 1.0, 0.2, 0.2, 0.1, &stream);
        assert!(matches!(res, Err(Error::NonFiniteDraw)));
    }

    #[test]
    fn estimate_mean_bernoulli_within_bound() {
        // Single run with a fixed stream; the meta-experiment lives in the
        // acceptance suite.
        let d = 2.0f64;
        let (alpha, beta, delta) = (0.1, 0.1, 0.01);
        let stream = RngStream::new(17);
        let est = estimate_mean(
            |rng| if rng.random::<f64>() < 0.5 { d } else { 0.0 },
            d,
            alpha,
            beta,
            delta,
            &stream,
        )
        .unwrap();
        let mu = 0.5 * d;
        assert!((est - mu).abs() <= alpha * mu + beta * d);
    }

    #[test]
    fn estimate_marginal_degenerate_points() {
        let f = demo_table();
        let stream = RngStream::new(9);
        // x = 0: every sample sees the empty set.
        let zero = FractionalPoint::zero(2);
        let est =
            estimate_marginal_over_random_set(&f, &zero, 0, 0.3, 0.3, 0.1, 1.0, &stream).unwrap();
        assert!((est - 1.0).abs() < 1e-12);
        // x = 1_{E - e}: every sample sees the complement.
        let comp = FractionalPoint::indicator(&ElemSet::singleton(1), 2);
        let est =
            estimate_marginal_over_random_set(&f, &comp, 0, 0.3, 0.3, 0.1, 1.0, &stream).unwrap();
        assert!((est - 0.5).abs() < 1e-12);
    }

    #[test]
    fn estimate_marginal_two_point_distribution() {
        let f = demo_table();
        let x = FractionalPoint::new(vec![0.0, 0.5]).unwrap();
        let truth = 0.5 * 1.0 + 0.5 * 0.5;
        let (alpha, beta, delta) = (0.1, 0.1, 0.01);
        let est = estimate_marginal_over_random_set(
            &f,
            &x,
            0,
            alpha,
            beta,
            delta,
            1.0,
            &RngStream::new(23),
        )
        .unwrap();
        assert!((est - truth).abs() <= alpha * truth + beta * 1.0);
        let exact = exact_marginal_expectation(&f, &x, 0).unwrap();
        assert!((exact - truth).abs() < 1e-12);
    }

    #[test]
    fn discretization_lemma_cases() {
        // Linear functions meet the inequality with equality.
        let l: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        let x = FractionalPoint::zero(2);
        let y = FractionalPoint::new(vec![1.0, 1.0]).unwrap();
        assert!(check_discretization_lemma(&l, &x, &y, 0.5).unwrap());

        let f = demo_table();
        assert!(check_discretization_lemma(&f, &x, &y, 0.5).unwrap());

        // Out-of-box movement is rejected.
        let far = FractionalPoint::new(vec![0.9, 0.9]).unwrap();
        assert!(check_discretization_lemma(&f, &far, &y, 0.5).is_err());
    }

    #[test]
    fn exact_agrees_with_sampling() {
        let f = demo_table();
        let x = FractionalPoint::new(vec![0.4, 0.7]).unwrap();
        let exact = exact_multilinear(&f, &x).unwrap();
        let mut rng = RngStream::new(31).rng();
        let trials = 100_000;
        let mut total = 0.0;
        let mut sq = 0.0;
        for _ in 0..trials {
            let v = f.eval(&sample_set(&x, &mut rng)).unwrap();
            total += v;
            sq += v * v;
        }
        let mean = total / trials as f64;
        let var = (sq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se + 1e-9,
            "mean {mean} vs exact {exact}"
        );
    }

    #[test]
    fn generic_over_f32() {
        let f: ValueOracle<f32> = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap();
        let x = FractionalPoint::new(vec![0.5f32, 0.5]).unwrap();
        assert!((exact_multilinear(&f, &x).unwrap() - 0.875).abs() < 1e-5);
    }
}
