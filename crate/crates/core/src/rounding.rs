//! Randomized rounding of the ascent output into a feasible set: one
//! categorical draw per copy for the large side, independent draws on a
//! weight-filtered small vector, and an unconditional feasibility gate.

use crate::error::{Error, Result};
use crate::greedy::{CopiedGroundSet, GreedyState};
use crate::multilinear::FractionalPoint;
use crate::oracle::WeightFn;
use crate::real::Real;
use crate::rng::{uniform, RngStream};
use crate::set::ElemSet;

/// Everything the rounding step consumes.
pub struct RoundingInput<'a, R: Real> {
    pub w: &'a WeightFn<R>,
    pub copied: &'a CopiedGroundSet,
    pub m: usize,
    pub y: &'a [FractionalPoint<R>],
    pub z: &'a FractionalPoint<R>,
    pub v_history: &'a [FractionalPoint<R>],
    pub epsilon: R,
}

impl<'a, R: Real> RoundingInput<'a, R> {
    pub fn from_state(state: &'a GreedyState<R>, w: &'a WeightFn<R>) -> Self {
        Self {
            w,
            copied: &state.copied,
            m: state.copied.copies(),
            y: &state.y,
            z: &state.z,
            v_history: &state.v_history,
            epsilon: state.epsilon,
        }
    }

    /// Largest per-iteration direction weight, the scale of the small-side
    /// drop threshold.
    fn max_direction_weight(&self) -> R {
        self.v_history
            .iter()
            .map(|v| self.copied.expanded_weight(v, self.w))
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// The filtered small vector: elements at or above the weight threshold
    /// are dropped, the rest shrink by `(1 - eps)`.
    fn filtered_small(&self) -> FractionalPoint<R> {
        let threshold = self.epsilon.powi(3) * self.max_direction_weight();
        let shrink = R::one() - self.epsilon;
        let mut zp = FractionalPoint::zero(self.copied.len());
        for &b in self.copied.small_elements() {
            let idx = self.copied.small_index(b).expect("small slot");
            if self.w.of(b) < threshold {
                zp.set(idx, shrink * self.z.get(idx));
            }
        }
        zp
    }

    /// Per-copy selection probabilities over base elements, validated to sum
    /// to one (renormalized within tolerance, rejected beyond).
    fn copy_distributions(&self) -> Result<Vec<Vec<R>>> {
        let n = self.copied.base_n();
        let mut out = Vec::with_capacity(self.m);
        for (i, yi) in self.y.iter().enumerate() {
            let probs: Vec<R> = (0..n)
                .map(|b| yi.get(self.copied.copy_index(i, b)))
                .collect();
            let total: R = probs.iter().copied().sum();
            if (total - R::one()).abs() > R::tol() {
                return Err(Error::Invalid(format!(
                    "copy {i} selection mass is {total}, expected 1"
                )));
            }
            out.push(probs.into_iter().map(|p| p / total).collect());
        }
        Ok(out)
    }

    /// One unfiltered draw of the candidate set (before the feasibility gate).
    fn draw(
        &self,
        distributions: &[Vec<R>],
        zp: &FractionalPoint<R>,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> ElemSet {
        let mut s = ElemSet::empty();
        for &b in self.copied.small_elements() {
            let idx = self.copied.small_index(b).expect("small slot");
            let p = zp.get(idx);
            if p > R::zero() && uniform::<R>(rng) < p {
                s.insert(b);
            }
        }
        for probs in distributions {
            let u: R = uniform(rng);
            let mut acc = R::zero();
            let mut chosen = self.copied.base_n() - 1;
            for (b, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = b;
                    break;
                }
            }
            s.insert(chosen);
        }
        s
    }
}

impl<R: Real> RoundingInput<'_, R> {
    /// One pre-gate draw: the raw union of per-copy picks and small-side
    /// samples, which may exceed the knapsack. Verification harnesses use
    /// this to study the weight distribution the gate truncates.
    pub fn sample_candidate(&self, rng: &RngStream) -> Result<ElemSet> {
        let distributions = self.copy_distributions()?;
        let zp = self.filtered_small();
        Ok(self.draw(&distributions, &zp, &mut rng.rng()))
    }
}

/// Rounds the fractional output to a set. Returns the union of the per-copy
/// picks and the small-side draws when it fits the knapsack, the empty set
/// otherwise; the output never violates the constraint.
pub fn round<R: Real>(input: &RoundingInput<'_, R>, rng: &RngStream) -> Result<ElemSet> {
    let distributions = input.copy_distributions()?;
    let zp = input.filtered_small();
    let mut r = rng.rng();
    let s = input.draw(&distributions, &zp, &mut r);
    if input.w.set_weight(&s) <= R::one() {
        Ok(s)
    } else {
        Ok(ElemSet::empty())
    }
}

/// Empirical tail of the pre-gate weight: for each `gamma`, the fraction of
/// trials with `w(draw) > gamma * w_opt`. Needs the true optimum weight,
/// which only verification harnesses have.
pub fn weight_tail_profile<R: Real>(
    input: &RoundingInput<'_, R>,
    w_opt: R,
    gammas: &[R],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<(R, f64)>> {
    let distributions = input.copy_distributions()?;
    let zp = input.filtered_small();
    let mut exceed = vec![0usize; gammas.len()];
    let mut r = rng.rng();
    for _ in 0..trials {
        let s = input.draw(&distributions, &zp, &mut r);
        let weight = input.w.set_weight(&s);
        for (slot, &g) in gammas.iter().enumerate() {
            if weight > g * w_opt {
                exceed[slot] += 1;
            }
        }
    }
    Ok(gammas
        .iter()
        .zip(exceed)
        .map(|(&g, count)| (g, count as f64 / trials as f64))
        .collect())
}
