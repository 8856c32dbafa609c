//! Minimum-weight vectors under two covering rows and box bounds:
//! `min w . v` subject to `theta . v >= a`, `ell . v >= b`, `v in [0,1]^S`.
//!
//! The primary path scans candidate dual multiplier pairs (the objective is
//! piecewise linear and concave in the two multipliers, so its maximum sits
//! on an intersection of breakpoint lines or an axis) and reconstructs the
//! primal from the best pair. Degenerate ties fall back to a dense two-phase
//! simplex with Bland's rule; the dual value doubles as an optimality
//! certificate for the reconstruction.

use crate::error::{Error, Result};
use crate::multilinear::FractionalPoint;
use crate::real::Real;
use crate::set::ElemSet;

/// A box LP over a support set with two lower-bound rows.
#[derive(Clone, Debug)]
pub struct BoxLp2<R: Real> {
    /// Full ambient dimension; coordinates outside the support stay zero.
    pub n: usize,
    /// Element index per support slot, strictly increasing.
    pub support: Vec<usize>,
    /// Objective coefficients (weights), one per support slot.
    pub w: Vec<R>,
    /// First row coefficients and bound.
    pub theta: Vec<R>,
    pub bound_theta: R,
    /// Second row coefficients and bound.
    pub ell: Vec<R>,
    pub bound_ell: R,
}

impl<R: Real> BoxLp2<R> {
    pub fn new(
        n: usize,
        support: &ElemSet,
        w: Vec<R>,
        theta: Vec<R>,
        bound_theta: R,
        ell: Vec<R>,
        bound_ell: R,
    ) -> Result<Self> {
        let support: Vec<usize> = support.iter().collect();
        let k = support.len();
        if w.len() != k || theta.len() != k || ell.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: w.len(),
            });
        }
        if let Some(&e) = support.last() {
            if e >= n {
                return Err(Error::ElementOutOfRange { element: e, n });
            }
        }
        let mut lp = Self {
            n,
            support,
            w,
            theta,
            bound_theta,
            ell,
            bound_ell,
        };
        for coeffs in [&mut lp.w, &mut lp.theta, &mut lp.ell] {
            for c in coeffs.iter_mut() {
                if !c.is_finite() {
                    return Err(Error::Invalid("non-finite LP coefficient".into()));
                }
                if *c < -R::tol() {
                    return Err(Error::Invalid(format!("negative LP coefficient {c}")));
                }
                *c = c.max(R::zero());
            }
        }
        if !lp.bound_theta.is_finite() || !lp.bound_ell.is_finite() {
            return Err(Error::Invalid("non-finite LP bound".into()));
        }
        Ok(lp)
    }

    fn k(&self) -> usize {
        self.support.len()
    }

    fn expand(&self, dense: &[R]) -> FractionalPoint<R> {
        let mut v = FractionalPoint::zero(self.n);
        for (slot, &e) in self.support.iter().enumerate() {
            v.set(e, dense[slot].min(R::one()).max(R::zero()));
        }
        v
    }
}

/// Solver result: the LP is infeasible exactly when even the all-ones vector
/// misses a row, which upstream treats as a rejected guess, not an error.
#[derive(Clone, Debug)]
pub enum LpOutcome<R: Real> {
    Optimal { v: FractionalPoint<R>, objective: R },
    Infeasible,
}

impl<R: Real> LpOutcome<R> {
    pub fn optimal(self) -> Option<(FractionalPoint<R>, R)> {
        match self {
            LpOutcome::Optimal { v, objective } => Some((v, objective)),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }
}

fn dot<R: Real>(xs: &[R], ys: &[R]) -> R {
    xs.iter().zip(ys).map(|(&x, &y)| x * y).sum()
}

/// Solves the two-row box LP to within 1e-8 of the optimum.
pub fn solve_box_lp<R: Real>(lp: &BoxLp2<R>) -> Result<LpOutcome<R>> {
    let k = lp.k();
    let tol = R::tol();

    // Rows are monotone in v, so the all-ones point decides feasibility.
    let ones = vec![R::one(); k];
    if dot(&lp.theta, &ones) < lp.bound_theta - tol || dot(&lp.ell, &ones) < lp.bound_ell - tol {
        return Ok(LpOutcome::Infeasible);
    }

    // Inactive rows: nothing to cover.
    if lp.bound_theta <= R::zero() && lp.bound_ell <= R::zero() {
        return Ok(LpOutcome::Optimal {
            v: lp.expand(&vec![R::zero(); k]),
            objective: R::zero(),
        });
    }

    // Zero-cost elements are saturated first; they can only help the rows.
    let mut v = vec![R::zero(); k];
    let mut a = lp.bound_theta;
    let mut b = lp.bound_ell;
    let mut free: Vec<usize> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for slot in 0..k {
        if lp.w[slot] <= R::zero() {
            v[slot] = R::one();
            a -= lp.theta[slot];
            b -= lp.ell[slot];
        } else {
            free.push(slot);
        }
    }
    if a <= tol && b <= tol {
        return Ok(LpOutcome::Optimal {
            v: lp.expand(&v),
            objective: R::zero(),
        });
    }

    let dual = best_dual(lp, &free, a, b);
    if let Some(sol) = reconstruct(lp, &free, a, b, &v, dual) {
        return Ok(sol);
    }
    // Degenerate tie structure: hand the residual problem to the simplex.
    let reduced = simplex_box_lp(lp, &free, a.max(R::zero()), b.max(R::zero()))?;
    let mut dense = v;
    for (slot, val) in reduced {
        dense[slot] = val;
    }
    let objective = dot(&lp.w, &dense);
    Ok(LpOutcome::Optimal {
        v: lp.expand(&dense),
        objective,
    })
}

/// Dual objective at multipliers `(mu1, mu2)`.
fn dual_value<R: Real>(lp: &BoxLp2<R>, free: &[usize], a: R, b: R, mu1: R, mu2: R) -> R {
    let mut val = a * mu1 + b * mu2;
    for &slot in free {
        let gain = mu1 * lp.theta[slot] + mu2 * lp.ell[slot] - lp.w[slot];
        if gain > R::zero() {
            val -= gain;
        }
    }
    val
}

/// Scans breakpoint-line intersections for the best dual pair.
fn best_dual<R: Real>(lp: &BoxLp2<R>, free: &[usize], a: R, b: R) -> (R, R, R) {
    let mut best = (
        dual_value(lp, free, a, b, R::zero(), R::zero()),
        R::zero(),
        R::zero(),
    );
    let mut consider = |mu1: R, mu2: R| {
        if mu1 >= R::zero() && mu2 >= R::zero() && mu1.is_finite() && mu2.is_finite() {
            let val = dual_value(lp, free, a, b, mu1, mu2);
            if val > best.0 {
                best = (val, mu1, mu2);
            }
        }
    };
    for (pos, &e) in free.iter().enumerate() {
        if lp.theta[e] > R::zero() {
            consider(lp.w[e] / lp.theta[e], R::zero());
        }
        if lp.ell[e] > R::zero() {
            consider(R::zero(), lp.w[e] / lp.ell[e]);
        }
        for &f in &free[pos + 1..] {
            let det = lp.theta[e] * lp.ell[f] - lp.theta[f] * lp.ell[e];
            if det.abs() <= R::epsilon() * R::of(16.0) {
                continue;
            }
            let mu1 = (lp.w[e] * lp.ell[f] - lp.w[f] * lp.ell[e]) / det;
            let mu2 = (lp.theta[e] * lp.w[f] - lp.theta[f] * lp.w[e]) / det;
            consider(mu1, mu2);
        }
    }
    let (val, mu1, mu2) = best;
    (val, mu1, mu2)
}

/// Builds a primal vector from the best dual pair and certifies it against
/// the dual value. Returns `None` when the tie structure defeats the greedy
/// reconstruction.
fn reconstruct<R: Real>(
    lp: &BoxLp2<R>,
    free: &[usize],
    a: R,
    b: R,
    saturated: &[R],
    (dual, mu1, mu2): (R, R, R),
) -> Option<LpOutcome<R>> {
    let scale = R::one().max(lp.w.iter().fold(R::zero(), |m, &w| m.max(w)));
    let tie_tol = R::tol() * scale * R::of(16.0);
    let mut v = saturated.to_vec();
    let mut rest_a = a;
    let mut rest_b = b;
    let mut tied: Vec<usize> = Vec::new();
    for &slot in free {
        let price = mu1 * lp.theta[slot] + mu2 * lp.ell[slot];
        let rc = lp.w[slot] - price;
        if rc < -tie_tol {
            v[slot] = R::one();
            rest_a -= lp.theta[slot];
            rest_b -= lp.ell[slot];
        } else if rc <= tie_tol {
            tied.push(slot);
        }
    }

    let need_a = mu1 > R::zero();
    let need_b = mu2 > R::zero();
    if need_a && need_b {
        // Both rows bind: with up to two tied slots the exact values follow
        // from the active-row equations; larger tie groups go to the simplex.
        if !fill_two_binding(lp, &tied, rest_a, rest_b, &mut v) {
            return None;
        }
    } else if need_a || need_b {
        let (coeffs, mut need) = if need_a {
            (&lp.theta, rest_a)
        } else {
            (&lp.ell, rest_b)
        };
        for &slot in &tied {
            if need <= R::zero() {
                break;
            }
            if coeffs[slot] > R::zero() {
                let take = (need / coeffs[slot]).min(R::one());
                v[slot] = take;
                need -= take * coeffs[slot];
            }
        }
    }

    // Certify: feasible for the original rows, and objective matching the
    // dual bound (strong duality pins the optimum).
    let feas_tol = R::of(1e-8).max(R::tol()) * scale;
    if dot(&lp.theta, &v) < lp.bound_theta - feas_tol {
        return None;
    }
    if dot(&lp.ell, &v) < lp.bound_ell - feas_tol {
        return None;
    }
    let objective = dot(&lp.w, &v);
    if (objective - dual).abs() > feas_tol * R::of(4.0) + R::tol() {
        return None;
    }
    Some(LpOutcome::Optimal {
        v: lp.expand(&v),
        objective,
    })
}

/// Exact fill for the both-rows-binding case with a small tie group.
fn fill_two_binding<R: Real>(
    lp: &BoxLp2<R>,
    tied: &[usize],
    rest_a: R,
    rest_b: R,
    v: &mut [R],
) -> bool {
    let ra = rest_a.max(R::zero());
    let rb = rest_b.max(R::zero());
    if ra <= R::tol() && rb <= R::tol() {
        return true;
    }
    match tied.len() {
        0 => false,
        1 => {
            let s = tied[0];
            let by_a = if lp.theta[s] > R::zero() {
                ra / lp.theta[s]
            } else {
                R::zero()
            };
            let by_b = if lp.ell[s] > R::zero() {
                rb / lp.ell[s]
            } else {
                R::zero()
            };
            let take = by_a.max(by_b);
            if take > R::one() + R::tol() {
                return false;
            }
            v[s] = take.min(R::one());
            lp.theta[s] * v[s] >= ra - R::tol() && lp.ell[s] * v[s] >= rb - R::tol()
        }
        2 => {
            let (s, t) = (tied[0], tied[1]);
            let det = lp.theta[s] * lp.ell[t] - lp.theta[t] * lp.ell[s];
            if det.abs() > R::epsilon() * R::of(16.0) {
                let vs = (ra * lp.ell[t] - rb * lp.theta[t]) / det;
                let vt = (lp.theta[s] * rb - lp.ell[s] * ra) / det;
                let pad = R::tol();
                if (-pad..=R::one() + pad).contains(&vs) && (-pad..=R::one() + pad).contains(&vt) {
                    v[s] = vs.min(R::one()).max(R::zero());
                    v[t] = vt.min(R::one()).max(R::zero());
                    return true;
                }
            }
            false
        }
        _ => false,
    }
}

/// Dense two-phase simplex with Bland's rule on the boxed standard form.
/// Returns `(slot, value)` pairs over the free slots.
fn simplex_box_lp<R: Real>(lp: &BoxLp2<R>, free: &[usize], a: R, b: R) -> Result<Vec<(usize, R)>> {
    let k = free.len();
    let mut rows: Vec<(Vec<R>, R)> = Vec::new();
    // Covering rows with surplus subtracted; only active bounds join.
    let mut covering = 0;
    if a > R::zero() {
        rows.push((free.iter().map(|&s| lp.theta[s]).collect(), a));
        covering += 1;
    }
    if b > R::zero() {
        rows.push((free.iter().map(|&s| lp.ell[s]).collect(), b));
        covering += 1;
    }
    if covering == 0 {
        return Ok(free.iter().map(|&s| (s, R::zero())).collect());
    }
    let m = covering + k;
    // Columns: k primal, `covering` surplus, k box slacks, `covering`
    // artificials, then RHS.
    let nv = k + covering + k + covering;
    let mut t = vec![vec![R::zero(); nv + 1]; m];
    for (r, (coeffs, rhs)) in rows.iter().enumerate() {
        for (c, &coef) in coeffs.iter().enumerate() {
            t[r][c] = coef;
        }
        t[r][k + r] = -R::one(); // surplus
        t[r][k + covering + k + r] = R::one(); // artificial
        t[r][nv] = *rhs;
    }
    for e in 0..k {
        let r = covering + e;
        t[r][e] = R::one();
        t[r][k + covering + e] = R::one(); // box slack
        t[r][nv] = R::one();
    }
    let mut basis: Vec<usize> = (0..covering)
        .map(|r| k + covering + k + r)
        .chain((0..k).map(|e| k + covering + e))
        .collect();

    let piv_tol = R::of(1e-10).max(R::epsilon() * R::of(64.0));
    let run = |t: &mut Vec<Vec<R>>, basis: &mut Vec<usize>, cost: &[R], banned: usize| {
        // Reduced-cost row for the current basis.
        loop {
            let mut z = vec![R::zero(); nv];
            for (r, &bv) in basis.iter().enumerate() {
                let cb = cost[bv];
                if cb != R::zero() {
                    for c in 0..nv {
                        z[c] += cb * t[r][c];
                    }
                }
            }
            let mut entering = None;
            for c in 0..banned {
                let rc = cost[c] - z[c];
                if rc < -piv_tol {
                    entering = Some(c);
                    break; // Bland: smallest index
                }
            }
            let Some(col) = entering else { break };
            let mut leave: Option<(usize, R)> = None;
            for r in 0..m {
                if t[r][col] > piv_tol {
                    let ratio = t[r][nv] / t[r][col];
                    let better = match leave {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < lv - piv_tol || (ratio <= lv + piv_tol && basis[r] < basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                break; // unbounded direction cannot happen in a boxed LP
            };
            let piv = t[row][col];
            for cell in t[row].iter_mut() {
                *cell /= piv;
            }
            for r in 0..m {
                if r != row {
                    let factor = t[r][col];
                    if factor != R::zero() {
                        let (pivot_row, other) = if r < row {
                            let (a, b) = t.split_at_mut(row);
                            (&b[0], &mut a[r])
                        } else {
                            let (a, b) = t.split_at_mut(r);
                            (&a[row], &mut b[0])
                        };
                        for (cell, &p) in other.iter_mut().zip(pivot_row.iter()) {
                            *cell -= factor * p;
                        }
                    }
                }
            }
            basis[row] = col;
        }
    };

    // Phase 1: drive artificials to zero.
    let mut cost1 = vec![R::zero(); nv];
    for c in cost1.iter_mut().skip(k + covering + k) {
        *c = R::one();
    }
    run(&mut t, &mut basis, &cost1, nv);
    let infeas: R = basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= k + covering + k)
        .map(|(r, _)| t[r][nv])
        .sum();
    if infeas > R::of(1e-7) {
        // Callers pre-check feasibility; reaching this means the instance is
        // numerically marginal, so report it.
        return Err(Error::Invalid(format!(
            "simplex found residual infeasibility {infeas}"
        )));
    }

    // Phase 2: original objective, artificials barred from entering.
    let mut cost2 = vec![R::zero(); nv];
    for (c, &s) in free.iter().enumerate() {
        cost2[c] = lp.w[s];
    }
    run(&mut t, &mut basis, &cost2, k + covering + k);

    let mut values = vec![R::zero(); k];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < k {
            values[bv] = t[r][nv].min(R::one()).max(R::zero());
        }
    }
    Ok(free
        .iter()
        .enumerate()
        .map(|(c, &s)| (s, values[c]))
        .collect())
}

/// Reference oracle: enumerates every basic candidate (all-binary patterns
/// plus one or two fractional coordinates pinned by active rows) and takes
/// the feasible minimum. Exponential in the support size; used to validate
/// the solver on small instances.
pub fn enumerate_box_lp_vertices<R: Real>(lp: &BoxLp2<R>) -> Option<(Vec<R>, R)> {
    let k = lp.k();
    assert!(k <= 16, "vertex oracle is for small supports");
    let feas_tol = R::of(1e-9);
    let mut best: Option<(Vec<R>, R)> = None;
    let mut try_candidate = |v: &[R]| {
        if v.iter().any(|&x| x < -feas_tol || x > R::one() + feas_tol) {
            return;
        }
        if dot(&lp.theta, v) < lp.bound_theta - feas_tol
            || dot(&lp.ell, v) < lp.bound_ell - feas_tol
        {
            return;
        }
        let obj = dot(&lp.w, v);
        if best.as_ref().is_none_or(|(_, cur)| obj < *cur) {
            best = Some((v.to_vec(), obj));
        }
    };

    for pattern in 0u32..(1 << k) {
        let base: Vec<R> = (0..k)
            .map(|e| {
                if pattern & (1 << e) != 0 {
                    R::one()
                } else {
                    R::zero()
                }
            })
            .collect();
        try_candidate(&base);
        // One fractional coordinate pinned by one active row.
        for e in 0..k {
            if pattern & (1 << e) != 0 {
                continue;
            }
            for row in 0..2 {
                let (coeffs, bound) = if row == 0 {
                    (&lp.theta, lp.bound_theta)
                } else {
                    (&lp.ell, lp.bound_ell)
                };
                if coeffs[e] <= R::zero() {
                    continue;
                }
                let partial: R = (0..k)
                    .filter(|&x| x != e)
                    .map(|x| coeffs[x] * base[x])
                    .sum();
                let frac = (bound - partial) / coeffs[e];
                let mut cand = base.clone();
                cand[e] = frac;
                try_candidate(&cand);
            }
        }
        // Two fractional coordinates pinned by both rows.
        for e in 0..k {
            if pattern & (1 << e) != 0 {
                continue;
            }
            for f in e + 1..k {
                if pattern & (1 << f) != 0 {
                    continue;
                }
                let det = lp.theta[e] * lp.ell[f] - lp.theta[f] * lp.ell[e];
                if det.abs() <= R::epsilon() * R::of(16.0) {
                    continue;
                }
                let pa: R = (0..k)
                    .filter(|&x| x != e && x != f)
                    .map(|x| lp.theta[x] * base[x])
                    .sum();
                let pb: R = (0..k)
                    .filter(|&x| x != e && x != f)
                    .map(|x| lp.ell[x] * base[x])
                    .sum();
                let ra = lp.bound_theta - pa;
                let rb = lp.bound_ell - pb;
                let ve = (ra * lp.ell[f] - rb * lp.theta[f]) / det;
                let vf = (lp.theta[e] * rb - lp.ell[e] * ra) / det;
                let mut cand = base.clone();
                cand[e] = ve;
                cand[f] = vf;
                try_candidate(&cand);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    fn lp(w: Vec<f64>, theta: Vec<f64>, a: f64, ell: Vec<f64>, b: f64) -> BoxLp2<f64> {
        let k = w.len();
        let support: ElemSet = (0..k).collect();
        BoxLp2::new(k, &support, w, theta, a, ell, b).unwrap()
    }

    fn objective(outcome: &LpOutcome<f64>) -> f64 {
        match outcome {
            LpOutcome::Optimal { objective, .. } => *objective,
            LpOutcome::Infeasible => panic!("expected feasible"),
        }
    }

    #[test]
    fn inactive_bounds_give_zero() {
        let out = solve_box_lp(&lp(
            vec![1.0, 1.0],
            vec![1.0, 0.0],
            0.0,
            vec![0.0, 1.0],
            -0.5,
        ))
        .unwrap();
        let (v, obj) = out.optimal().unwrap();
        assert_eq!(obj, 0.0);
        assert_eq!(v.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn separable_rows_split_mass() {
        let out = solve_box_lp(&lp(
            vec![1.0, 1.0],
            vec![1.0, 0.0],
            0.5,
            vec![0.0, 1.0],
            0.5,
        ))
        .unwrap();
        let (v, obj) = out.optimal().unwrap();
        assert!((obj - 1.0).abs() < 1e-8);
        assert!((v.get(0) - 0.5).abs() < 1e-8);
        assert!((v.get(1) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn cheapest_per_unit_wins() {
        let out = solve_box_lp(&lp(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            1.0,
            vec![1.0, 1.0],
            1.0,
        ))
        .unwrap();
        let (v, obj) = out.optimal().unwrap();
        assert!((obj - 1.0).abs() < 1e-8);
        assert!((v.get(0) - 1.0).abs() < 1e-8);
        assert!(v.get(1).abs() < 1e-8);
    }

    #[test]
    fn infeasible_detected_at_all_ones() {
        let out = solve_box_lp(&lp(vec![1.0], vec![0.5], 1.0, vec![0.2], 0.1)).unwrap();
        assert!(out.is_infeasible());
    }

    #[test]
    fn zero_weight_elements_saturate_first() {
        let out = solve_box_lp(&lp(
            vec![0.0, 3.0],
            vec![1.0, 1.0],
            1.0,
            vec![0.5, 0.5],
            0.2,
        ))
        .unwrap();
        let (v, obj) = out.optimal().unwrap();
        assert_eq!(obj, 0.0);
        assert_eq!(v.get(0), 1.0);
        assert_eq!(v.get(1), 0.0);
    }

    #[test]
    fn support_expansion_leaves_gaps_zero() {
        let support = ElemSet::from_indices(&[1, 3]);
        let lp: BoxLp2<f64> = BoxLp2::new(
            5,
            &support,
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            1.0,
            vec![0.0, 0.0],
            0.0,
        )
        .unwrap();
        let (v, _) = solve_box_lp(&lp).unwrap().optimal().unwrap();
        assert_eq!(v.get(0), 0.0);
        assert_eq!(v.get(2), 0.0);
        assert_eq!(v.get(4), 0.0);
        assert!((v.get(1) + v.get(3) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_negative_coefficients() {
        let support: ElemSet = (0..1).collect();
        let res = BoxLp2::new(1, &support, vec![-0.5], vec![1.0], 0.5, vec![1.0], 0.5);
        assert!(res.is_err());
    }

    fn random_lp(rng: &mut rand_chacha::ChaCha8Rng, k: usize) -> BoxLp2<f64> {
        let support: ElemSet = (0..k).collect();
        let gen = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..k)
                .map(|_| {
                    if rng.random::<f64>() < 0.2 {
                        0.0
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect()
        };
        let theta = gen(rng);
        let ell = gen(rng);
        let w = gen(rng);
        // Bias bounds toward feasible instances, keeping some infeasible.
        let a = rng.random::<f64>() * 1.4 * theta.iter().sum::<f64>().max(0.1);
        let b = rng.random::<f64>() * 1.4 * ell.iter().sum::<f64>().max(0.1);
        BoxLp2::new(k, &support, w, theta, a, ell, b).unwrap()
    }

    #[test]
    fn matches_vertex_oracle_on_random_instances() {
        let mut rng = RngStream::new(2024).rng();
        let mut feasible = 0;
        for trial in 0..300 {
            let k = 1 + (trial % 6);
            let lp = random_lp(&mut rng, k);
            let got = solve_box_lp(&lp).unwrap();
            let want = enumerate_box_lp_vertices(&lp);
            match (got, want) {
                (LpOutcome::Infeasible, None) => {}
                (LpOutcome::Optimal { v, objective }, Some((_, best))) => {
                    feasible += 1;
                    assert!(
                        (objective - best).abs() <= 1e-6,
                        "trial {trial}: solver {objective} vs oracle {best} ({lp:?})"
                    );
                    // Feasibility residuals within 1e-8.
                    let va: f64 = lp
                        .support
                        .iter()
                        .enumerate()
                        .map(|(s, &e)| lp.theta[s] * v.get(e))
                        .sum();
                    let vb: f64 = lp
                        .support
                        .iter()
                        .enumerate()
                        .map(|(s, &e)| lp.ell[s] * v.get(e))
                        .sum();
                    assert!(va >= lp.bound_theta - 1e-8);
                    assert!(vb >= lp.bound_ell - 1e-8);
                }
                (got, want) => {
                    panic!("trial {trial}: feasibility disagreement {got:?} vs {want:?}")
                }
            }
        }
        assert!(
            feasible > 100,
            "want a healthy feasible share, got {feasible}"
        );
    }

    #[test]
    fn relaxing_bounds_never_costs_more() {
        let mut rng = RngStream::new(7).rng();
        for _ in 0..100 {
            let lp0 = random_lp(&mut rng, 5);
            let LpOutcome::Optimal {
                objective: tight, ..
            } = solve_box_lp(&lp0).unwrap()
            else {
                continue;
            };
            let mut relaxed = lp0.clone();
            relaxed.bound_theta *= 0.7;
            relaxed.bound_ell *= 0.9;
            let loose = objective(&solve_box_lp(&relaxed).unwrap());
            assert!(loose <= tight + 1e-8);
        }
    }

    #[test]
    fn simplex_agrees_with_oracle_directly() {
        let mut rng = RngStream::new(55).rng();
        for trial in 0..120 {
            let k = 1 + (trial % 5);
            let lp = random_lp(&mut rng, k);
            let ones = vec![1.0; k];
            if dot(&lp.theta, &ones) < lp.bound_theta || dot(&lp.ell, &ones) < lp.bound_ell {
                continue;
            }
            let free: Vec<usize> = (0..k).collect();
            let sol =
                simplex_box_lp(&lp, &free, lp.bound_theta.max(0.0), lp.bound_ell.max(0.0)).unwrap();
            let mut dense = vec![0.0; k];
            for (s, val) in sol {
                dense[s] = val;
            }
            let obj = dot(&lp.w, &dense);
            let (_, best) = enumerate_box_lp_vertices(&lp).unwrap();
            assert!(
                (obj - best).abs() <= 1e-6,
                "trial {trial}: simplex {obj} vs oracle {best} ({lp:?})"
            );
            assert!(dot(&lp.theta, &dense) >= lp.bound_theta - 1e-8);
            assert!(dot(&lp.ell, &dense) >= lp.bound_ell - 1e-8);
        }
    }
}
