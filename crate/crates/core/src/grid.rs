//! Geometric value grids for guessing unknown optimum-related quantities,
//! small/large element classification, and exhaustive guess-profile
//! enumeration.

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::real::Real;
use crate::set::ElemSet;

/// A descending geometric grid `{n d, (1-eps) n d, ..., ~eps d} + {0}`.
///
/// Consecutive nonzero values have ratio exactly `1 - eps`; the smallest
/// nonzero value lands within one ratio step of `eps * d`. Any `v` in
/// `[0, n d]` is sandwiched by a grid point `v'` with
/// `(1 - eps) v' - eps d <= v <= v'`.
#[derive(Clone, Debug)]
pub struct ValueGrid<R: Real> {
    values: Vec<R>,
    pub epsilon: R,
    pub top: R,
    /// Target floor `eps * d`; the actual last nonzero value is within a
    /// factor `(1 - eps)` of it.
    pub bottom: R,
}

/// Builds the guessing grid for values in `[0, n d]`.
pub fn build_grid<R: Real>(epsilon: R, n: usize, d: R) -> Result<ValueGrid<R>> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if d <= R::zero() {
        return Ok(ValueGrid {
            values: vec![R::zero()],
            epsilon,
            top: R::zero(),
            bottom: R::zero(),
        });
    }
    let ratio = R::one() - epsilon;
    let steps = ((epsilon / R::of(n as f64)).ln() / ratio.ln())
        .ceil()
        .to64() as usize;
    let mut values = Vec::with_capacity(steps + 2);
    let mut v = R::of(n as f64) * d;
    let top = v;
    for _ in 0..=steps {
        values.push(v);
        v *= ratio;
    }
    values.push(R::zero());
    Ok(ValueGrid {
        values,
        epsilon,
        top,
        bottom: epsilon * d,
    })
}

impl<R: Real> ValueGrid<R> {
    /// Grid values in descending order, ending with 0.
    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest grid value `>= v`; `v` may exceed the top by float noise only.
    pub fn cover_above(&self, v: R) -> Result<R> {
        if v > self.top * (R::one() + R::tol()) + R::tol() {
            return Err(Error::Invalid(format!(
                "value {v} above grid top {}",
                self.top
            )));
        }
        Ok(self
            .values
            .iter()
            .rev()
            .copied()
            .find(|&g| g >= v)
            .unwrap_or(self.top))
    }

    /// Largest grid value `<= v` (0 always qualifies).
    pub fn cover_below(&self, v: R) -> R {
        self.values
            .iter()
            .copied()
            .find(|&g| g <= v)
            .unwrap_or(R::zero())
    }

    /// Divides every value by `m`, for per-copy guessing grids.
    pub fn divided_by(&self, m: usize) -> Self {
        let scale = R::one() / R::of(m as f64);
        ValueGrid {
            values: self.values.iter().map(|&v| v * scale).collect(),
            epsilon: self.epsilon,
            top: self.top * scale,
            bottom: self.bottom * scale,
        }
    }
}

/// Restriction of a grid to values `>= (1 - eps)(1 - c_g) * gamma0`, the
/// span that later per-iteration guesses can occupy once the first guess is
/// fixed at `gamma0`.
pub fn restricted_grid<R: Real>(grid: &ValueGrid<R>, gamma0: R, c_g: R) -> ValueGrid<R> {
    let threshold = (R::one() - grid.epsilon) * (R::one() - c_g) * gamma0;
    let values: Vec<R> = grid
        .values
        .iter()
        .copied()
        .filter(|&v| v >= threshold)
        .collect();
    let values = if values.is_empty() {
        vec![R::zero()]
    } else {
        values
    };
    ValueGrid {
        top: values[0],
        bottom: *values.last().unwrap(),
        values,
        epsilon: grid.epsilon,
    }
}

/// Partition of the ground set into large and small elements with respect to
/// guessed optimum values `(v_g, v_l)`: an element is small when both its
/// `g` and `ell` singleton values fall under `eps^6` times the guess.
#[derive(Clone, Debug)]
pub struct ElementClassification<R: Real> {
    pub v_g: R,
    pub v_l: R,
    pub large: ElemSet,
    pub small: ElemSet,
    pub threshold_g: R,
    pub threshold_l: R,
}

pub fn classify_elements<R: Real>(
    g: &ValueOracle<R>,
    ell: &ValueOracle<R>,
    v_g: R,
    v_l: R,
    epsilon: R,
) -> Result<ElementClassification<R>> {
    let eps6 = epsilon.powi(6);
    let threshold_g = eps6 * v_g;
    let threshold_l = eps6 * v_l;
    let mut large = ElemSet::empty();
    let mut small = ElemSet::empty();
    for e in 0..g.n() {
        if g.singleton(e)? <= threshold_g && ell.singleton(e)? <= threshold_l {
            small.insert(e);
        } else {
            large.insert(e);
        }
    }
    Ok(ElementClassification {
        v_g,
        v_l,
        large,
        small,
        threshold_g,
        threshold_l,
    })
}

/// Ceiling on the number of large elements an optimal solution can contain:
/// `floor(1 / ((1 - c_g) eps^6)) + floor(1 / eps^6)`, the two per-function
/// counting bounds added. Unbounded at curvature 1.
pub fn large_element_count_bound<R: Real>(c_g: R, epsilon: R) -> Result<u64> {
    if c_g >= R::one() {
        return Err(Error::CurvatureSaturated);
    }
    if !(epsilon > R::zero() && epsilon <= R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    let eps6 = epsilon.to64().powi(6);
    let m_g = (1.0 / ((1.0 - c_g.to64()) * eps6)).floor();
    let m_l = (1.0 / eps6).floor();
    let sum = m_g + m_l;
    if !sum.is_finite() || sum >= u64::MAX as f64 {
        return Ok(u64::MAX);
    }
    Ok(sum as u64)
}

/// Grid for per-copy guesses: the grid over `[0, m d]` with every value
/// divided by `m`, so its top is `d` and its floor near `eps d / m`.
pub fn per_copy_grid<R: Real>(epsilon: R, m: usize, d: R) -> Result<ValueGrid<R>> {
    Ok(build_grid(epsilon, m, d)?.divided_by(m))
}

/// One full guess assignment consumed by a guessing-continuous-greedy run.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessProfile<R: Real> {
    pub v_g: R,
    pub v_l: R,
    pub m: usize,
    /// Per large slot `i`, per iteration `t`: guessed marginal value.
    pub gamma_ti: Vec<Vec<R>>,
    /// Per large slot `i`: guessed linear value.
    pub lambda_i: Vec<R>,
    /// Per iteration `t`: guessed small-set marginal value.
    pub gamma_s: Vec<R>,
    pub lambda_s: R,
}

impl<R: Real> GuessProfile<R> {
    pub fn iterations(&self) -> usize {
        self.gamma_s.len()
    }

    pub fn validate(&self, iterations: usize) -> Result<()> {
        if self.gamma_ti.len() != self.m || self.lambda_i.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: self.gamma_ti.len(),
            });
        }
        for row in &self.gamma_ti {
            if row.len() != iterations {
                return Err(Error::DimensionMismatch {
                    expected: iterations,
                    got: row.len(),
                });
            }
        }
        if self.gamma_s.len() != iterations {
            return Err(Error::DimensionMismatch {
                expected: iterations,
                got: self.gamma_s.len(),
            });
        }
        let all_nonneg = self
            .gamma_ti
            .iter()
            .flatten()
            .chain(self.lambda_i.iter())
            .chain(self.gamma_s.iter())
            .chain(std::iter::once(&self.lambda_s))
            .all(|&v| v >= R::zero());
        if !all_nonneg {
            return Err(Error::Invalid("negative guess value".into()));
        }
        Ok(())
    }
}

/// Exhaustive enumeration of guess profiles for a fixed `(v_g, v_l, m)` cell.
///
/// Profiles are indexed 0..count in a fixed mixed-radix order, so consumers
/// can split the range deterministically.
pub struct ProfileEnumeration<R: Real> {
    v_g: R,
    v_l: R,
    m: usize,
    iterations: usize,
    per_copy: Vec<R>,
    base: Vec<R>,
    /// Per choice of the first small guess: the allowed later values.
    restricted: Vec<Vec<R>>,
    /// Per choice of the first small guess: `|restricted|^(iterations-1)`.
    block: Vec<u128>,
    blocks_total: u128,
    count: u128,
}

/// Prepares the enumeration; errs when the profile count exceeds `budget`.
///
/// `d` is the singleton ceiling that sized `base_grid`; per-copy guesses come
/// from the grid for `[0, m d]` with every value divided by `m`.
#[allow(clippy::too_many_arguments)]
pub fn enumerate_guess_profiles<R: Real>(
    base_grid: &ValueGrid<R>,
    d: R,
    v_g: R,
    v_l: R,
    m: usize,
    iterations: usize,
    c_g: R,
    budget: u64,
) -> Result<ProfileEnumeration<R>> {
    let per_copy = if m == 0 {
        Vec::new()
    } else {
        per_copy_grid(base_grid.epsilon, m, d)?.values().to_vec()
    };
    let base = base_grid.values().to_vec();
    let mut restricted = Vec::with_capacity(base.len());
    let mut block = Vec::with_capacity(base.len());
    let mut blocks_total: u128 = 0;
    for &gamma0 in &base {
        let r = restricted_grid(base_grid, gamma0, c_g).values().to_vec();
        let b = (r.len() as u128)
            .checked_pow((iterations - 1) as u32)
            .ok_or(Error::EnumerationBudget {
                needed: u128::MAX,
                budget,
            })?;
        blocks_total = blocks_total
            .checked_add(b)
            .ok_or(Error::EnumerationBudget {
                needed: u128::MAX,
                budget,
            })?;
        restricted.push(r);
        block.push(b);
    }
    let large_slots = (m * iterations + m) as u32;
    let count_large = (per_copy.len().max(1) as u128)
        .checked_pow(large_slots)
        .ok_or(Error::EnumerationBudget {
            needed: u128::MAX,
            budget,
        })?;
    let count = count_large
        .checked_mul(base.len() as u128)
        .and_then(|c| c.checked_mul(blocks_total))
        .ok_or(Error::EnumerationBudget {
            needed: u128::MAX,
            budget,
        })?;
    if count > budget as u128 {
        return Err(Error::EnumerationBudget {
            needed: count,
            budget,
        });
    }
    Ok(ProfileEnumeration {
        v_g,
        v_l,
        m,
        iterations,
        per_copy,
        base,
        restricted,
        block,
        blocks_total,
        count,
    })
}

impl<R: Real> ProfileEnumeration<R> {
    pub fn count(&self) -> u128 {
        self.count
    }

    /// Decodes profile `index` in the fixed enumeration order.
    pub fn profile_at(&self, index: u128) -> GuessProfile<R> {
        debug_assert!(index < self.count);
        let count_small = self.base.len() as u128 * self.blocks_total;
        let mut large_idx = index / count_small;
        let mut small_idx = index % count_small;

        // Large part: m * iterations gamma slots, then m lambda slots,
        // uniform radix.
        let radix = self.per_copy.len().max(1) as u128;
        let mut gamma_ti = vec![vec![R::zero(); self.iterations]; self.m];
        for row in gamma_ti.iter_mut() {
            for slot in row.iter_mut() {
                let digit = (large_idx % radix) as usize;
                large_idx /= radix;
                *slot = self.per_copy.get(digit).copied().unwrap_or(R::zero());
            }
        }
        let mut lambda_i = vec![R::zero(); self.m];
        for slot in lambda_i.iter_mut() {
            let digit = (large_idx % radix) as usize;
            large_idx /= radix;
            *slot = self.per_copy.get(digit).copied().unwrap_or(R::zero());
        }

        // Small part: lambda_s choice, then the first-guess block, then the
        // remaining iterations from the restricted grid.
        let lambda_slot = small_idx / self.blocks_total;
        let lambda_s = self.base[lambda_slot as usize];
        small_idx %= self.blocks_total;
        let mut k = 0usize;
        while small_idx >= self.block[k] {
            small_idx -= self.block[k];
            k += 1;
        }
        let gamma0 = self.base[k];
        let choices = &self.restricted[k];
        let mut gamma_s = Vec::with_capacity(self.iterations);
        gamma_s.push(gamma0);
        let radix_r = choices.len() as u128;
        for _ in 1..self.iterations {
            let digit = (small_idx % radix_r) as usize;
            small_idx /= radix_r;
            gamma_s.push(choices[digit]);
        }

        GuessProfile {
            v_g: self.v_g,
            v_l: self.v_l,
            m: self.m,
            gamma_ti,
            lambda_i,
            gamma_s,
            lambda_s,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = GuessProfile<R>> + '_ {
        (0..self.count).map(|i| self.profile_at(i))
    }
}
