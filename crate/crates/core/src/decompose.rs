//! Splits a monotone submodular `f` into `f = g + ell` where `ell` is the
//! monotone linear part built from complement marginals and `g` keeps the
//! submodular remainder. The split strictly lowers the curvature of the
//! submodular part, which is what the joint `g`/`ell` driver feeds on.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{check_monotone_submodular, total_curvature, SetFunction, ValueOracle};
use crate::real::Real;
use crate::set::ElemSet;

/// Residual `g(S) = f(S) - ell(S)` evaluated lazily: one `f` query per call.
struct ResidualFn<R: Real> {
    f: ValueOracle<R>,
    ell_coeffs: Vec<R>,
}

impl<R: Real> SetFunction<R> for ResidualFn<R> {
    fn n(&self) -> usize {
        self.f.n()
    }

    fn value(&self, s: &ElemSet) -> R {
        let linear: R = s.iter().map(|e| self.ell_coeffs[e]).sum();
        self.f.eval_unchecked(s) - linear
    }
}

/// The `f = g + ell` split together with its curvature bookkeeping.
#[derive(Clone)]
pub struct Decomposition<R: Real> {
    /// Original function, retained for oracle-call accounting.
    pub f: ValueOracle<R>,
    /// Monotone submodular remainder, evaluated as `f(S) - ell(S)`.
    pub g: ValueOracle<R>,
    /// Monotone linear part with coefficients `(1 - eps/2) * f_{E-e}(e)`.
    pub ell: ValueOracle<R>,
    pub ell_coeffs: Vec<R>,
    pub epsilon: R,
    /// Exact total curvature of `f`.
    pub c_f: R,
    /// Proven ceiling on the curvature of `g`: `1 - eps (1 - c_f) / 2`.
    pub c_g_bound: R,
}

impl<R: Real> Decomposition<R> {
    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// Oracle queries made against the original `f` so far. Queries to `g`
    /// pass through to `f` and are included.
    pub fn base_calls(&self) -> u64 {
        self.f.calls()
    }
}

/// Builds the split. The linear coefficients take `n + 1` queries (`f(E)`
/// and every `f(E - e)`); `g` stays lazy. Fails if `f` shows a negative
/// complement marginal (not monotone).
pub fn decompose<R: Real>(f: &ValueOracle<R>, epsilon: R) -> Result<Decomposition<R>> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::InvalidEpsilon {
            value: epsilon.to64(),
        });
    }
    let c_f = total_curvature(f)?;
    let n = f.n();
    let full = ElemSet::from_iter(0..n);
    let f_full = f.eval(&full)?;
    let half = R::one() - epsilon / R::of(2.0);
    let mut ell_coeffs = Vec::with_capacity(n);
    for e in 0..n {
        let marginal = f_full - f.eval(&full.without(e))?;
        if marginal < -R::tol() {
            return Err(Error::NotMonotone {
                element: e,
                value: marginal.to64(),
            });
        }
        ell_coeffs.push(half * marginal.max(R::zero()));
    }
    let g = ValueOracle::new(Arc::new(ResidualFn {
        f: f.clone(),
        ell_coeffs: ell_coeffs.clone(),
    }));
    let ell = ValueOracle::linear(ell_coeffs.clone())?;
    let c_g_bound = R::one() - epsilon * (R::one() - c_f) / R::of(2.0);
    Ok(Decomposition {
        f: f.clone(),
        g,
        ell,
        ell_coeffs,
        epsilon,
        c_f,
        c_g_bound,
    })
}

/// Result of [`verify_decomposition`].
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub passed: bool,
    pub measured_c_g: R64OrNan,
    pub failures: Vec<String>,
}

/// Measured curvature of `g`, or NaN when `g` failed the structure check.
pub type R64OrNan = f64;

/// Exhaustively checks, for `n <= 12`:
/// (i) `g + ell` reproduces `f` on every subset,
/// (ii) `ell(S) >= (1 - c_f - eps/2) f(S)` on every subset,
/// (iii) the measured curvature of `g` stays under the proven ceiling,
/// (iv) `g` is monotone submodular.
pub fn verify_decomposition<R: Real>(
    d: &Decomposition<R>,
    f: &ValueOracle<R>,
) -> Result<DecompositionReport> {
    let n = f.n();
    if n > crate::oracle::CHECK_CAP {
        return Err(Error::GroundTooLarge {
            what: "decomposition verification",
            n,
            cap: crate::oracle::CHECK_CAP,
        });
    }
    let tol = R::tol();
    let mut failures = Vec::new();

    for mask in 0u64..(1u64 << n) {
        let s = ElemSet::from_mask(mask, n);
        let fv = f.eval(&s)?;
        let gv = d.g.eval(&s)?;
        let lv = d.ell.eval(&s)?;
        if (gv + lv - fv).abs() > tol {
            failures.push(format!(
                "g + ell != f at S = {mask:#b}: {} vs {}",
                gv + lv,
                fv
            ));
            break;
        }
    }

    let floor = R::one() - d.c_f - d.epsilon / R::of(2.0);
    for mask in 0u64..(1u64 << n) {
        let s = ElemSet::from_mask(mask, n);
        let lv = d.ell.eval(&s)?;
        let fv = f.eval(&s)?;
        if lv < floor * fv - tol {
            failures.push(format!(
                "linear share too small at S = {mask:#b}: ell = {lv} < {} * f = {}",
                floor,
                floor * fv
            ));
            break;
        }
    }

    let structure = check_monotone_submodular(&d.g)?;
    if !structure.passed {
        failures.push(format!(
            "g fails structure check: {}",
            structure.witness.unwrap_or_default()
        ));
    }

    let measured_c_g = if structure.passed {
        let c_g = total_curvature(&d.g)?;
        if c_g > d.c_g_bound + tol {
            failures.push(format!(
                "measured c_g = {c_g} exceeds ceiling {}",
                d.c_g_bound
            ));
        }
        c_g.to64()
    } else {
        f64::NAN
    };

    Ok(DecompositionReport {
        passed: failures.is_empty(),
        measured_c_g,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_table() -> ValueOracle<f64> {
        ValueOracle::table(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap()
    }

    #[test]
    fn linear_input_splits_proportionally() {
        let f: ValueOracle<f64> = ValueOracle::linear(vec![0.3, 0.4]).unwrap();
        let d = decompose(&f, 0.5).unwrap();
        // ell = (1 - eps/2) f, g = (eps/2) f.
        assert!((d.ell_coeffs[0] - 0.75 * 0.3).abs() < 1e-12);
        assert!((d.ell_coeffs[1] - 0.75 * 0.4).abs() < 1e-12);
        let s = ElemSet::from_indices(&[0, 1]);
        assert!((d.g.eval(&s).unwrap() - 0.25 * 0.7).abs() < 1e-12);
        let report = verify_decomposition(&d, &f).unwrap();
        assert!(report.passed);
        assert!(report.measured_c_g.abs() < 1e-9);
    }

    #[test]
    fn demo_table_split_values() {
        let f = demo_table();
        let d = decompose(&f, 0.5).unwrap();
        assert!((d.ell_coeffs[0] - 0.375).abs() < 1e-12);
        assert!((d.ell_coeffs[1] - 0.375).abs() < 1e-12);
        let ab = ElemSet::from_indices(&[0, 1]);
        assert!((d.g.eval(&ab).unwrap() - 0.75).abs() < 1e-12);
        assert!(verify_decomposition(&d, &f).unwrap().passed);
    }

    #[test]
    fn coefficients_grow_as_epsilon_shrinks() {
        let f = demo_table();
        let wide = decompose(&f, 0.5).unwrap();
        let tight = decompose(&f, 0.1).unwrap();
        for e in 0..2 {
            assert!(tight.ell_coeffs[e] > wide.ell_coeffs[e]);
        }
    }

    #[test]
    fn rejects_invalid_epsilon() {
        let f = demo_table();
        assert!(matches!(
            decompose(&f, 0.0),
            Err(Error::InvalidEpsilon { .. })
        ));
        assert!(matches!(
            decompose(&f, 1.0),
            Err(Error::InvalidEpsilon { .. })
        ));
    }

    #[test]
    fn supermodular_input_fails_structure_check() {
        // f_b(a) = 1.5 > f_empty(a) = 1: marginals stay nonnegative, so the
        // split is constructed, but g comes out non-monotone.
        let f = ValueOracle::table(2, vec![0.0, 1.0, 1.0, 2.5]).unwrap();
        let d = decompose(&f, 0.5).unwrap();
        let report = verify_decomposition(&d, &f).unwrap();
        assert!(!report.passed);
        assert!(report.failures.iter().any(|m| m.contains("structure")));
    }

    #[test]
    fn split_is_exact_on_random_coverage() {
        let f = ValueOracle::coverage(
            vec![0.5, 1.0, 0.25, 0.75],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap();
        for eps in [0.1, 0.25, 0.5] {
            let d = decompose(&f, eps).unwrap();
            let report = verify_decomposition(&d, &f).unwrap();
            assert!(report.passed, "eps = {eps}: {:?}", report.failures);
            assert!(report.measured_c_g <= d.c_g_bound + 1e-9);
        }
    }
}
