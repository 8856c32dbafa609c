//! Property tests for the structural invariants the modules promise.

use knapsub::grid::{build_grid, classify_elements};
use knapsub::lp::{enumerate_box_lp_vertices, solve_box_lp, BoxLp2, LpOutcome};
use knapsub::multilinear::estimate_mean;
use knapsub::oracle::ValueOracle;
use knapsub::testgen;
use knapsub::{ElemSet, RngStream};

use proptest::prelude::*;

proptest! {
    /// Any value in `[0, n d]` is sandwiched by its upward grid cover.
    #[test]
    fn grid_cover_sandwich(
        eps in 0.05f64..0.95,
        n in 1usize..40,
        d in 0.01f64..10.0,
        frac in 0.0f64..1.0,
    ) {
        let grid = build_grid(eps, n, d).unwrap();
        let v = frac * n as f64 * d;
        let vp = grid.cover_above(v).unwrap();
        prop_assert!(v <= vp + 1e-9);
        prop_assert!((1.0 - eps) * vp - eps * d <= v + 1e-9);
        let below = grid.cover_below(v);
        prop_assert!(below <= v + 1e-12);
    }

    /// Bitmask construction round-trips through the set representation.
    #[test]
    fn elem_set_mask_round_trip(mask in 0u64..(1 << 16), n in 16usize..17) {
        let s = ElemSet::from_mask(mask, n);
        prop_assert_eq!(s.mask64(), Some(mask));
        prop_assert_eq!(s.len(), mask.count_ones() as usize);
        let rebuilt: ElemSet = s.iter().collect();
        prop_assert_eq!(rebuilt, s);
    }

    /// The two-row LP solution is feasible and matches the vertex oracle.
    #[test]
    fn lp_matches_oracle(
        seed in 0u64..5000,
        k in 1usize..6,
        scale_a in 0.0f64..1.5,
        scale_b in 0.0f64..1.5,
    ) {
        use rand::Rng;
        let mut r = RngStream::new(seed).rng();
        let support: ElemSet = (0..k).collect();
        let theta: Vec<f64> = (0..k).map(|_| r.random()).collect();
        let ell: Vec<f64> = (0..k).map(|_| r.random()).collect();
        let w: Vec<f64> = (0..k).map(|_| r.random()).collect();
        let a = scale_a * theta.iter().sum::<f64>();
        let b = scale_b * ell.iter().sum::<f64>();
        let lp = BoxLp2::new(k, &support, w, theta, a, ell, b).unwrap();
        match (solve_box_lp(&lp).unwrap(), enumerate_box_lp_vertices(&lp)) {
            (LpOutcome::Infeasible, None) => {}
            (LpOutcome::Optimal { v, objective }, Some((_, oracle))) => {
                prop_assert!((objective - oracle).abs() <= 1e-6);
                let va: f64 = lp.support.iter().enumerate().map(|(s, &e)| lp.theta[s] * v.get(e)).sum();
                let vb: f64 = lp.support.iter().enumerate().map(|(s, &e)| lp.ell[s] * v.get(e)).sum();
                prop_assert!(va >= lp.bound_theta - 1e-8);
                prop_assert!(vb >= lp.bound_ell - 1e-8);
            }
            _ => prop_assert!(false, "feasibility disagreement"),
        }
    }

    /// Raising the guessed values never moves an element from small to large.
    #[test]
    fn classification_monotone(seed in 0u64..500, bump in 1.0f64..8.0) {
        let inst = testgen::random_coverage(6, 8, 0.5, &RngStream::new(seed)).unwrap();
        let ell: ValueOracle<f64> = ValueOracle::linear(
            (0..6).map(|e| 0.05 * (e + 1) as f64).collect(),
        ).unwrap();
        let lo = classify_elements(&inst.f, &ell, 1.0, 1.0, 0.5).unwrap();
        let hi = classify_elements(&inst.f, &ell, bump, bump, 0.5).unwrap();
        prop_assert!(lo.small.is_subset_of(&hi.small));
    }

    /// The mean estimator replays bit-identically from its stream.
    #[test]
    fn estimator_replays(seed in 0u64..2000) {
        use rand::Rng;
        let stream = RngStream::new(seed);
        let run = || estimate_mean(
            |r| r.random::<f64>(),
            1.0, 0.3, 0.3, 0.2,
            &stream,
        ).unwrap();
        prop_assert_eq!(run().to_bits(), run().to_bits());
    }
}

/// Diminishing returns, exhaustively: marginals never grow along inclusion.
#[test]
fn marginals_shrink_on_supersets() {
    for seed in 0..8u64 {
        let f = testgen::random_submodular_table(6, &RngStream::new(seed)).unwrap();
        let n = 6;
        for mask in 0u64..(1 << n) {
            let s = ElemSet::from_mask(mask, n);
            for g in 0..n {
                if s.contains(g) {
                    continue;
                }
                let t = s.with(g);
                for e in 0..n {
                    if t.contains(e) {
                        continue;
                    }
                    let at_s = f.marginal(&s, e).unwrap();
                    let at_t = f.marginal(&t, e).unwrap();
                    assert!(
                        at_s >= at_t - 1e-9,
                        "seed {seed}: marginal grew from {at_s} to {at_t}"
                    );
                }
            }
        }
    }
}
