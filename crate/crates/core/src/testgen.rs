//! Random instance generators for tests, verification suites, and the CLI:
//! weighted-coverage and budget-allocation models with an adjustable exact
//! curvature, plus generic monotone submodular tables.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::budget::{generate_budget_instance, BudgetInstance, BudgetSpec};
use crate::error::{Error, Result};
use crate::io::{budget_file, FunctionSpec, InstanceFile};
use crate::oracle::{total_curvature, ValueOracle, WeightFn};
use crate::rng::RngStream;
use crate::set::ElemSet;

/// A generated instance together with its exact curvature.
pub struct TestInstance {
    pub name: String,
    pub file: InstanceFile,
    pub f: ValueOracle<f64>,
    pub w: WeightFn<f64>,
    pub c_f: f64,
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Coverage instance whose exact curvature equals `c_target`.
///
/// Every element covers its own unique items; one shared item is covered by
/// at least two elements, including the one with the smallest unique load,
/// and its weight is solved from the target ratio.
pub fn coverage_with_curvature(n: usize, c_target: f64, rng: &RngStream) -> Result<TestInstance> {
    if !(0.0..1.0).contains(&c_target) {
        return Err(Error::InvalidProbability { value: c_target });
    }
    let mut r = rng.rng();
    let unique_per: Vec<usize> = (0..n).map(|_| r.random_range(1..=2)).collect();
    let mut item_weights: Vec<f64> = Vec::new();
    let mut covers: Vec<Vec<usize>> = Vec::new();
    let mut unique_load = vec![0.0f64; n];
    for e in 0..n {
        let mut items = Vec::new();
        for _ in 0..unique_per[e] {
            let wgt = r.random_range(0.3..1.0);
            items.push(item_weights.len());
            item_weights.push(wgt);
            unique_load[e] += wgt;
        }
        covers.push(items);
    }
    let min_e = (0..n)
        .min_by(|&a, &b| unique_load[a].partial_cmp(&unique_load[b]).unwrap())
        .unwrap();
    let shared_item = item_weights.len();
    // ratio at the lightest sharer is u / (u + s) = 1 - c  =>  s = c u / (1 - c)
    let shared_weight = c_target * unique_load[min_e] / (1.0 - c_target);
    item_weights.push(shared_weight);
    let mut sharers = ElemSet::singleton(min_e);
    for e in 0..n {
        if e != min_e && r.random::<f64>() < 0.5 {
            sharers.insert(e);
        }
    }
    if sharers.len() < 2 {
        sharers.insert((min_e + 1) % n);
    }
    if c_target > 0.0 {
        for e in sharers.iter() {
            covers[e].push(shared_item);
        }
    }
    let weights = random_weights(&mut r, n, 0.15, 0.45);
    let file = InstanceFile {
        ground_set: n,
        weights: weights.clone(),
        function: FunctionSpec::Coverage {
            universe_size: item_weights.len(),
            item_weights: item_weights.clone(),
            covers: covers.clone(),
        },
        epsilon: 0.25,
    };
    let f = ValueOracle::coverage(item_weights, covers)?;
    let w = WeightFn::new(weights)?;
    let c_f = total_curvature(&f)?;
    Ok(TestInstance {
        name: format!("coverage-n{n}-c{c_target:.2}"),
        file,
        f,
        w,
        c_f,
    })
}

/// Budget instance with exact curvature inside `[lo, hi)`, found by a
/// deterministic sweep over probability scales.
pub fn budget_with_curvature(
    n_channels: usize,
    lo: f64,
    hi: f64,
    rng: &RngStream,
) -> Result<TestInstance> {
    for attempt in 0..400u64 {
        let stream = rng.substream(attempt);
        let mut r = stream.rng();
        let p_hi = r.random_range(0.55..0.98);
        let p_lo = f64::max(p_hi - r.random_range(0.0..0.25), 0.3);
        let spec = BudgetSpec {
            channels: n_channels,
            customers: r.random_range(2..=4),
            capacity_range: (1, 2),
            prob_range: (p_lo, p_hi),
            weight_range: (0.15, 0.45),
            density: r.random_range(0.4..0.9),
        };
        let inst = generate_budget_instance(&spec, &stream.substream(1))?;
        if inst.ground_size() > 10 {
            continue;
        }
        let (f, w) = crate::budget::budget_oracle::<f64>(&inst)?;
        let c_f = total_curvature(&f)?;
        if c_f >= lo && c_f < hi {
            let file = budget_file(&inst, 0.25)?;
            return Ok(TestInstance {
                name: format!("budget-k{n_channels}-c{c_f:.2}"),
                file,
                f,
                w,
                c_f,
            });
        }
    }
    Err(Error::Invalid(format!(
        "no budget instance found with curvature in [{lo}, {hi})"
    )))
}

/// Plain random coverage (no curvature targeting), for property tests.
pub fn random_coverage(
    n: usize,
    universe: usize,
    density: f64,
    rng: &RngStream,
) -> Result<TestInstance> {
    let mut r = rng.rng();
    let item_weights = random_weights(&mut r, universe, 0.2, 1.0);
    let mut covers: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut items: Vec<usize> = (0..universe)
            .filter(|_| r.random::<f64>() < density)
            .collect();
        if items.is_empty() {
            items.push(r.random_range(0..universe));
        }
        covers.push(items);
    }
    let weights = random_weights(&mut r, n, 0.1, 0.6);
    let file = InstanceFile {
        ground_set: n,
        weights: weights.clone(),
        function: FunctionSpec::Coverage {
            universe_size: universe,
            item_weights: item_weights.clone(),
            covers: covers.clone(),
        },
        epsilon: 0.25,
    };
    let f = ValueOracle::coverage(item_weights, covers)?;
    let w = WeightFn::new(weights)?;
    let c_f = total_curvature(&f)?;
    Ok(TestInstance {
        name: format!("coverage-rand-n{n}"),
        file,
        f,
        w,
        c_f,
    })
}

/// Random plain budget instance, for property tests.
pub fn random_budget(channels: usize, customers: usize, rng: &RngStream) -> Result<BudgetInstance> {
    let mut r = rng.rng();
    let spec = BudgetSpec {
        channels,
        customers,
        capacity_range: (1, 2),
        prob_range: (0.3, 0.9),
        weight_range: (0.1, 0.5),
        density: r.random_range(0.4..0.9),
    };
    generate_budget_instance(&spec, &rng.substream(0xb))
}

/// Random monotone submodular function materialized as an explicit table:
/// a coverage core plus a modular boost (sums of monotone submodular
/// functions stay monotone submodular).
pub fn random_submodular_table(n: usize, rng: &RngStream) -> Result<ValueOracle<f64>> {
    assert!(n <= 12);
    let base = random_coverage(n, 2 * n, 0.4, rng)?.f;
    let mut r = rng.substream(1).rng();
    let boost: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.4)).collect();
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u64..(1 << n) {
        let s = ElemSet::from_mask(mask, n);
        let linear: f64 = s.iter().map(|e| boost[e]).sum();
        values.push(base.eval(&s)? + linear);
    }
    ValueOracle::table(n, values)
}

/// Random submodular table as a ready-to-write instance document.
pub fn random_table_file(n: usize, epsilon: f64, rng: &RngStream) -> Result<InstanceFile> {
    if n > 12 {
        return Err(Error::GroundTooLarge {
            what: "explicit table generation",
            n,
            cap: 12,
        });
    }
    let f = random_submodular_table(n, rng)?;
    let mut r = rng.substream(0x77).rng();
    let weights = random_weights(&mut r, n, 0.1, 0.6);
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u64..(1 << n) {
        values.push(f.eval(&ElemSet::from_mask(mask, n))?);
    }
    Ok(InstanceFile {
        ground_set: n,
        weights,
        function: FunctionSpec::Explicit { values },
        epsilon,
    })
}

/// The twenty verification instances: ten coverage and ten budget models
/// with exact curvature spread across `[0.2, 0.9)`, half of them under the
/// dispatcher's greedy threshold at accuracy 0.25.
pub fn acceptance_suite(seed: u64) -> Result<Vec<TestInstance>> {
    let root = RngStream::new(seed);
    let mut out = Vec::with_capacity(20);
    let coverage_targets = [0.22, 0.25, 0.28, 0.30, 0.31, 0.45, 0.55, 0.65, 0.75, 0.88];
    for (i, &c) in coverage_targets.iter().enumerate() {
        let n = 7 + (i % 4); // 7..=10
        let inst = coverage_with_curvature(n, c, &root.substream(100 + i as u64))?;
        debug_assert!((inst.c_f - c).abs() < 1e-9);
        out.push(inst);
    }
    let budget_buckets = [
        (0.20, 0.27),
        (0.22, 0.30),
        (0.25, 0.32),
        (0.20, 0.32),
        (0.26, 0.32),
        (0.32, 0.55),
        (0.40, 0.65),
        (0.50, 0.80),
        (0.60, 0.90),
        (0.32, 0.90),
    ];
    for (i, &(lo, hi)) in budget_buckets.iter().enumerate() {
        let k = 3 + (i % 2);
        out.push(budget_with_curvature(
            k,
            lo,
            hi,
            &root.substream(200 + i as u64),
        )?);
    }
    Ok(out)
}
