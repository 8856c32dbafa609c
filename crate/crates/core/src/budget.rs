//! Budget allocation over a bipartite influence graph.
//!
//! Media channels (with per-use cost, capacity, and activation probability)
//! influence customers along edges. Allocating `k` copies of channel `a`
//! activates a neighboring customer with probability `1 - p(a)^k`. The
//! expected number of activated customers is a monotone submodular function
//! over the copy-expanded ground set, which plugs into the knapsack pipeline.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{SetFunction, ValueOracle, WeightFn};
use crate::real::Real;
use crate::rng::RngStream;
use crate::set::ElemSet;

/// One media channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Channel {
    pub id: usize,
    /// Cost per allocated copy, in [0, 1].
    pub weight: f64,
    /// Maximum number of copies.
    pub capacity: usize,
    /// Per-trial activation probability, in [0, 1].
    pub prob: f64,
}

/// One customer with its adjacent channels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    pub neighbors: Vec<usize>,
}

/// A bipartite budget-allocation instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetInstance {
    pub channels: Vec<Channel>,
    pub customers: Vec<Customer>,
}

impl BudgetInstance {
    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        for c in &self.channels {
            if !(0.0..=1.0).contains(&c.prob) {
                return Err(Error::InvalidProbability { value: c.prob });
            }
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::InvalidWeight {
                    element: c.id,
                    value: c.weight,
                });
            }
            if c.capacity == 0 {
                return Err(Error::Invalid(format!("channel {} has capacity 0", c.id)));
            }
        }
        for b in &self.customers {
            if b.neighbors.is_empty() {
                return Err(Error::Invalid(format!(
                    "customer {} has no neighbors",
                    b.id
                )));
            }
            for &a in &b.neighbors {
                if a >= self.channels.len() {
                    return Err(Error::ElementOutOfRange {
                        element: a,
                        n: self.channels.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Ground-set size of the copy expansion, `sum of capacities`.
    pub fn ground_size(&self) -> usize {
        self.channels.iter().map(|c| c.capacity).sum()
    }
}

/// The copy-expanded set function: element `(a, i)` is the `i`-th copy of
/// channel `a`; copies of a channel are laid out consecutively, channels in
/// input order.
pub struct BudgetFn<R: Real> {
    n: usize,
    /// Channel index per ground element.
    channel_of: Vec<usize>,
    probs: Vec<R>,
    /// Per customer: adjacent channel list.
    adjacency: Vec<Vec<usize>>,
}

impl<R: Real> BudgetFn<R> {
    pub fn new(instance: &BudgetInstance) -> Result<Self> {
        instance.validate()?;
        let mut channel_of = Vec::new();
        for (a, c) in instance.channels.iter().enumerate() {
            channel_of.extend(std::iter::repeat_n(a, c.capacity));
        }
        Ok(Self {
            n: channel_of.len(),
            channel_of,
            probs: instance.channels.iter().map(|c| R::of(c.prob)).collect(),
            adjacency: instance
                .customers
                .iter()
                .map(|b| b.neighbors.clone())
                .collect(),
        })
    }

    fn copy_counts(&self, s: &ElemSet) -> Vec<u32> {
        let mut counts = vec![0u32; self.probs.len()];
        for e in s.iter() {
            counts[self.channel_of[e]] += 1;
        }
        counts
    }

    /// `p^k` with the convention `0^0 = 1`.
    fn pow(&self, a: usize, k: u32) -> R {
        if k == 0 {
            R::one()
        } else {
            self.probs[a].powi(k as i32)
        }
    }
}

impl<R: Real> SetFunction<R> for BudgetFn<R> {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, s: &ElemSet) -> R {
        let counts = self.copy_counts(s);
        let mut total = R::zero();
        for nbrs in &self.adjacency {
            let mut miss = R::one();
            for &a in nbrs {
                miss *= self.pow(a, counts[a]);
            }
            total += R::one() - miss;
        }
        total
    }
}

/// Builds the oracle, the copy-expanded weights `w'((a, i)) = w(a)`, and the
/// ground size for a budget instance.
pub fn budget_oracle<R: Real>(instance: &BudgetInstance) -> Result<(ValueOracle<R>, WeightFn<R>)> {
    let f = BudgetFn::new(instance)?;
    let weights = f
        .channel_of
        .iter()
        .map(|&a| R::of(instance.channels[a].weight))
        .collect();
    Ok((ValueOracle::new(Arc::new(f)), WeightFn::new(weights)?))
}

/// Closed-form evaluation of the expected number of activated customers.
pub fn budget_eval<R: Real>(instance: &BudgetInstance, s: &ElemSet) -> Result<R> {
    let f = BudgetFn::<R>::new(instance)?;
    if let Some(e) = s.max_elem() {
        if e >= f.n {
            return Err(Error::ElementOutOfRange { element: e, n: f.n });
        }
    }
    Ok(f.value(s))
}

/// Closed-form marginal gain of adding one more copy of a channel:
/// the added copy converts each adjacent customer's miss probability by a
/// factor `(1 - p(a))` of the current joint miss product.
pub fn budget_marginal<R: Real>(instance: &BudgetInstance, s: &ElemSet, e: usize) -> Result<R> {
    let f = BudgetFn::<R>::new(instance)?;
    if e >= f.n {
        return Err(Error::ElementOutOfRange { element: e, n: f.n });
    }
    debug_assert!(!s.contains(e));
    let counts = f.copy_counts(s);
    let a = f.channel_of[e];
    let mut total = R::zero();
    for nbrs in &f.adjacency {
        if !nbrs.contains(&a) {
            continue;
        }
        let mut product = R::one();
        for &a2 in nbrs {
            product *= f.pow(a2, counts[a2]);
        }
        total += (R::one() - f.probs[a]) * product;
    }
    Ok(total)
}

/// Upper bound on the total curvature of the budget function:
/// `1 - min_a min_{b: a in N(b)} p(a)^{c(a)-1} prod_{a' in N(b) - a} p(a')^{c(a')}`.
///
/// A zero probability anywhere in a product makes the bound 1 (valid but
/// vacuous).
pub fn budget_curvature_bound<R: Real>(instance: &BudgetInstance) -> Result<R> {
    instance.validate()?;
    let mut min_ratio = R::one();
    for (a, ca) in instance.channels.iter().enumerate() {
        let pa = R::of(ca.prob);
        for b in &instance.customers {
            if !b.neighbors.contains(&a) {
                continue;
            }
            let mut ratio = if ca.capacity == 1 {
                R::one()
            } else {
                pa.powi(ca.capacity as i32 - 1)
            };
            for &a2 in &b.neighbors {
                if a2 == a {
                    continue;
                }
                let c2 = &instance.channels[a2];
                ratio *= R::of(c2.prob).powi(c2.capacity as i32);
            }
            min_ratio = min_ratio.min(ratio);
        }
    }
    Ok(R::one() - min_ratio)
}

/// Shape of a randomly generated budget instance.
#[derive(Clone, Debug)]
pub struct BudgetSpec {
    pub channels: usize,
    pub customers: usize,
    pub capacity_range: (usize, usize),
    pub prob_range: (f64, f64),
    pub weight_range: (f64, f64),
    /// Probability of each (channel, customer) edge.
    pub density: f64,
}

/// Random bipartite instance, deterministic per stream. Customers that come
/// out isolated have their edges re-drawn.
pub fn generate_budget_instance(spec: &BudgetSpec, rng: &RngStream) -> Result<BudgetInstance> {
    if spec.channels == 0 || spec.customers == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidProbability {
            value: spec.density,
        });
    }
    let (clo, chi) = spec.capacity_range;
    if clo == 0 || clo > chi {
        return Err(Error::Invalid(format!(
            "bad capacity range {:?}",
            spec.capacity_range
        )));
    }
    let mut r = rng.rng();
    let channels = (0..spec.channels)
        .map(|id| Channel {
            id,
            weight: r.random_range(spec.weight_range.0..=spec.weight_range.1),
            capacity: r.random_range(clo..=chi),
            prob: r.random_range(spec.prob_range.0..=spec.prob_range.1),
        })
        .collect();
    let mut customers = Vec::with_capacity(spec.customers);
    for id in 0..spec.customers {
        let mut neighbors: Vec<usize> = Vec::new();
        loop {
            neighbors.clear();
            for a in 0..spec.channels {
                if r.random::<f64>() < spec.density {
                    neighbors.push(a);
                }
            }
            if !neighbors.is_empty() {
                break;
            }
            // Isolated customer: re-draw, but guarantee progress even at
            // density 0 by attaching a uniformly random channel.
            if spec.density == 0.0 {
                neighbors.push(r.random_range(0..spec.channels));
                break;
            }
        }
        customers.push(Customer { id, neighbors });
    }
    let instance = BudgetInstance {
        channels,
        customers,
    };
    instance.validate()?;
    Ok(instance)
}
