//! Instance file format: one JSON document carrying the ground set size,
//! per-element weights, the function description (explicit table, weighted
//! coverage, or budget allocation), and the accuracy parameter.

use serde::{Deserialize, Serialize};

use crate::budget::{budget_oracle, BudgetInstance, Channel, Customer};
use crate::error::{Error, Result};
use crate::oracle::{Instance, ValueOracle, WeightFn, TABLE_CAP};
use crate::real::Real;

/// Tagged function description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FunctionSpec {
    /// All `2^n` values in subset-bitmask order, least significant bit is
    /// element 0.
    Explicit { values: Vec<f64> },
    /// Weighted coverage of a finite universe.
    Coverage {
        universe_size: usize,
        item_weights: Vec<f64>,
        covers: Vec<Vec<usize>>,
    },
    /// Bipartite budget-allocation model over the copy-expanded ground set.
    Budget {
        channels: Vec<Channel>,
        customers: Vec<Customer>,
    },
}

/// On-disk instance document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub ground_set: usize,
    pub weights: Vec<f64>,
    pub function: FunctionSpec,
    pub epsilon: f64,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("instance parse: {e}")))
    }

    /// Canonical serialization; parse-then-serialize round-trips files this
    /// writer produced byte for byte.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    /// Validates the document and builds the runnable instance.
    pub fn to_instance(&self) -> Result<Instance<f64>> {
        let n = self.ground_set;
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        if self.weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.weights.len(),
            });
        }
        let f: ValueOracle<f64> = match &self.function {
            FunctionSpec::Explicit { values } => {
                if n > TABLE_CAP {
                    return Err(Error::GroundTooLarge {
                        what: "explicit table",
                        n,
                        cap: TABLE_CAP,
                    });
                }
                ValueOracle::table(n, values.clone())?
            }
            FunctionSpec::Coverage {
                universe_size,
                item_weights,
                covers,
            } => {
                if item_weights.len() != *universe_size {
                    return Err(Error::DimensionMismatch {
                        expected: *universe_size,
                        got: item_weights.len(),
                    });
                }
                if covers.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: covers.len(),
                    });
                }
                ValueOracle::coverage(item_weights.clone(), covers.clone())?
            }
            FunctionSpec::Budget {
                channels,
                customers,
            } => {
                let inst = BudgetInstance {
                    channels: channels.clone(),
                    customers: customers.clone(),
                };
                if inst.ground_size() != n {
                    return Err(Error::Invalid(format!(
                        "budget ground size {} disagrees with ground_set {n}",
                        inst.ground_size()
                    )));
                }
                let (oracle, expanded) = budget_oracle::<f64>(&inst)?;
                for (e, (&have, &want)) in self.weights.iter().zip(expanded.as_slice()).enumerate()
                {
                    if (have - want).abs() > 1e-12 {
                        return Err(Error::Invalid(format!(
                            "weight {have} for element {e} disagrees with channel weight {want}"
                        )));
                    }
                }
                oracle
            }
        };
        let w = WeightFn::new(self.weights.to_vec())?;
        Instance::new(f, w, self.epsilon)
    }

    /// The budget sub-instance, when this document is budget-backed.
    pub fn budget_instance(&self) -> Option<BudgetInstance> {
        match &self.function {
            FunctionSpec::Budget {
                channels,
                customers,
            } => Some(BudgetInstance {
                channels: channels.clone(),
                customers: customers.clone(),
            }),
            _ => None,
        }
    }
}

/// Builds the instance document for a budget model, expanding weights.
pub fn budget_file(inst: &BudgetInstance, epsilon: f64) -> Result<InstanceFile> {
    inst.validate()?;
    let (_, w) = budget_oracle::<f64>(inst)?;
    Ok(InstanceFile {
        ground_set: inst.ground_size(),
        weights: w.as_slice().iter().map(|&x| x.to64()).collect(),
        function: FunctionSpec::Budget {
            channels: inst.channels.clone(),
            customers: inst.customers.clone(),
        },
        epsilon,
    })
}
