//! Standard channels used as fixtures.

use serde::{Deserialize, Serialize};

use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};
use crate::prob::UniverseShape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// `y = x` over the flattened universe.
    Identity { alphabets: Vec<usize> },
    /// Every row equal to `row` (uniform over `outputs` when absent).
    Constant {
        alphabets: Vec<usize>,
        outputs: usize,
        row: Option<Vec<f64>>,
    },
    /// Each record independently kept with probability `1 - q`, otherwise
    /// replaced by one of the other symbols of its alphabet uniformly.
    /// Output is the perturbed dataset, flattened.
    RandomizedResponse { alphabets: Vec<usize>, q: f64 },
    /// Parity of `records` binary records.
    Xor { records: usize },
    /// Counting query over `records` binary records answered by the
    /// geometric mechanism truncated to `[0, records]`: interior outputs get
    /// `(1-α)/(1+α) α^|z-c|`, the two end points absorb the tails.
    TruncatedGeometric { records: usize, alpha: f64 },
}

impl Mechanism {
    pub fn build(&self) -> Result<PrivacyChannel> {
        match self {
            Mechanism::Identity { alphabets } => {
                let shape = UniverseShape::new(alphabets.clone())?;
                let n = shape.total_size();
                let rows = (0..n)
                    .flat_map(|x| (0..n).map(move |y| if x == y { 1.0 } else { 0.0 }))
                    .collect();
                PrivacyChannel::new(shape, n, rows)
            }
            Mechanism::Constant {
                alphabets,
                outputs,
                row,
            } => {
                let shape = UniverseShape::new(alphabets.clone())?;
                if *outputs == 0 {
                    return Err(Error::Parameter("constant channel needs outputs >= 1".into()));
                }
                let row = match row {
                    Some(r) if r.len() != *outputs => {
                        return Err(Error::Parameter(format!(
                            "row has {} entries, outputs is {outputs}",
                            r.len()
                        )))
                    }
                    Some(r) => r.clone(),
                    None => vec![1.0 / *outputs as f64; *outputs],
                };
                let rows = (0..shape.total_size())
                    .flat_map(|_| row.iter().copied())
                    .collect();
                PrivacyChannel::new(shape, *outputs, rows)
            }
            Mechanism::RandomizedResponse { alphabets, q } => {
                if !(0.0..=1.0).contains(q) {
                    return Err(Error::Parameter(format!("flip probability {q} not in [0, 1]")));
                }
                let shape = UniverseShape::new(alphabets.clone())?;
                let n = shape.total_size();
                let mut rows = Vec::with_capacity(n * n);
                for x in 0..n {
                    let xc = shape.unflatten_unchecked(x);
                    for y in 0..n {
                        let yc = shape.unflatten_unchecked(y);
                        let p: f64 = xc
                            .iter()
                            .zip(&yc)
                            .zip(shape.sizes())
                            .map(|((&a, &b), &k)| {
                                if k == 1 {
                                    1.0
                                } else if a == b {
                                    1.0 - q
                                } else {
                                    q / (k - 1) as f64
                                }
                            })
                            .product();
                        rows.push(p);
                    }
                }
                PrivacyChannel::new(shape, n, rows)
            }
            Mechanism::Xor { records } => {
                if *records == 0 {
                    return Err(Error::Parameter("xor needs at least one record".into()));
                }
                let shape = UniverseShape::new(vec![2; *records])?;
                let rows = (0..shape.total_size())
                    .flat_map(|x| {
                        let parity = (x.count_ones() % 2) as usize;
                        (0..2).map(move |y| if y == parity { 1.0 } else { 0.0 })
                    })
                    .collect();
                PrivacyChannel::new(shape, 2, rows)
            }
            Mechanism::TruncatedGeometric { records, alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::Parameter(format!("decay {alpha} not in (0, 1)")));
                }
                if *records == 0 {
                    return Err(Error::Parameter(
                        "counting query needs at least one record".into(),
                    ));
                }
                let n = *records;
                let shape = UniverseShape::new(vec![2; n])?;
                let mut rows = Vec::with_capacity(shape.total_size() * (n + 1));
                for x in 0..shape.total_size() {
                    let c = x.count_ones() as i32;
                    for z in 0..=n as i32 {
                        let p = if z == 0 {
                            alpha.powi(c) / (1.0 + alpha)
                        } else if z == n as i32 {
                            alpha.powi(n as i32 - c) / (1.0 + alpha)
                        } else {
                            (1.0 - alpha) / (1.0 + alpha) * alpha.powi((z - c).abs())
                        };
                        rows.push(p);
                    }
                }
                PrivacyChannel::new(shape, n + 1, rows)
            }
        }
    }
}
