//! Privacy channels as row-stochastic matrices and the constructions built
//! on them: output laws, joint input/output tables, channels induced onto a
//! subset of records, and the two kinds of composition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{
    JointDistribution, JointMatrix, MarginalDistribution, UniverseShape, NORMALIZATION_TOL, RENORMALIZE_ABOVE,
};

/// A privacy channel `p(y|x)`: one stochastic row per flattened dataset `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyChannel {
    input_shape: UniverseShape,
    output_size: usize,
    rows: Vec<f64>,
}

impl PrivacyChannel {
    /// Builds a channel from a flat row-major matrix. Rows within
    /// `NORMALIZATION_TOL` of stochastic are renormalized.
    pub fn new(input_shape: UniverseShape, output_size: usize, mut rows: Vec<f64>) -> Result<Self> {
        if output_size == 0 {
            return Err(Error::Dimension("output alphabet is empty".into()));
        }
        let expected = input_shape.total_size() * output_size;
        if rows.len() != expected {
            return Err(Error::Dimension(format!(
                "channel matrix has {} entries, expected {} x {}",
                rows.len(),
                input_shape.total_size(),
                output_size
            )));
        }
        for (x, row) in rows.chunks_mut(output_size).enumerate() {
            if let Some(y) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Normalization(format!(
                    "p(y={y}|x={x}) = {} is not a probability",
                    row[y]
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Normalization(format!("row {x} sums to {total}")));
            }
            if (total - 1.0).abs() > RENORMALIZE_ABOVE {
                row.iter_mut().for_each(|v| *v /= total);
            }
        }
        Ok(PrivacyChannel {
            input_shape,
            output_size,
            rows,
        })
    }

    pub fn from_rows(input_shape: UniverseShape, rows: Vec<Vec<f64>>) -> Result<Self> {
        let output_size = rows.first().map_or(0, Vec::len);
        if let Some(x) = rows.iter().position(|r| r.len() != output_size) {
            return Err(Error::Dimension(format!(
                "row {x} has {} entries, row 0 has {output_size}",
                rows[x].len()
            )));
        }
        Self::new(input_shape, output_size, rows.into_iter().flatten().collect())
    }

    pub fn input_shape(&self) -> &UniverseShape {
        &self.input_shape
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn inputs(&self) -> usize {
        self.input_shape.total_size()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.rows
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.output_size)
    }

    fn check_input(&self, x: &JointDistribution) -> Result<()> {
        if x.shape() != &self.input_shape {
            return Err(Error::Dimension(format!(
                "input law over {:?}, channel expects {:?}",
                x.shape().sizes(),
                self.input_shape.sizes()
            )));
        }
        Ok(())
    }

    /// `p(y) = Σ_x p(x) p(y|x)`.
    pub fn output_distribution(&self, x: &JointDistribution) -> Result<MarginalDistribution> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.output_size];
        for (row, &px) in self.rows().zip(x.mass()) {
            if px > 0.0 {
                for (o, &w) in out.iter_mut().zip(row) {
                    *o += px * w;
                }
            }
        }
        MarginalDistribution::new(out)
    }

    /// Joint table `P(x_I, y)`, rows indexed by the flattened `x_I`.
    pub fn joint_io(&self, x: &JointDistribution, indices: &[usize]) -> Result<JointMatrix> {
        self.check_input(x)?;
        let sorted = self.input_shape.check_indices(indices)?;
        let sub = self.input_shape.sub_shape(&sorted)?;
        let proj = self.input_shape.projection_unchecked(&sorted);
        Ok(JointMatrix::from_raw(
            sub.total_size(),
            self.output_size,
            joint_io_raw(&self.rows, self.output_size, &proj, sub.total_size(), x.mass()),
        ))
    }

    /// Channel from `X_I` to `Y` obtained by mixing rows through the
    /// conditional `p(x_{(I)} | x_I)` of the given input law.
    ///
    /// Values of `x_I` with zero marginal mass have no conditional and are
    /// dropped; `kept` maps the rows of the result back to flattened `x_I`.
    /// When nothing is dropped the result keeps the sub-universe shape,
    /// otherwise it lives on a single slot of `kept.len()` symbols.
    pub fn induced_channel(&self, x: &JointDistribution, indices: &[usize]) -> Result<InducedChannel> {
        let joint = self.joint_io(x, indices)?;
        let sub = self.input_shape.sub_shape(indices)?;
        let marg = joint.row_marginal();
        let kept: Vec<usize> = (0..sub.total_size()).filter(|&k| marg[k] > 0.0).collect();
        if kept.is_empty() {
            return Err(Error::Conditioning("input law has no mass".into()));
        }
        let mut rows = Vec::with_capacity(kept.len() * self.output_size);
        for &k in &kept {
            let total: f64 = (0..self.output_size).map(|y| joint.get(k, y)).sum();
            rows.extend((0..self.output_size).map(|y| joint.get(k, y) / total));
        }
        let shape = if kept.len() == sub.total_size() {
            sub
        } else {
            UniverseShape::single(kept.len())?
        };
        Ok(InducedChannel {
            channel: PrivacyChannel::new(shape, self.output_size, rows)?,
            kept,
        })
    }

    /// Same-input composition `p((y1,y2)|x) = p(y1|x) p(y2|x)`, outputs
    /// indexed with `y1` slowest.
    pub fn compose_same_input(&self, other: &PrivacyChannel) -> Result<PrivacyChannel> {
        if self.input_shape != other.input_shape {
            return Err(Error::Dimension(format!(
                "cannot compose channels over {:?} and {:?}",
                self.input_shape.sizes(),
                other.input_shape.sizes()
            )));
        }
        let rows = self
            .rows()
            .zip(other.rows())
            .flat_map(|(a, b)| a.iter().flat_map(move |&u| b.iter().map(move |&v| u * v)))
            .collect();
        PrivacyChannel::new(
            self.input_shape.clone(),
            self.output_size * other.output_size,
            rows,
        )
    }

    /// Independent-input composition over `X¹ × X²`:
    /// `p((y1,y2)|(x¹,x²)) = p(y1|x¹) p(y2|x²)`.
    pub fn compose_independent(&self, other: &PrivacyChannel) -> Result<PrivacyChannel> {
        let shape = self.input_shape.concat(&other.input_shape)?;
        let mut rows = Vec::with_capacity(shape.total_size() * self.output_size * other.output_size);
        for a in self.rows() {
            for b in other.rows() {
                rows.extend(a.iter().flat_map(|&u| b.iter().map(move |&v| u * v)));
            }
        }
        PrivacyChannel::new(shape, self.output_size * other.output_size, rows)
    }

    /// The same channel viewed on `self.input × extra`, ignoring the extra
    /// slots.
    pub fn ignoring_suffix(&self, extra: &UniverseShape) -> Result<PrivacyChannel> {
        self.compose_independent(&PrivacyChannel::trivial(extra.clone()))
    }

    /// The same channel viewed on `extra × self.input`, ignoring the extra
    /// slots.
    pub fn ignoring_prefix(&self, extra: &UniverseShape) -> Result<PrivacyChannel> {
        PrivacyChannel::trivial(extra.clone()).compose_independent(self)
    }

    /// One-output channel; composing with it changes nothing.
    fn trivial(shape: UniverseShape) -> PrivacyChannel {
        let n = shape.total_size();
        PrivacyChannel {
            input_shape: shape,
            output_size: 1,
            rows: vec![1.0; n],
        }
    }
}

/// `P(x_I, y)` from a flat channel matrix and a precomputed projection.
pub(crate) fn joint_io_raw(
    rows: &[f64],
    outputs: usize,
    proj: &[usize],
    sub_size: usize,
    mass: &[f64],
) -> Vec<f64> {
    let mut data = vec![0.0; sub_size * outputs];
    for (x, &px) in mass.iter().enumerate() {
        if px > 0.0 {
            let base = proj[x] * outputs;
            for (y, &w) in rows[x * outputs..(x + 1) * outputs].iter().enumerate() {
                data[base + y] += px * w;
            }
        }
    }
    data
}

/// Result of [`PrivacyChannel::induced_channel`].
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChannel {
    pub channel: PrivacyChannel,
    /// Flattened `x_I` value behind each row of `channel`.
    pub kept: Vec<usize>,
}

impl InducedChannel {
    /// Restricts a law over the full sub-universe to the kept rows, in the
    /// shape of the induced channel.
    pub fn restrict(&self, law: &JointDistribution) -> Result<JointDistribution> {
        let mass = self.kept.iter().map(|&k| law.mass()[k]).collect();
        JointDistribution::new(self.channel.input_shape().clone(), mass)
    }
}

/// Universe for general composition: `m` datasets over the same `n`
/// individuals. Slot `j * n + i` of the flattened universe holds `X_i^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixUniverse {
    individuals: usize,
    datasets: Vec<UniverseShape>,
}

impl MatrixUniverse {
    pub fn new(datasets: Vec<UniverseShape>) -> Result<Self> {
        let individuals = datasets
            .first()
            .ok_or_else(|| Error::Dimension("no datasets".into()))?
            .records();
        if let Some(j) = datasets.iter().position(|d| d.records() != individuals) {
            return Err(Error::Dimension(format!(
                "dataset {j} has {} records, dataset 0 has {individuals}",
                datasets[j].records()
            )));
        }
        Ok(MatrixUniverse {
            individuals,
            datasets,
        })
    }

    pub fn individuals(&self) -> usize {
        self.individuals
    }

    pub fn dataset_count(&self) -> usize {
        self.datasets.len()
    }

    pub fn dataset(&self, j: usize) -> &UniverseShape {
        &self.datasets[j]
    }

    pub fn full_shape(&self) -> UniverseShape {
        let sizes = self.datasets.iter().flat_map(|d| d.sizes().to_vec()).collect();
        UniverseShape::new(sizes).expect("datasets are valid shapes")
    }

    pub fn slot(&self, dataset: usize, individual: usize) -> usize {
        dataset * self.individuals + individual
    }

    /// Slots of `X^j`.
    pub fn dataset_slots(&self, dataset: usize) -> Vec<usize> {
        (0..self.individuals).map(|i| self.slot(dataset, i)).collect()
    }

    /// Slots of the column `X_i = (X_i^1, …, X_i^m)`.
    pub fn individual_slots(&self, individual: usize) -> Vec<usize> {
        (0..self.datasets.len())
            .map(|j| self.slot(j, individual))
            .collect()
    }
}
