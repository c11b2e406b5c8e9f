//! Finite-alphabet probability kernel.
//!
//! Datasets live in a product universe `X_1 × … × X_n`. Every distribution
//! over that universe is stored as a flat mass vector, indexed row-major with
//! record 0 varying slowest. All information quantities are in bits, with the
//! convention `0 · log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass vectors whose total is within this distance of 1 are silently
/// renormalized; anything further off is rejected.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Deviations below this are summation round-off and are left untouched,
/// so that re-validating an already normalized vector is the identity.
pub(crate) const RENORMALIZE_ABOVE: f64 = 1e-12;

/// `p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shape of a finite dataset universe: one alphabet size per record slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct UniverseShape {
    sizes: Vec<usize>,
    total: usize,
}

impl TryFrom<Vec<usize>> for UniverseShape {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        UniverseShape::new(sizes)
    }
}

impl From<UniverseShape> for Vec<usize> {
    fn from(shape: UniverseShape) -> Self {
        shape.sizes
    }
}

impl UniverseShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Dimension("a universe needs at least one record".into()));
        }
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Dimension(format!("alphabet of record {pos} is empty")));
        }
        let total = sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::Dimension("universe size overflows usize".into()))?;
        Ok(UniverseShape { sizes, total })
    }

    /// Single-record universe with `k` symbols.
    pub fn single(k: usize) -> Result<Self> {
        Self::new(vec![k])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of record slots `n`.
    pub fn records(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn flatten(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.sizes.len() {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, got {}",
                self.sizes.len(),
                coords.len()
            )));
        }
        let mut flat = 0usize;
        for (i, (&c, &s)) in coords.iter().zip(&self.sizes).enumerate() {
            if c >= s {
                return Err(Error::Dimension(format!(
                    "coordinate {i} is {c}, alphabet size is {s}"
                )));
            }
            flat = flat * s + c;
        }
        Ok(flat)
    }

    pub fn unflatten(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.total {
            return Err(Error::Dimension(format!(
                "flat index {flat} outside universe of size {}",
                self.total
            )));
        }
        Ok(self.unflatten_unchecked(flat))
    }

    pub(crate) fn unflatten_unchecked(&self, mut flat: usize) -> Vec<usize> {
        let mut coords = vec![0; self.sizes.len()];
        for (c, &s) in coords.iter_mut().zip(&self.sizes).rev() {
            *c = flat % s;
            flat /= s;
        }
        coords
    }

    /// Validates an index set and returns it sorted. Indices are 0-based.
    pub fn check_indices(&self, indices: &[usize]) -> Result<Vec<usize>> {
        if indices.is_empty() {
            return Err(Error::Argument("index set is empty".into()));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(Error::Argument(format!("repeated index in {indices:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.records()) {
            return Err(Error::Argument(format!(
                "record index {bad} out of range for {} records",
                self.records()
            )));
        }
        Ok(sorted)
    }

    /// Indices not in `indices`, ascending.
    pub fn complement(&self, indices: &[usize]) -> Vec<usize> {
        (0..self.records()).filter(|i| !indices.contains(i)).collect()
    }

    /// Shape of the sub-universe `∏_{i∈I} X_i`, in the order given.
    pub fn sub_shape(&self, indices: &[usize]) -> Result<UniverseShape> {
        let sorted = self.check_indices(indices)?;
        UniverseShape::new(sorted.iter().map(|&i| self.sizes[i]).collect())
    }

    /// Concatenation `self × other` (slots of `self` first).
    pub fn concat(&self, other: &UniverseShape) -> Result<UniverseShape> {
        let mut sizes = self.sizes.clone();
        sizes.extend_from_slice(&other.sizes);
        UniverseShape::new(sizes)
    }

    /// For every flat index of the full universe, the flat index of its
    /// projection onto the (sorted, validated) index set.
    pub fn projection(&self, indices: &[usize]) -> Result<Vec<usize>> {
        let sorted = self.check_indices(indices)?;
        Ok(self.projection_unchecked(&sorted))
    }

    pub(crate) fn projection_unchecked(&self, sorted: &[usize]) -> Vec<usize> {
        (0..self.total)
            .map(|flat| {
                let coords = self.unflatten_unchecked(flat);
                sorted
                    .iter()
                    .fold(0usize, |acc, &i| acc * self.sizes[i] + coords[i])
            })
            .collect()
    }
}

fn check_mass(mass: &mut [f64], expected_len: usize) -> Result<()> {
    if mass.len() != expected_len {
        return Err(Error::Dimension(format!(
            "mass vector has {} entries, universe has {expected_len}",
            mass.len()
        )));
    }
    if let Some(pos) = mass.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Normalization(format!(
            "entry {pos} is {} (must be finite and non-negative)",
            mass[pos]
        )));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization(format!("total mass is {total}")));
    }
    if (total - 1.0).abs() > RENORMALIZE_ABOVE {
        mass.iter_mut().for_each(|p| *p /= total);
    }
    Ok(())
}

/// A distribution over a flattened product universe.
///
/// Houses the adversary's knowledge `X = (X_1, …, X_n)` and every derived
/// distribution constructed from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    shape: UniverseShape,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(shape: UniverseShape, mut mass: Vec<f64>) -> Result<Self> {
        check_mass(&mut mass, shape.total_size())?;
        Ok(JointDistribution { shape, mass })
    }

    pub fn uniform(shape: UniverseShape) -> Self {
        let n = shape.total_size();
        JointDistribution {
            mass: vec![1.0 / n as f64; n],
            shape,
        }
    }

    pub fn point_mass(shape: UniverseShape, flat: usize) -> Result<Self> {
        if flat >= shape.total_size() {
            return Err(Error::Dimension(format!("flat index {flat} out of range")));
        }
        let mut mass = vec![0.0; shape.total_size()];
        mass[flat] = 1.0;
        Ok(JointDistribution { shape, mass })
    }

    /// Product `p ⊗ q` over the concatenated universe.
    pub fn product(&self, other: &JointDistribution) -> Result<Self> {
        let shape = self.shape.concat(&other.shape)?;
        let mass = self
            .mass
            .iter()
            .flat_map(|&a| other.mass.iter().map(move |&b| a * b))
            .collect();
        Ok(JointDistribution { shape, mass })
    }

    pub fn shape(&self) -> &UniverseShape {
        &self.shape
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    /// Marginal on the records in `indices` (taken in ascending order).
    pub fn marginal(&self, indices: &[usize]) -> Result<JointDistribution> {
        let sorted = self.shape.check_indices(indices)?;
        let sub = UniverseShape::new(sorted.iter().map(|&i| self.shape.sizes[i]).collect())?;
        let proj = self.shape.projection_unchecked(&sorted);
        let mut mass = vec![0.0; sub.total_size()];
        for (flat, &p) in self.mass.iter().enumerate() {
            mass[proj[flat]] += p;
        }
        Ok(JointDistribution { shape: sub, mass })
    }

    /// Probability that the records in `indices` take the values `assignment`
    /// (given in the ascending order of `indices`).
    pub fn assignment_probability(&self, indices: &[usize], assignment: &[usize]) -> Result<f64> {
        let sorted = self.shape.check_indices(indices)?;
        let sub = UniverseShape::new(sorted.iter().map(|&i| self.shape.sizes[i]).collect())?;
        let target = sub.flatten(assignment)?;
        let proj = self.shape.projection_unchecked(&sorted);
        Ok(self
            .mass
            .iter()
            .zip(&proj)
            .filter(|(_, &k)| k == target)
            .map(|(&p, _)| p)
            .sum())
    }

    /// Conditional law of the complementary records given `X_I = assignment`.
    ///
    /// When `indices` covers every record, the result lives on a one-point
    /// universe.
    pub fn conditional(&self, indices: &[usize], assignment: &[usize]) -> Result<JointDistribution> {
        let sorted = self.shape.check_indices(indices)?;
        let sub = UniverseShape::new(sorted.iter().map(|&i| self.shape.sizes[i]).collect())?;
        let target = sub.flatten(assignment)?;
        let rest = self.shape.complement(&sorted);
        let proj = self.shape.projection_unchecked(&sorted);
        let (rest_shape, rest_proj) = if rest.is_empty() {
            (UniverseShape::single(1)?, vec![0; self.shape.total_size()])
        } else {
            (
                UniverseShape::new(rest.iter().map(|&i| self.shape.sizes[i]).collect())?,
                self.shape.projection_unchecked(&rest),
            )
        };
        let mut mass = vec![0.0; rest_shape.total_size()];
        let mut total = 0.0;
        for (flat, &p) in self.mass.iter().enumerate() {
            if proj[flat] == target {
                mass[rest_proj[flat]] += p;
                total += p;
            }
        }
        if total <= 0.0 {
            return Err(Error::Conditioning(format!(
                "records {sorted:?} = {assignment:?} has probability 0"
            )));
        }
        mass.iter_mut().for_each(|p| *p /= total);
        Ok(JointDistribution {
            shape: rest_shape,
            mass,
        })
    }
}

/// A distribution over a single flat alphabet (a record marginal or an
/// output law `p(y)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDistribution {
    mass: Vec<f64>,
}

impl MarginalDistribution {
    pub fn new(mut mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Dimension("empty support".into()));
        }
        let n = mass.len();
        check_mass(&mut mass, n)?;
        Ok(MarginalDistribution { mass })
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }
}

impl From<JointDistribution> for MarginalDistribution {
    fn from(joint: JointDistribution) -> Self {
        MarginalDistribution { mass: joint.mass }
    }
}

/// Shannon entropy in bits of a mass vector.
pub fn entropy_bits(mass: &[f64]) -> f64 {
    let h = -mass.iter().map(|&p| plogp(p)).sum::<f64>();
    h.max(0.0)
}

/// Binary entropy function `H_2(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// A joint law `P(a, b)` stored as a dense row-major table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl JointMatrix {
    pub fn new(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("joint table needs non-empty axes".into()));
        }
        check_mass(&mut data, rows * cols)?;
        Ok(JointMatrix { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        JointMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }
}

/// Mutual information `I(A;B)` in bits of a joint table.
pub fn mutual_information(joint: &JointMatrix) -> f64 {
    mi_table(&joint.data, joint.rows, joint.cols)
}

/// `I(A;B)` of a row-major `rows × cols` table without validation.
pub(crate) fn mi_table(data: &[f64], rows: usize, cols: usize) -> f64 {
    let mut pa = vec![0.0; rows];
    let mut pb = vec![0.0; cols];
    for a in 0..rows {
        for b in 0..cols {
            let v = data[a * cols + b];
            pa[a] += v;
            pb[b] += v;
        }
    }
    let mut mi = 0.0;
    for a in 0..rows {
        if pa[a] <= 0.0 {
            continue;
        }
        for b in 0..cols {
            let v = data[a * cols + b];
            if v > 0.0 {
                mi += v * (v / (pa[a] * pb[b])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// A joint law `P(a, b, c)` stored row-major with `c` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl JointTensor3 {
    pub fn new(dims: [usize; 3], mut data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Dimension("joint tensor needs non-empty axes".into()));
        }
        check_mass(&mut data, dims.iter().product())?;
        Ok(JointTensor3 { dims, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let [_, nb, nc] = self.dims;
        self.data[(a * nb + b) * nc + c]
    }
}

/// Conditional mutual information `I(A;B|C) = Σ_c p(c) I(A;B | C=c)`.
pub fn conditional_mutual_information(joint: &JointTensor3) -> f64 {
    let [na, nb, nc] = joint.dims;
    let mut total = 0.0;
    let mut slice = vec![0.0; na * nb];
    for c in 0..nc {
        let mut pc = 0.0;
        for a in 0..na {
            for b in 0..nb {
                let v = joint.get(a, b, c);
                slice[a * nb + b] = v;
                pc += v;
            }
        }
        if pc <= 0.0 {
            continue;
        }
        slice.iter_mut().for_each(|v| *v /= pc);
        total += pc * mi_table(&slice, na, nb);
    }
    total.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape(s: &[usize]) -> UniverseShape {
        UniverseShape::new(s.to_vec()).unwrap()
    }

    #[test]
    fn flatten_is_row_major() {
        assert_eq!(shape(&[2, 2]).flatten(&[0, 0]).unwrap(), 0);
        assert_eq!(shape(&[2, 2]).flatten(&[1, 0]).unwrap(), 2);
        assert_eq!(shape(&[2, 3]).flatten(&[1, 2]).unwrap(), 5);
        assert_eq!(shape(&[2, 3]).unflatten(5).unwrap(), vec![1, 2]);
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        assert!(matches!(
            shape(&[2, 3]).flatten(&[0, 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(shape(&[2, 3]).flatten(&[0]), Err(Error::Dimension(_))));
        assert!(matches!(shape(&[2, 3]).unflatten(6), Err(Error::Dimension(_))));
        assert!(UniverseShape::new(vec![]).is_err());
        assert!(UniverseShape::new(vec![2, 0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits(&[0.5, 0.5]), 1.0);
        assert_eq!(entropy_bits(&[0.0, 1.0, 0.0]), 0.0);
        assert_eq!(entropy_bits(&[0.5, 0.25, 0.25]), 1.5);
        let u = JointDistribution::uniform(shape(&[2, 3, 5]));
        assert!((u.entropy() - 30f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn normalization_tolerance() {
        let d = JointDistribution::new(shape(&[2]), vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((d.mass().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            JointDistribution::new(shape(&[2]), vec![0.6, 0.5]),
            Err(Error::Normalization(_))
        ));
        assert!(JointDistribution::new(shape(&[2]), vec![1.5, -0.5]).is_err());
        assert!(JointDistribution::new(shape(&[2]), vec![1.0]).is_err());
    }

    #[test]
    fn marginal_examples() {
        let u = JointDistribution::uniform(shape(&[2, 2]));
        assert_eq!(u.marginal(&[0]).unwrap().mass(), &[0.5, 0.5]);

        let p = JointDistribution::new(shape(&[2]), vec![0.3, 0.7]).unwrap();
        let q = JointDistribution::new(shape(&[3]), vec![0.2, 0.5, 0.3]).unwrap();
        let pq = p.product(&q).unwrap();
        let m = pq.marginal(&[1]).unwrap();
        for (a, b) in m.mass().iter().zip(q.mass()) {
            assert!((a - b).abs() < 1e-15);
        }

        let corr = JointDistribution::new(shape(&[2, 2]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(corr.marginal(&[0]).unwrap().mass(), &[0.5, 0.5]);

        assert!(matches!(u.marginal(&[]), Err(Error::Argument(_))));
        assert!(matches!(u.marginal(&[2]), Err(Error::Argument(_))));
        assert!(matches!(u.marginal(&[0, 0]), Err(Error::Argument(_))));
    }

    #[test]
    fn conditional_examples() {
        let p = JointDistribution::new(shape(&[2]), vec![0.3, 0.7]).unwrap();
        let q = JointDistribution::new(shape(&[3]), vec![0.2, 0.5, 0.3]).unwrap();
        let pq = p.product(&q).unwrap();
        let c = pq.conditional(&[0], &[1]).unwrap();
        for (a, b) in c.mass().iter().zip(q.mass()) {
            assert!((a - b).abs() < 1e-15);
        }

        let corr = JointDistribution::new(shape(&[2, 2]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(corr.conditional(&[0], &[0]).unwrap().mass(), &[1.0, 0.0]);

        let skew = JointDistribution::new(shape(&[2, 2]), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            skew.conditional(&[0], &[1]),
            Err(Error::Conditioning(_))
        ));

        let full = corr.conditional(&[0, 1], &[1, 1]).unwrap();
        assert_eq!(full.mass(), &[1.0]);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointMatrix::new(2, 3, vec![0.06, 0.15, 0.09, 0.14, 0.35, 0.21]).unwrap();
        assert!(mutual_information(&prod).abs() < 1e-12);

        let diag = JointMatrix::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(mutual_information(&diag), 1.0);

        // uniform input through a BSC(0.11); oracle 1 - H2(0.11)
        let e = 0.11;
        let bsc = JointMatrix::new(2, 2, vec![(1.0 - e) / 2.0, e / 2.0, e / 2.0, (1.0 - e) / 2.0]).unwrap();
        let oracle = 1.0 + e * e.log2() + (1.0 - e) * (1.0 - e).log2();
        assert!((mutual_information(&bsc) - oracle).abs() < 1e-12);
        assert!((oracle - 0.5001).abs() < 1e-4);
    }

    #[test]
    fn conditional_mutual_information_examples() {
        // Markov A - C - B: p(a,b,c) = p(c) p(a|c) p(b|c)
        let pc = [0.4, 0.6];
        let pa_c = [[0.9, 0.1], [0.2, 0.8]];
        let pb_c = [[0.3, 0.7], [0.6, 0.4]];
        let mut data = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    data[(a * 2 + b) * 2 + c] = pc[c] * pa_c[c][a] * pb_c[c][b];
                }
            }
        }
        let markov = JointTensor3::new([2, 2, 2], data).unwrap();
        assert!(conditional_mutual_information(&markov).abs() < 1e-12);

        // C constant: I(A;B|C) = I(A;B)
        let ab = [0.35, 0.15, 0.05, 0.45];
        let t = JointTensor3::new([2, 2, 1], ab.to_vec()).unwrap();
        let m = JointMatrix::new(2, 2, ab.to_vec()).unwrap();
        assert!((conditional_mutual_information(&t) - mutual_information(&m)).abs() < 1e-15);
    }

    fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("all zero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn flatten_roundtrip(sizes in prop::collection::vec(1usize..5, 1..5), seed in 0usize..10_000) {
            let s = UniverseShape::new(sizes).unwrap();
            let flat = seed % s.total_size();
            let coords = s.unflatten(flat).unwrap();
            prop_assert_eq!(s.flatten(&coords).unwrap(), flat);
        }

        #[test]
        fn mi_bounded_by_entropies(p in simplex(12)) {
            let m = JointMatrix::new(3, 4, p).unwrap();
            let mi = mutual_information(&m);
            let ha = entropy_bits(&m.row_marginal());
            let hb = entropy_bits(&m.col_marginal());
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= ha.min(hb) + 1e-9);
        }

        #[test]
        fn chain_rule(p in simplex(8)) {
            // axes (a, c, b): I(A,C;B) = I(A;B) + I(C;B|A)
            let at = |a: usize, c: usize, b: usize| p[(a * 2 + c) * 2 + b];
            let acb = JointMatrix::new(4, 2, p.clone()).unwrap();
            let ab: Vec<f64> = (0..2).flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| at(a, 0, b) + at(a, 1, b)).collect();
            let ab = JointMatrix::new(2, 2, ab).unwrap();
            // tensor ordered (c, b, a) for I(C;B|A)
            let cba: Vec<f64> = (0..2).flat_map(|c| (0..2).flat_map(move |b| (0..2).map(move |a| (c, b, a))))
                .map(|(c, b, a)| at(a, c, b)).collect();
            let cba = JointTensor3::new([2, 2, 2], cba).unwrap();
            let lhs = mutual_information(&acb);
            let rhs = mutual_information(&ab) + conditional_mutual_information(&cba);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn marginal_conditional_reconstruct(p in simplex(12)) {
            let j = JointDistribution::new(UniverseShape::new(vec![2, 3, 2]).unwrap(), p).unwrap();
            let idx = [0usize, 2];
            let m = j.marginal(&idx).unwrap();
            for a in 0..2 {
                for c in 0..2 {
                    let pm = m.mass()[a * 2 + c];
                    if pm <= 0.0 { continue; }
                    let cond = j.conditional(&idx, &[a, c]).unwrap();
                    for b in 0..3 {
                        let flat = j.shape().flatten(&[a, b, c]).unwrap();
                        prop_assert!((j.mass()[flat] - pm * cond.mass()[b]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
