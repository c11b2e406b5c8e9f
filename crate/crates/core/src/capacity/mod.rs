//! Individual and group channel capacities.
//!
//! The capacity of a channel towards the records `I` over a set `Δ` of
//! adversary knowledges is `max_{X∈Δ} I(X_I;Y)`. Three estimators are
//! provided, all returning a certified bracket `[lower, upper]` around the
//! true maximum:
//!
//! * [`Method::ExactEnumBa`]: unconstrained sets only. For a fixed `p(x_I)`
//!   the information is convex in the mixed rows `p(y|x_I)`, which are linear
//!   in `p(x_{(I)}|x_I)`, so the maximum sits at a deterministic completion
//!   `g: X_I → X_{(I)}`. Enumerating `g` and running Blahut–Arimoto on each
//!   induced channel is exact up to the Blahut–Arimoto bracket.
//! * [`Method::Grid`]: brute force over the lattice `counts / G` of the
//!   joint simplex, with an upper bound from entropy continuity.
//! * [`Method::MirrorAscent`]: exponentiated-gradient ascent with an entropy
//!   penalty, for instances too large for the other two.

mod blahut;
mod exact;
mod grid;
mod mirror;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};
use crate::prob::{mutual_information, JointDistribution};

pub use blahut::{blahut_arimoto, blahut_arimoto_matrix, BlahutArimoto};
pub use exact::{exact_capacity, individual_capacity_unconstrained};
pub use grid::{
    capacity_grid_oracle, composition_count, default_resolution, entropy_continuity, GridCertificate,
    GridTable,
};
pub use mirror::{capacity_mirror_ascent, information_gradient, information_objective};

/// Slack allowed on `H(X) >= b` before a candidate is treated as infeasible.
pub const ENTROPY_FEASIBILITY_TOL: f64 = 1e-12;

/// Values within this distance of the best are ties, broken by the
/// lexicographically smallest attaining mass vector.
pub const TIE_TOL: f64 = 1e-12;

/// The adversary knowledge set: all of `ℙ`, or `ℙ_b = {X : H(X) >= b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum KnowledgeSet {
    Unconstrained,
    EntropyLowerBound { b: f64 },
}

impl KnowledgeSet {
    pub fn min_entropy(&self) -> f64 {
        match self {
            KnowledgeSet::Unconstrained => 0.0,
            KnowledgeSet::EntropyLowerBound { b } => *b,
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.min_entropy() <= 0.0
    }

    pub fn from_b(b: f64) -> Self {
        if b <= 0.0 {
            KnowledgeSet::Unconstrained
        } else {
            KnowledgeSet::EntropyLowerBound { b }
        }
    }

    /// Checks `0 <= b <= log2 |X|`.
    pub fn validate(&self, universe_size: usize) -> Result<()> {
        let b = self.min_entropy();
        let max = (universe_size as f64).log2();
        if !b.is_finite() || b < 0.0 || b > max + ENTROPY_FEASIBILITY_TOL {
            return Err(Error::Parameter(format!(
                "entropy bound {b} outside [0, log2 |X| = {max}]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    ExactEnumBa,
    MirrorAscent,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::ExactEnumBa => "exact_enum_ba",
            Method::MirrorAscent => "mirror_ascent",
        }
    }
}

/// `[lower, upper]` in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A capacity value with the input attaining it and a certified bracket.
///
/// `value` equals `error_bracket.lower`, which is the information actually
/// attained at `attaining_input`; `error_bracket.upper` bounds the true
/// maximum from above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub attaining_input: JointDistribution,
    /// Records of the maximizing index set (0-based).
    pub target: Vec<usize>,
    pub method: Method,
    pub knowledge: KnowledgeSet,
    pub error_bracket: Bracket,
    /// Set when the upper bound is only the trivial `min(log|X_I|, log|Y|)`.
    pub heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCertificate>,
}

impl CapacityEstimate {
    pub fn lower(&self) -> f64 {
        self.error_bracket.lower
    }

    pub fn upper(&self) -> f64 {
        self.error_bracket.upper
    }
}

/// Solver limits and defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    /// Grid resolution `G`; `None` picks [`default_resolution`].
    pub grid_resolution: Option<usize>,
    /// Maximum number of lattice points the grid oracle will visit.
    pub grid_cap: f64,
    /// Maximum number of deterministic completions to enumerate.
    pub enumeration_cap: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Blahut–Arimoto stops once `upper - lower` is below this.
    pub ba_tol: f64,
    pub ba_max_iter: usize,
    /// Let mirror ascent certify its upper bound with the grid or the
    /// enumeration when they are within their caps.
    pub certify_mirror: bool,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            grid_resolution: None,
            grid_cap: 5e6,
            enumeration_cap: 1e6,
            restarts: 8,
            seed: 0,
            ba_tol: 1e-10,
            ba_max_iter: 1_000_000,
            certify_mirror: true,
        }
    }
}

/// `I(X_I;Y)` for the channel fed with `input`.
pub fn information(ch: &PrivacyChannel, indices: &[usize], input: &JointDistribution) -> Result<f64> {
    Ok(mutual_information(&ch.joint_io(input, indices)?))
}

/// `min(log2 |X_I|, log2 |Y|)`, an upper bound on any `I(X_I;Y)`.
pub fn trivial_bound(ch: &PrivacyChannel, indices: &[usize]) -> Result<f64> {
    let sub = ch.input_shape().sub_shape(indices)?;
    Ok((sub.total_size() as f64)
        .log2()
        .min((ch.output_size() as f64).log2()))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

/// `true` when `(value, mass)` beats the incumbent under the tie rule.
pub(crate) fn improves(value: f64, mass: &[f64], best_value: f64, best_mass: &[f64]) -> bool {
    value > best_value + TIE_TOL || ((value - best_value).abs() <= TIE_TOL && lex_less(mass, best_mass))
}

/// Max over several estimates: best lower (tie rule), largest upper.
pub(crate) fn combine_max(estimates: Vec<CapacityEstimate>) -> Option<CapacityEstimate> {
    let upper = estimates
        .iter()
        .map(|e| e.upper())
        .fold(f64::NEG_INFINITY, f64::max);
    let heuristic = estimates.iter().any(|e| e.heuristic);
    let mut best: Option<CapacityEstimate> = None;
    for e in estimates {
        let replace = match &best {
            None => true,
            Some(b) => improves(
                e.value,
                e.attaining_input.mass(),
                b.value,
                b.attaining_input.mass(),
            ),
        };
        if replace {
            best = Some(e);
        }
    }
    best.map(|mut b| {
        b.error_bracket.upper = upper.max(b.error_bracket.lower);
        b.heuristic = heuristic;
        b
    })
}

/// Capacity towards the best of several index sets.
pub fn capacity_over_targets(
    ch: &PrivacyChannel,
    targets: &[Vec<usize>],
    ks: KnowledgeSet,
    method: Method,
    config: &CapacityConfig,
) -> Result<CapacityEstimate> {
    if targets.is_empty() {
        return Err(Error::Argument("no target index sets".into()));
    }
    ks.validate(ch.inputs())?;
    if let Some(e) = uniform_only(ch, targets, ks, method)? {
        return Ok(e);
    }
    let estimates = match method {
        Method::Grid => {
            let g = config
                .grid_resolution
                .unwrap_or_else(|| default_resolution(ch.inputs(), config.grid_cap));
            let table = GridTable::build(ch, targets, g, config.grid_cap)?;
            (0..targets.len())
                .map(|t| table.best(t, ks))
                .collect::<Result<Vec<_>>>()?
        }
        Method::ExactEnumBa => {
            if !ks.is_unconstrained() {
                return Err(Error::Argument(
                    "exact enumeration only covers the unconstrained set; use grid or mirror".into(),
                ));
            }
            targets
                .iter()
                .map(|t| exact_capacity(ch, t, config))
                .collect::<Result<Vec<_>>>()?
        }
        Method::MirrorAscent => targets
            .iter()
            .map(|t| capacity_mirror_ascent(ch, t, ks, config))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(combine_max(estimates).expect("targets is non-empty"))
}

/// At `b = log2 |X|` the set `ℙ_b` holds the uniform law alone, so the
/// capacity is the information it attains, with a zero-width bracket.
fn uniform_only(
    ch: &PrivacyChannel,
    targets: &[Vec<usize>],
    ks: KnowledgeSet,
    method: Method,
) -> Result<Option<CapacityEstimate>> {
    if ks.is_unconstrained() || ks.min_entropy() < (ch.inputs() as f64).log2() {
        return Ok(None);
    }
    let uniform = JointDistribution::uniform(ch.input_shape().clone());
    let estimates = targets
        .iter()
        .map(|t| {
            let target = ch.input_shape().check_indices(t)?;
            let value = information(ch, &target, &uniform)?;
            Ok(CapacityEstimate {
                value,
                attaining_input: uniform.clone(),
                target,
                method,
                knowledge: ks,
                error_bracket: Bracket {
                    lower: value,
                    upper: value,
                },
                heuristic: false,
                grid: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_max(estimates))
}

/// Capacities towards the best of `targets` for several knowledge sets at
/// once. The grid method builds its lattice a single time; the others run
/// per set.
pub fn capacity_profile(
    ch: &PrivacyChannel,
    targets: &[Vec<usize>],
    sets: &[KnowledgeSet],
    method: Method,
    config: &CapacityConfig,
) -> Result<Vec<CapacityEstimate>> {
    if targets.is_empty() {
        return Err(Error::Argument("no target index sets".into()));
    }
    for ks in sets {
        ks.validate(ch.inputs())?;
    }
    if method != Method::Grid {
        return sets
            .par_iter()
            .map(|&ks| capacity_over_targets(ch, targets, ks, method, config))
            .collect();
    }
    let g = config
        .grid_resolution
        .unwrap_or_else(|| default_resolution(ch.inputs(), config.grid_cap));
    let table = GridTable::build(ch, targets, g, config.grid_cap)?;
    sets.par_iter()
        .map(|&ks| match uniform_only(ch, targets, ks, method)? {
            Some(e) => Ok(e),
            None => {
                let per_target = (0..targets.len())
                    .map(|t| table.best(t, ks))
                    .collect::<Result<Vec<_>>>()?;
                Ok(combine_max(per_target).expect("targets is non-empty"))
            }
        })
        .collect()
}

/// `C_1`: the individual channel capacity over all records.
pub fn individual_capacity(
    ch: &PrivacyChannel,
    ks: KnowledgeSet,
    method: Method,
    config: &CapacityConfig,
) -> Result<CapacityEstimate> {
    group_capacity(ch, 1, ks, method, config)
}

/// `C_k = max_{|I| = k} max_{X∈Δ} I(X_I;Y)`.
pub fn group_capacity(
    ch: &PrivacyChannel,
    k: usize,
    ks: KnowledgeSet,
    method: Method,
    config: &CapacityConfig,
) -> Result<CapacityEstimate> {
    let n = ch.input_shape().records();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("group size {k} not in [1, {n}]")));
    }
    capacity_over_targets(ch, &subsets(n, k), ks, method, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::Mechanism;
    use crate::prob::UniverseShape;
    use crate::sampling::{random_channel, stream_rng};

    fn xor() -> PrivacyChannel {
        Mechanism::Xor { records: 2 }.build().unwrap()
    }

    fn cfg() -> CapacityConfig {
        CapacityConfig::default()
    }

    #[test]
    fn maximal_entropy_pins_the_uniform_law() {
        for method in [Method::Grid, Method::MirrorAscent] {
            let e = individual_capacity(&xor(), KnowledgeSet::from_b(2.0), method, &cfg()).unwrap();
            assert_eq!(e.value, 0.0);
            assert_eq!(e.upper(), 0.0);
        }
    }

    #[test]
    fn profile_matches_single_runs() {
        let ch = xor();
        let sets: Vec<_> = [0.0, 0.7, 1.5, 2.0].map(KnowledgeSet::from_b).to_vec();
        let targets = subsets(2, 1);
        let profile = capacity_profile(&ch, &targets, &sets, Method::Grid, &cfg()).unwrap();
        for (ks, e) in sets.iter().zip(&profile) {
            let single = capacity_over_targets(&ch, &targets, *ks, Method::Grid, &cfg()).unwrap();
            assert_eq!(&single, e);
        }
    }

    #[test]
    fn subsets_enumerate_in_order() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 2), vec![vec![0, 1]]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn knowledge_set_range() {
        assert!(KnowledgeSet::from_b(2.0).validate(4).is_ok());
        assert!(KnowledgeSet::from_b(2.1).validate(4).is_err());
        assert!(KnowledgeSet::EntropyLowerBound { b: -0.1 }.validate(4).is_err());
        assert!(KnowledgeSet::EntropyLowerBound { b: 0.0 }.is_unconstrained());
    }

    #[test]
    fn group_capacity_examples() {
        let c1 =
            individual_capacity(&xor(), KnowledgeSet::Unconstrained, Method::ExactEnumBa, &cfg()).unwrap();
        let k1 = group_capacity(
            &xor(),
            1,
            KnowledgeSet::Unconstrained,
            Method::ExactEnumBa,
            &cfg(),
        )
        .unwrap();
        assert_eq!(c1, k1);

        let id = Mechanism::Identity {
            alphabets: vec![2, 3],
        }
        .build()
        .unwrap();
        let full = group_capacity(&id, 2, KnowledgeSet::Unconstrained, Method::ExactEnumBa, &cfg()).unwrap();
        assert!((full.value - 6f64.log2()).abs() < 1e-9);

        let c2 = group_capacity(
            &xor(),
            2,
            KnowledgeSet::Unconstrained,
            Method::ExactEnumBa,
            &cfg(),
        )
        .unwrap();
        assert!((c2.value - 1.0).abs() < 1e-9);
        let g2 = group_capacity(&xor(), 2, KnowledgeSet::Unconstrained, Method::Grid, &cfg()).unwrap();
        assert!((g2.value - 1.0).abs() < 1e-12);

        assert!(group_capacity(&xor(), 3, KnowledgeSet::Unconstrained, Method::Grid, &cfg()).is_err());
        assert!(matches!(
            group_capacity(&xor(), 1, KnowledgeSet::from_b(1.0), Method::ExactEnumBa, &cfg()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn nested_group_capacities_increase() {
        let shape = UniverseShape::new(vec![2, 2, 2]).unwrap();
        for t in 0..4 {
            let ch = random_channel(&mut stream_rng(11, t), &shape, 3).unwrap();
            let mut prev = 0.0;
            for k in 1..=3 {
                let c =
                    group_capacity(&ch, k, KnowledgeSet::Unconstrained, Method::ExactEnumBa, &cfg()).unwrap();
                assert!(c.upper() >= prev - 1e-9, "k={k}: {} < {prev}", c.upper());
                prev = c.lower();
            }
        }
    }

    #[test]
    fn estimates_reproduce_their_lower_bound() {
        let shape = UniverseShape::new(vec![2, 2]).unwrap();
        let ch = random_channel(&mut stream_rng(5, 0), &shape, 3).unwrap();
        for (ks, method) in [
            (KnowledgeSet::Unconstrained, Method::ExactEnumBa),
            (KnowledgeSet::from_b(1.2), Method::Grid),
            (KnowledgeSet::from_b(1.2), Method::MirrorAscent),
        ] {
            let e = individual_capacity(&ch, ks, method, &cfg()).unwrap();
            let again = information(&ch, &e.target, &e.attaining_input).unwrap();
            assert!((again - e.lower()).abs() < 1e-9, "{method:?}");
            assert!(e.lower() <= e.value && e.value <= e.upper());
            assert!(e.attaining_input.entropy() >= ks.min_entropy() - 1e-9);
        }
    }
}
