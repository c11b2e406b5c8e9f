//! Constructive chain-rule decompositions of group and composed leakage.
//!
//! Each `verify_*` function builds the explicit adversary knowledges used to
//! split a mutual information into per-branch terms, evaluates every term as
//! an ordinary `I(·;·)` under its own knowledge, and reports how far the
//! weighted sum lands from the left-hand side. The identities are exact, so
//! the residual measures floating-point error only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::information;
use crate::channel::{InducedChannel, MatrixUniverse, PrivacyChannel};
use crate::error::{Error, Result};
use crate::prob::{mutual_information, JointDistribution, JointMatrix, UniverseShape};
use crate::sampling::{random_channel, random_joint, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Group,
    Basic,
    General,
}

impl Lemma {
    pub fn name(&self) -> &'static str {
        match self {
            Lemma::Group => "group",
            Lemma::Basic => "basic",
            Lemma::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub weight: f64,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialDescriptor {
    pub channels: Vec<String>,
    pub seed: Option<u64>,
    pub trial: Option<u64>,
    /// Index sets the lemma splits, 0-based.
    pub indices: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub lemma: Lemma,
    pub lhs: f64,
    pub terms: Vec<Term>,
    pub residual: f64,
    /// Branches with zero probability, left out of the sum.
    pub skipped: usize,
    pub trial: TrialDescriptor,
}

impl DecompositionReport {
    fn assemble(lemma: Lemma, lhs: f64, terms: Vec<Term>, skipped: usize, trial: TrialDescriptor) -> Self {
        let mut report = DecompositionReport {
            lemma,
            lhs,
            terms,
            residual: 0.0,
            skipped,
            trial,
        };
        report.residual = report.recompute_residual();
        report
    }

    pub fn rhs(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.bits).sum()
    }

    pub fn recompute_residual(&self) -> f64 {
        (self.lhs - self.rhs()).abs()
    }
}

/// The knowledge `q` with `x_{I₁}` fixed to `assignment` and the remaining
/// records distributed as `p(x_{(I₁)} | x_{I₁} = assignment)`.
pub fn condition_on_records(
    p: &JointDistribution,
    indices: &[usize],
    assignment: &[usize],
) -> Result<JointDistribution> {
    let shape = p.shape();
    let sorted = shape.check_indices(indices)?;
    if assignment.len() != indices.len() {
        return Err(Error::Dimension(format!(
            "{} indices but {} assigned values",
            indices.len(),
            assignment.len()
        )));
    }
    // assignment follows the caller's index order
    let wanted: Vec<(usize, usize)> = indices.iter().copied().zip(assignment.iter().copied()).collect();
    if let Some(&(i, v)) = wanted.iter().find(|&&(i, v)| v >= shape.sizes()[i]) {
        return Err(Error::Dimension(format!(
            "value {v} outside alphabet of record {i}"
        )));
    }
    let mut mass = vec![0.0; shape.total_size()];
    let mut total = 0.0;
    for (flat, &px) in p.mass().iter().enumerate() {
        if px > 0.0 {
            let coords = shape.unflatten_unchecked(flat);
            if wanted.iter().all(|&(i, v)| coords[i] == v) {
                mass[flat] = px;
                total += px;
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::Conditioning(format!(
            "records {sorted:?} = {assignment:?} has probability zero"
        )));
    }
    mass.iter_mut().for_each(|m| *m /= total);
    JointDistribution::new(shape.clone(), mass)
}

/// Bayes update of `p` on observing `y` from `ch`:
/// `q(x) = p(x) ch(y|x) / p(y)`.
pub fn posterior_update(p: &JointDistribution, ch: &PrivacyChannel, y: usize) -> Result<JointDistribution> {
    if p.shape() != ch.input_shape() {
        return Err(Error::Dimension(format!(
            "knowledge over {:?}, channel over {:?}",
            p.shape().sizes(),
            ch.input_shape().sizes()
        )));
    }
    if y >= ch.output_size() {
        return Err(Error::Dimension(format!(
            "output {y} outside alphabet of {}",
            ch.output_size()
        )));
    }
    let mut mass: Vec<f64> = p
        .mass()
        .iter()
        .enumerate()
        .map(|(x, &px)| px * ch.row(x)[y])
        .collect();
    let py: f64 = mass.iter().sum();
    if py <= 0.0 {
        return Err(Error::Conditioning(format!("output {y} has probability zero")));
    }
    mass.iter_mut().for_each(|m| *m /= py);
    JointDistribution::new(p.shape().clone(), mass)
}

fn coords_label(coords: &[usize]) -> String {
    coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// `I(X_{I₁∪I₂};Y) = I(X_{I₁};Y) + Σ_{x_{I₁}} p(x_{I₁}) I(X_{I₂};Y)` where each
/// summand is evaluated under [`condition_on_records`].
pub fn verify_group_decomposition(
    ch: &PrivacyChannel,
    p: &JointDistribution,
    first: &[usize],
    second: &[usize],
) -> Result<DecompositionReport> {
    let shape = ch.input_shape();
    let first = shape.check_indices(first)?;
    let second = shape.check_indices(second)?;
    if first.iter().any(|i| second.contains(i)) {
        return Err(Error::Argument(format!(
            "index sets {first:?} and {second:?} overlap"
        )));
    }
    let union = {
        let mut u = [first.clone(), second.clone()].concat();
        u.sort_unstable();
        u
    };
    let lhs = information(ch, &union, p)?;
    let mut terms = vec![Term {
        label: "I(X_I1;Y)".into(),
        weight: 1.0,
        bits: information(ch, &first, p)?,
    }];
    let sub = shape.sub_shape(&first)?;
    let marg = p.marginal(&first)?;
    let mut skipped = 0;
    for a in 0..sub.total_size() {
        let weight = marg.mass()[a];
        let assignment = sub.unflatten_unchecked(a);
        if weight <= 0.0 {
            skipped += 1;
            continue;
        }
        let q = condition_on_records(p, &first, &assignment)?;
        terms.push(Term {
            label: format!("I(X_I2;Y | x_I1={})", coords_label(&assignment)),
            weight,
            bits: information(ch, &second, &q)?,
        });
    }
    let trial = TrialDescriptor {
        indices: vec![first, second],
        ..Default::default()
    };
    Ok(DecompositionReport::assemble(
        Lemma::Group,
        lhs,
        terms,
        skipped,
        trial,
    ))
}

/// `I(X_i;Y₁,Y₂) = I(X_i;Y₂) + Σ_{y₂} p(y₂) I(X_i;Y₁)` with each summand
/// evaluated under the posterior [`posterior_update`] on `y₂`.
pub fn verify_basic_decomposition(
    first: &PrivacyChannel,
    second: &PrivacyChannel,
    p: &JointDistribution,
    i: usize,
) -> Result<DecompositionReport> {
    let composed = first.compose_same_input(second)?;
    let lhs = information(&composed, &[i], p)?;
    let mut terms = vec![Term {
        label: "I(X_i;Y2)".into(),
        weight: 1.0,
        bits: information(second, &[i], p)?,
    }];
    let py = second.output_distribution(p)?;
    let mut skipped = 0;
    for (y, &weight) in py.mass().iter().enumerate() {
        if weight <= 0.0 {
            skipped += 1;
            continue;
        }
        let q = posterior_update(p, second, y)?;
        terms.push(Term {
            label: format!("I(X_i;Y1 | y2={y})"),
            weight,
            bits: information(first, &[i], &q)?,
        });
    }
    let trial = TrialDescriptor {
        indices: vec![vec![i]],
        ..Default::default()
    };
    Ok(DecompositionReport::assemble(
        Lemma::Basic,
        lhs,
        terms,
        skipped,
        trial,
    ))
}

/// `I(X_i^j;Y)` where `Y` is the output of a cross channel induced onto
/// dataset `j` and `law` is the knowledge of that dataset.
fn cross_information(
    induced: &InducedChannel,
    law: &JointDistribution,
    dataset: &UniverseShape,
    i: usize,
) -> f64 {
    let outputs = induced.channel.output_size();
    let size = dataset.sizes()[i];
    let mut data = vec![0.0; size * outputs];
    for (row, &flat) in induced.kept.iter().enumerate() {
        let px = law.mass()[flat];
        if px > 0.0 {
            let v = dataset.unflatten_unchecked(flat)[i];
            for (y, &w) in induced.channel.row(row).iter().enumerate() {
                data[v * outputs + y] += px * w;
            }
        }
    }
    mutual_information(&JointMatrix::new(size, outputs, data).expect("joint of a valid law"))
}

/// Four-term expansion of `I(X_i;Y₁,Y₂)` for two channels queried on two
/// coupled datasets, `X_i = (X_i¹, X_i²)`:
///
/// 1. `I(X_i¹;Y₁)`;
/// 2. `Σ_{x_i¹} p(x_i¹) I(X_i²;Y₁)` through the cross channel `p(y₁|x²)`
///    under the knowledge conditioned on `x_i¹`;
/// 3. `Σ_{y₁} p(y₁) I(X_i¹;Y₂)` through the cross channel `p(y₂|x¹)` under
///    the posterior on `y₁`;
/// 4. `Σ_{y₁} p(y₁) Σ_{x_i¹} p(x_i¹|y₁) I(X_i²;Y₂)` through `ch₂` itself under
///    the knowledge conditioned on `x_i¹` and then updated on `y₁`.
///
/// The weight of the last group is the posterior `p(x_i¹|y₁)`; with the prior
/// weight the sum is not an identity unless `X_i¹ ⊥ Y₁`.
pub fn verify_general_decomposition(
    first: &PrivacyChannel,
    second: &PrivacyChannel,
    p: &JointDistribution,
    i: usize,
) -> Result<DecompositionReport> {
    let universe = MatrixUniverse::new(vec![first.input_shape().clone(), second.input_shape().clone()])?;
    let full = universe.full_shape();
    if p.shape() != &full {
        return Err(Error::Dimension(format!(
            "coupling over {:?}, datasets span {:?}",
            p.shape().sizes(),
            full.sizes()
        )));
    }
    if i >= universe.individuals() {
        return Err(Error::Argument(format!(
            "individual {i} out of range for {} individuals",
            universe.individuals()
        )));
    }
    let (s1, s2) = (universe.slot(0, i), universe.slot(1, i));
    let (d1, d2) = (universe.dataset_slots(0), universe.dataset_slots(1));
    let lifted1 = first.ignoring_suffix(universe.dataset(1))?;
    let lifted2 = second.ignoring_prefix(universe.dataset(0))?;
    let composed = first.compose_independent(second)?;

    let lhs = information(&composed, &[s1, s2], p)?;
    let mut terms = vec![Term {
        label: "I(X_i^1;Y1)".into(),
        weight: 1.0,
        bits: information(&lifted1, &[s1], p)?,
    }];
    let mut skipped = 0;

    let pa = p.marginal(&[s1])?;
    for (a, &weight) in pa.mass().iter().enumerate() {
        if weight <= 0.0 {
            skipped += 1;
            continue;
        }
        let q = condition_on_records(p, &[s1], &[a])?;
        let cross = lifted1.induced_channel(&q, &d2)?;
        terms.push(Term {
            label: format!("I(X_i^2;Y1 | x_i^1={a})"),
            weight,
            bits: cross_information(&cross, &q.marginal(&d2)?, universe.dataset(1), i),
        });
    }

    let py1 = lifted1.output_distribution(p)?;
    for (y1, &weight) in py1.mass().iter().enumerate() {
        if weight <= 0.0 {
            skipped += 1;
            continue;
        }
        let q = posterior_update(p, &lifted1, y1)?;
        let cross = lifted2.induced_channel(&q, &d1)?;
        terms.push(Term {
            label: format!("I(X_i^1;Y2 | y1={y1})"),
            weight,
            bits: cross_information(&cross, &q.marginal(&d1)?, universe.dataset(0), i),
        });
    }

    for (y1, &py) in py1.mass().iter().enumerate() {
        for (a, &pa_prior) in pa.mass().iter().enumerate() {
            if py <= 0.0 || pa_prior <= 0.0 {
                skipped += 1;
                continue;
            }
            let conditioned = condition_on_records(p, &[s1], &[a])?;
            let q = match posterior_update(&conditioned, &lifted1, y1) {
                Ok(q) => q,
                Err(Error::Conditioning(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            // p(x_i¹ = a | y₁) = p(a) p(y₁|a) / p(y₁)
            let py_given_a = lifted1.output_distribution(&conditioned)?.mass()[y1];
            terms.push(Term {
                label: format!("I(X_i^2;Y2 | y1={y1}, x_i^1={a})"),
                weight: py * (pa_prior * py_given_a / py),
                bits: information(second, &[i], &q.marginal(&d2)?)?,
            });
        }
    }

    let trial = TrialDescriptor {
        indices: vec![vec![s1, s2]],
        ..Default::default()
    };
    Ok(DecompositionReport::assemble(
        Lemma::General,
        lhs,
        terms,
        skipped,
        trial,
    ))
}

fn tagged(mut report: DecompositionReport, seed: u64, trial: u64, channels: &[&str]) -> DecompositionReport {
    report.trial.seed = Some(seed);
    report.trial.trial = Some(trial);
    report.trial.channels = channels.iter().map(|c| c.to_string()).collect();
    report
}

/// One seeded instance of a lemma on binary alphabets: Dirichlet(1)
/// knowledge and channel rows. Group trials use two records and 2 or 3
/// outputs; basic trials two records and two binary-output channels; general
/// trials one individual per dataset.
pub fn random_trial(lemma: Lemma, seed: u64, trial: u64) -> Result<DecompositionReport> {
    let mut rng = stream_rng(seed, trial);
    let binary = UniverseShape::new(vec![2, 2])?;
    match lemma {
        Lemma::Group => {
            let outputs = 2 + (trial % 2) as usize;
            let ch = random_channel(&mut rng, &binary, outputs)?;
            let p = random_joint(&mut rng, &binary);
            let r = verify_group_decomposition(&ch, &p, &[0], &[1])?;
            Ok(tagged(r, seed, trial, &["random"]))
        }
        Lemma::Basic => {
            let ch1 = random_channel(&mut rng, &binary, 2)?;
            let ch2 = random_channel(&mut rng, &binary, 2)?;
            let p = random_joint(&mut rng, &binary);
            let r = verify_basic_decomposition(&ch1, &ch2, &p, (trial % 2) as usize)?;
            Ok(tagged(r, seed, trial, &["random", "random"]))
        }
        Lemma::General => {
            let one = UniverseShape::single(2)?;
            let ch1 = random_channel(&mut rng, &one, 2)?;
            let ch2 = random_channel(&mut rng, &one, 2)?;
            let p = random_joint(&mut rng, &binary);
            let r = verify_general_decomposition(&ch1, &ch2, &p, 0)?;
            Ok(tagged(r, seed, trial, &["random", "random"]))
        }
    }
}

/// `trials` seeded instances, in trial order.
pub fn random_suite(lemma: Lemma, trials: usize, seed: u64) -> Vec<Result<DecompositionReport>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| random_trial(lemma, seed, t))
        .collect()
}
