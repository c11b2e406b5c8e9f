use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    balance_at, constrained_group_capacity, AnalysisConfig, BalanceProfile, Interval, TheoremReport,
    TheoremTag, TheoremTrial, Verdict,
};
use crate::capacity::{information, KnowledgeSet, ENTROPY_FEASIBILITY_TOL};
use crate::channel::{MatrixUniverse, PrivacyChannel};
use crate::error::{Error, Result};
use crate::prob::JointDistribution;
use crate::sampling::{dirichlet_uniform, random_joint, stream_rng};

/// Draws per trial before a coupling family is declared unable to reach
/// the entropy bound.
const MAX_REJECTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointOutcome {
    StrictlyBelow,
    BoundaryEquality,
    Exceeds,
    Inconclusive,
}

/// `δ(log2 |X|)` against `min(log2 |X|, max_i log2 |X_i|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointFinding {
    pub b: f64,
    pub delta: Interval,
    pub bound: f64,
    pub outcome: EndpointOutcome,
}

fn endpoint_finding(profile: &BalanceProfile, tol: f64) -> Option<EndpointFinding> {
    let last = profile.points.last()?;
    let widest = profile
        .universe
        .iter()
        .map(|&s| (s as f64).log2())
        .fold(0.0, f64::max);
    let bound = last.b.min(widest);
    let d = last.delta;
    let outcome = if d.upper < bound - tol {
        EndpointOutcome::StrictlyBelow
    } else if d.lower > bound + tol {
        EndpointOutcome::Exceeds
    } else if (d.lower - bound).abs() <= tol && (d.upper - bound).abs() <= tol {
        EndpointOutcome::BoundaryEquality
    } else {
        EndpointOutcome::Inconclusive
    };
    Some(EndpointFinding {
        b: last.b,
        delta: d,
        bound,
        outcome,
    })
}

/// Checks that `δ(0) = 0` and that `δ` is non-decreasing along the grid.
///
/// A step holds when the point values and both bracket ends are each
/// non-decreasing within `tol`; it is violated only when the brackets leave
/// no room for a non-decreasing function (`δ_t.lower > δ_{t+1}.upper`). The
/// endpoint comparison is recorded under `details.endpoint` and never
/// affects the verdicts.
pub fn check_monotonicity(profile: &BalanceProfile, tol: f64) -> TheoremReport {
    let mut report = TheoremReport::new(TheoremTag::Monotonicity, vec![profile.channel.clone()], None, tol);
    if let Some(first) = profile.points.first() {
        let t = TheoremTrial::new(
            format!("delta({}) = 0", first.b),
            first.delta,
            Interval::exact(0.0),
            tol,
        );
        let verdict = if first.b == 0.0 && first.delta.lower >= -tol {
            t.verdict
        } else {
            Verdict::Violated
        };
        report.push(TheoremTrial { verdict, ..t });
    }
    for w in profile.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let mut t = TheoremTrial::new(format!("b={} -> b={}", a.b, b.b), a.delta, b.delta, tol);
        t.verdict = if a.delta.lower > b.delta.upper + tol {
            Verdict::Violated
        } else if b.delta.value >= a.delta.value - tol
            && b.delta.lower >= a.delta.lower - tol
            && b.delta.upper >= a.delta.upper - tol
        {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        report.push(t);
    }
    if let Some(e) = endpoint_finding(profile, tol) {
        report.detail("endpoint", e);
    }
    report
}

/// `C_1^ℙ <= ε` against `C_1^{ℙ_b} <= ε - δ(b)`, for each `ε`.
///
/// Both statements are decided on point values with tolerance `tol`; a
/// trial holds when they agree and is violated when they disagree. The
/// trial's brackets compare `C_1^{ℙ_b}` with `ε - δ(b)`.
pub fn check_equivalence(
    ch: &PrivacyChannel,
    channel_id: &str,
    b: f64,
    epsilons: &[f64],
    config: &AnalysisConfig,
) -> Result<TheoremReport> {
    let bal = balance_at(ch, b, config)?;
    let mut report = TheoremReport::new(
        TheoremTag::Equivalence,
        vec![channel_id.into()],
        Some(b),
        config.tol,
    );
    report.detail("unconstrained", bal.unconstrained);
    report.detail("delta", bal.delta);
    for &eps in epsilons {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Parameter(format!("epsilon {eps} must be non-negative")));
        }
        let d = bal.delta;
        let rhs = Interval {
            lower: eps - d.upper,
            value: eps - d.value,
            upper: eps - d.lower,
        };
        let private = bal.unconstrained.value <= eps + config.tol;
        let balanced = bal.constrained.value <= eps - d.value + config.tol;
        let mut t = TheoremTrial::new(format!("eps={eps}"), bal.constrained, rhs, config.tol)
            .detail("eps", eps)
            .detail("private_over_p", private)
            .detail("private_over_pb", balanced);
        t.verdict = if private == balanced {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        report.push(t);
    }
    Ok(report)
}

/// `C_k^{ℙ_b} <= k (ε + δ(b))` with `ε = C_1^{ℙ_b}`, for `k = 1..=k_max`.
pub fn check_group_privacy(
    ch: &PrivacyChannel,
    channel_id: &str,
    b: f64,
    k_max: usize,
    config: &AnalysisConfig,
) -> Result<TheoremReport> {
    let n = ch.input_shape().records();
    if k_max == 0 || k_max > n {
        return Err(Error::Argument(format!(
            "k range 1..={k_max} not within [1, {n}]"
        )));
    }
    let bal = balance_at(ch, b, config)?;
    let eps = bal.constrained;
    let mut report = TheoremReport::new(TheoremTag::Group, vec![channel_id.into()], Some(b), config.tol);
    report.detail("eps", eps);
    report.detail("delta", bal.delta);
    for k in 1..=k_max {
        let lhs = if k == 1 {
            eps
        } else {
            constrained_group_capacity(ch, k, b, config)?
        };
        // ε + δ is C_1^ℙ by definition; its bracket is the unconstrained one
        let per_record = Interval {
            value: eps.value + bal.delta.value,
            ..bal.unconstrained
        };
        let rhs = per_record.scale(k as f64);
        report.push(TheoremTrial::new(format!("k={k}"), lhs, rhs, config.tol).detail("k", k));
    }
    Ok(report)
}

/// `C_1^{ℙ_b}(Y_1, …, Y_m) <= Σ_j (ε_j + δ_j(b))` for channels queried on the
/// same dataset.
pub fn check_basic_composition(
    channels: &[PrivacyChannel],
    ids: &[String],
    b: f64,
    config: &AnalysisConfig,
) -> Result<TheoremReport> {
    let (first, rest) = channels
        .split_first()
        .ok_or_else(|| Error::Argument("composition needs at least one channel".into()))?;
    let composed = rest
        .iter()
        .try_fold(first.clone(), |acc, ch| acc.compose_same_input(ch))?;
    let lhs = balance_at(&composed, b, config)?.constrained;
    let parts = channels
        .iter()
        .map(|ch| balance_at(ch, b, config))
        .collect::<Result<Vec<_>>>()?;
    let mut rhs = Interval::exact(0.0);
    for p in &parts {
        rhs = rhs.add(&Interval {
            value: p.constrained.value + p.delta.value,
            ..p.unconstrained
        });
    }
    let mut report = TheoremReport::new(TheoremTag::BasicComp, ids.to_vec(), Some(b), config.tol);
    report.detail("eps", parts.iter().map(|p| p.constrained).collect::<Vec<_>>());
    report.detail("delta", parts.iter().map(|p| p.delta).collect::<Vec<_>>());
    report.push(TheoremTrial::new(
        format!("m={}", channels.len()),
        lhs,
        rhs,
        config.tol,
    ));
    Ok(report)
}

/// How the two datasets of a general composition depend on each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingFamily {
    /// `X¹ ⊥ X²`, each Dirichlet(1).
    Product,
    /// Dirichlet(1) over the whole matrix universe.
    Dirichlet,
    /// `X² = X¹` with `X¹` Dirichlet(1); needs equal dataset shapes.
    Correlated,
}

impl CouplingFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingFamily::Product => "product",
            CouplingFamily::Dirichlet => "dirichlet",
            CouplingFamily::Correlated => "correlated",
        }
    }
}

fn draw_coupling<R: Rng + ?Sized>(
    family: CouplingFamily,
    universe: &MatrixUniverse,
    rng: Option<&mut R>,
) -> Result<JointDistribution> {
    let (s1, s2) = (universe.dataset(0), universe.dataset(1));
    let law = |rng: Option<&mut R>, size: usize| match rng {
        Some(r) => dirichlet_uniform(r, size),
        None => vec![1.0 / size as f64; size],
    };
    match family {
        CouplingFamily::Product => {
            let mut rng = rng;
            let a = law(rng.as_deref_mut(), s1.total_size());
            let b = law(rng, s2.total_size());
            JointDistribution::new(s1.clone(), a)?.product(&JointDistribution::new(s2.clone(), b)?)
        }
        CouplingFamily::Dirichlet => {
            let full = universe.full_shape();
            match rng {
                Some(r) => Ok(random_joint(r, &full)),
                None => Ok(JointDistribution::uniform(full)),
            }
        }
        CouplingFamily::Correlated => {
            if s1 != s2 {
                return Err(Error::Argument(
                    "the correlated coupling needs both datasets over the same universe".into(),
                ));
            }
            let size = s1.total_size();
            let a = law(rng, size);
            let mut mass = vec![0.0; size * size];
            for (x, &p) in a.iter().enumerate() {
                mass[x * size + x] = p;
            }
            JointDistribution::new(universe.full_shape(), mass)
        }
    }
}

/// Coupling number `trial` of a family, drawn until both dataset marginals
/// have entropy at least `b`. Trial 0 is the family's uniform member, which
/// meets every feasible bound. Returns the coupling and the rejection count.
pub fn sample_coupling(
    family: CouplingFamily,
    universe: &MatrixUniverse,
    b: f64,
    seed: u64,
    trial: u64,
) -> Result<(JointDistribution, usize)> {
    if universe.dataset_count() != 2 {
        return Err(Error::Argument("couplings are defined for two datasets".into()));
    }
    let feasible = |p: &JointDistribution| -> Result<bool> {
        for j in 0..2 {
            if p.marginal(&universe.dataset_slots(j))?.entropy() < b - ENTROPY_FEASIBILITY_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if trial == 0 {
        let p = draw_coupling::<crate::sampling::TrialRng>(family, universe, None)?;
        return if feasible(&p)? {
            Ok((p, 0))
        } else {
            Err(Error::Sampling(format!(
                "the {} family has no member with dataset entropy >= {b}",
                family.name()
            )))
        };
    }
    let mut rng = stream_rng(seed, trial);
    for rejects in 0..=MAX_REJECTS {
        let p = draw_coupling(family, universe, Some(&mut rng))?;
        if feasible(&p)? {
            return Ok((p, rejects));
        }
    }
    Err(Error::Sampling(format!(
        "no {} coupling with dataset entropy >= {b} after {MAX_REJECTS} draws (lower b)",
        family.name()
    )))
}

/// Capacity over `ℙ_b` of the channel from the other dataset to `Y_j`
/// induced by the coupling `p`.
fn cross_capacity(
    lifted: &PrivacyChannel,
    p: &JointDistribution,
    other_slots: &[usize],
    b: f64,
    config: &AnalysisConfig,
) -> Result<Interval> {
    let induced = lifted.induced_channel(p, other_slots)?;
    let ch = &induced.channel;
    let b = b.min((ch.inputs() as f64).log2());
    constrained_group_capacity(ch, 1, b, config)
}

struct CouplingEval {
    rejects: usize,
    lhs: f64,
    cross: [Interval; 2],
}

/// `max_i I(X_i;Y_1,Y_2)` over sampled couplings against
/// `Σ_j (ε_j + δ_j) + C_{1→2} + C_{2→1}`, where the cross terms are the
/// largest `ℙ_b` capacities of the cross channels `p(y_1|x²)` and
/// `p(y_2|x¹)` induced by any coupling in the sample.
#[allow(clippy::too_many_arguments)]
pub fn check_general_composition(
    first: &PrivacyChannel,
    second: &PrivacyChannel,
    ids: &[String],
    family: CouplingFamily,
    b: f64,
    trials: usize,
    seed: u64,
    config: &AnalysisConfig,
) -> Result<TheoremReport> {
    if trials == 0 {
        return Err(Error::Argument("at least one coupling trial is needed".into()));
    }
    let universe = MatrixUniverse::new(vec![first.input_shape().clone(), second.input_shape().clone()])?;
    KnowledgeSet::from_b(b).validate(first.inputs().min(second.inputs()))?;
    let b1 = balance_at(first, b, config)?;
    let b2 = balance_at(second, b, config)?;
    let lifted1 = first.ignoring_suffix(universe.dataset(1))?;
    let lifted2 = second.ignoring_prefix(universe.dataset(0))?;
    let composed = first.compose_independent(second)?;
    let (d1, d2) = (universe.dataset_slots(0), universe.dataset_slots(1));

    let evals = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (p, rejects) = sample_coupling(family, &universe, b, seed, t)?;
            let mut lhs = 0.0f64;
            for i in 0..universe.individuals() {
                lhs = lhs.max(information(&composed, &universe.individual_slots(i), &p)?);
            }
            let cross = [
                cross_capacity(&lifted1, &p, &d2, b, config)?,
                cross_capacity(&lifted2, &p, &d1, b, config)?,
            ];
            Ok(CouplingEval { rejects, lhs, cross })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cross = [Interval::exact(0.0); 2];
    for e in &evals {
        cross[0] = cross[0].max(&e.cross[0]);
        cross[1] = cross[1].max(&e.cross[1]);
    }
    let own = |bal: &super::Balance| Interval {
        value: bal.constrained.value + bal.delta.value,
        ..bal.unconstrained
    };
    let rhs = own(&b1).add(&own(&b2)).add(&cross[0]).add(&cross[1]);
    let c = Interval {
        lower: b1.delta.lower + b2.delta.lower + cross[0].lower + cross[1].lower,
        value: b1.delta.value + b2.delta.value + cross[0].value + cross[1].value,
        upper: b1.delta.upper + b2.delta.upper + cross[0].upper + cross[1].upper,
    };

    let mut report = TheoremReport::new(TheoremTag::GeneralComp, ids.to_vec(), Some(b), config.tol);
    report.detail("coupling", family);
    report.detail("seed", seed);
    report.detail("eps", [b1.constrained, b2.constrained]);
    report.detail("delta", [b1.delta, b2.delta]);
    report.detail("cross", cross);
    report.detail("c", c);
    for (t, e) in evals.iter().enumerate() {
        report.push(
            TheoremTrial::new(format!("coupling {t}"), Interval::exact(e.lhs), rhs, config.tol)
                .detail("rejects", e.rejects)
                .detail("cross", e.cross),
        );
    }
    Ok(report)
}
