//! Balance functions and bracket-sound checkers for the privacy bounds.
//!
//! Every capacity entering a check carries a certified bracket. An
//! inequality `lhs <= rhs` is reported as holding when
//! `rhs.lower >= lhs.upper - tol`, as violated only when
//! `lhs.lower > rhs.upper + tol`, and as inconclusive in between, so
//! optimization error can widen a verdict but never flip it.

mod balance;
mod theorems;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capacity::{
    capacity_over_targets, subsets, CapacityConfig, CapacityEstimate, KnowledgeSet, Method,
};
use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};

pub use balance::{
    b_grid, balance_at, balance_profile, invert_balance, Balance, BalancePoint, BalanceProfile,
    DEFAULT_GRID_POINTS,
};
pub use theorems::{
    check_basic_composition, check_equivalence, check_general_composition, check_group_privacy,
    check_monotonicity, sample_coupling, CouplingFamily, EndpointFinding, EndpointOutcome,
};

/// A bracketed quantity with a point estimate inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Interval {
            lower: v,
            value: v,
            upper: v,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lower: self.lower + other.lower,
            value: self.value + other.value,
            upper: self.upper + other.upper,
        }
    }

    pub fn scale(&self, k: f64) -> Interval {
        Interval {
            lower: k * self.lower,
            value: k * self.value,
            upper: k * self.upper,
        }
    }

    /// Elementwise max: the bracket of `max(a, b)`.
    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lower: self.lower.max(other.lower),
            value: self.value.max(other.value),
            upper: self.upper.max(other.upper),
        }
    }
}

impl From<&CapacityEstimate> for Interval {
    fn from(e: &CapacityEstimate) -> Self {
        Interval {
            lower: e.lower(),
            value: e.value,
            upper: e.upper(),
        }
    }
}

/// Settings shared by every analysis entry point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub capacity: CapacityConfig,
    /// Estimator for capacities over `ℙ_b` with `b > 0`.
    pub method: Method,
    pub tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            capacity: CapacityConfig::default(),
            method: Method::Grid,
            tol: 1e-6,
        }
    }
}

impl AnalysisConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parameter(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Unconstrained capacity towards the best of `targets`: exact enumeration
/// when it fits under the cap, the configured method otherwise.
pub(crate) fn unconstrained_capacity(
    ch: &PrivacyChannel,
    targets: &[Vec<usize>],
    config: &AnalysisConfig,
) -> Result<CapacityEstimate> {
    let ks = KnowledgeSet::Unconstrained;
    match capacity_over_targets(ch, targets, ks, Method::ExactEnumBa, &config.capacity) {
        Err(Error::Infeasible { .. }) if config.method != Method::ExactEnumBa => {
            capacity_over_targets(ch, targets, ks, config.method, &config.capacity)
        }
        other => other,
    }
}

/// `C_k` over `ℙ_b`. For `b > 0` the upper end is tightened by the
/// unconstrained `C_k`, since `ℙ_b ⊂ ℙ`.
pub(crate) fn constrained_group_capacity(
    ch: &PrivacyChannel,
    k: usize,
    b: f64,
    config: &AnalysisConfig,
) -> Result<Interval> {
    let targets = subsets(ch.input_shape().records(), k);
    if targets.is_empty() {
        return Err(Error::Argument(format!(
            "group size {k} not in [1, {}]",
            ch.input_shape().records()
        )));
    }
    let free = Interval::from(&unconstrained_capacity(ch, &targets, config)?);
    if b <= 0.0 {
        return Ok(free);
    }
    let e = capacity_over_targets(
        ch,
        &targets,
        KnowledgeSet::from_b(b),
        config.method,
        &config.capacity,
    )?;
    let mut c = Interval::from(&e);
    c.upper = c.upper.min(free.upper).max(c.lower);
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    Equivalence,
    Group,
    BasicComp,
    GeneralComp,
    Monotonicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
}

/// Bracket-sound verdict for `lhs <= rhs`.
pub fn judge(lhs: &Interval, rhs: &Interval, tol: f64) -> Verdict {
    if rhs.lower - lhs.upper >= -tol {
        Verdict::Holds
    } else if lhs.lower > rhs.upper + tol {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// One instance of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremTrial {
    pub label: String,
    pub lhs: Interval,
    pub rhs: Interval,
    /// `rhs.lower - lhs.upper`.
    pub slack: f64,
    /// `rhs.value - lhs.value`.
    pub point_slack: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl TheoremTrial {
    pub fn new(label: impl Into<String>, lhs: Interval, rhs: Interval, tol: f64) -> Self {
        TheoremTrial {
            label: label.into(),
            lhs,
            rhs,
            slack: rhs.lower - lhs.upper,
            point_slack: rhs.value - lhs.value,
            verdict: judge(&lhs, &rhs, tol),
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        self.details.insert(
            key.into(),
            serde_json::to_value(value).expect("plain data serializes"),
        );
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub holds: usize,
    pub inconclusive: usize,
    pub violated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: TheoremTag,
    pub channels: Vec<String>,
    pub b: Option<f64>,
    pub tol: f64,
    pub trials: Vec<TheoremTrial>,
    pub summary: VerdictCounts,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl TheoremReport {
    pub fn new(theorem: TheoremTag, channels: Vec<String>, b: Option<f64>, tol: f64) -> Self {
        TheoremReport {
            theorem,
            channels,
            b,
            tol,
            trials: Vec::new(),
            summary: VerdictCounts::default(),
            details: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, trial: TheoremTrial) {
        match trial.verdict {
            Verdict::Holds => self.summary.holds += 1,
            Verdict::Inconclusive => self.summary.inconclusive += 1,
            Verdict::Violated => self.summary.violated += 1,
        }
        self.trials.push(trial);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(
            key.into(),
            serde_json::to_value(value).expect("plain data serializes"),
        );
    }

    /// Appends the trials of `other`, which must check the same theorem.
    pub fn absorb(&mut self, other: TheoremReport) {
        for t in other.trials {
            self.push(t);
        }
    }

    pub fn violated(&self) -> bool {
        self.summary.violated > 0
    }

    pub fn all_hold(&self) -> bool {
        self.summary.holds == self.trials.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lower: f64, upper: f64) -> Interval {
        Interval {
            lower,
            value: lower,
            upper,
        }
    }

    #[test]
    fn verdicts_are_bracket_sound() {
        let tol = 1e-6;
        assert_eq!(judge(&iv(0.0, 0.5), &iv(0.5, 0.6), tol), Verdict::Holds);
        assert_eq!(judge(&iv(0.0, 0.5 + 5e-7), &iv(0.5, 0.6), tol), Verdict::Holds);
        // overlapping brackets decide nothing
        assert_eq!(judge(&iv(0.2, 0.7), &iv(0.5, 0.6), tol), Verdict::Inconclusive);
        assert_eq!(judge(&iv(0.61, 0.7), &iv(0.5, 0.6), tol), Verdict::Violated);
    }

    #[test]
    fn report_counts_verdicts() {
        let mut r = TheoremReport::new(TheoremTag::Group, vec![], None, 1e-6);
        r.push(TheoremTrial::new("a", iv(0.0, 0.1), iv(0.2, 0.3), 1e-6));
        r.push(TheoremTrial::new("b", iv(0.0, 0.4), iv(0.2, 0.3), 1e-6));
        assert_eq!(
            r.summary,
            VerdictCounts {
                holds: 1,
                inconclusive: 1,
                violated: 0
            }
        );
        assert!(!r.violated() && !r.all_hold());
        assert!((r.trials[0].slack - 0.1).abs() < 1e-15);
    }
}
