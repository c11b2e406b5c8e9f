//! Information-theoretic privacy analysis for discrete privacy channels.
//!
//! A privacy channel `p(y|x)` maps datasets `x = (x_1, …, x_n)` to query
//! outputs. An adversary's knowledge is a distribution `X` over datasets, and
//! the channel leaks at most `C_1 = max I(X_i;Y)` bits about any single
//! record, maximized over the allowed knowledges and records. This crate
//! computes such capacities (optionally restricted to knowledges with
//! entropy at least `b`), the balance function `δ(b)` between the two, the
//! constructive distributions that decompose group and composed leakage, and
//! bracket-sound checkers for the resulting group and composition bounds.

pub mod analysis;
pub mod capacity;
pub mod channel;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod mechanism;
pub mod prob;
pub mod sampling;

pub use analysis::{AnalysisConfig, BalanceProfile, Interval, TheoremReport, Verdict};
pub use capacity::{Bracket, CapacityConfig, CapacityEstimate, KnowledgeSet, Method};
pub use channel::{InducedChannel, MatrixUniverse, PrivacyChannel};
pub use decomposition::{DecompositionReport, Lemma};
pub use error::{Error, Result};
pub use mechanism::Mechanism;
pub use prob::{JointDistribution, JointMatrix, MarginalDistribution, UniverseShape};
