//! Seeded random instances: Dirichlet(1) distributions and random channels.
//!
//! Every stream is derived from `(seed, stream)` so that trial `t` draws the
//! same numbers whether trials run serially or in parallel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::PrivacyChannel;
use crate::error::Result;
use crate::prob::{JointDistribution, UniverseShape};

pub type TrialRng = ChaCha8Rng;

/// Independent generator for stream `stream` under user seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A point drawn uniformly from the probability simplex of dimension `len`
/// (symmetric Dirichlet with concentration 1).
pub fn dirichlet_uniform<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.into_iter().map(|d: f64| d / total).collect();
        }
    }
}

pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, shape: &UniverseShape) -> JointDistribution {
    let mass = dirichlet_uniform(rng, shape.total_size());
    JointDistribution::new(shape.clone(), mass).expect("Dirichlet draws are normalized")
}

/// A channel whose rows are independent Dirichlet(1) draws.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &UniverseShape,
    outputs: usize,
) -> Result<PrivacyChannel> {
    let rows = (0..shape.total_size())
        .flat_map(|_| dirichlet_uniform(rng, outputs))
        .collect();
    PrivacyChannel::new(shape.clone(), outputs, rows)
}
