//! Brute-force capacity over the lattice `{counts / G}` of the joint simplex.
//!
//! The certified upper bound rests on a covering argument. Rounding any
//! `p*` to the lattice by largest remainders moves it by at most
//! `T = floor(N/2) / G` in total variation. Entropy is continuous in total
//! variation (`|H(p) - H(q)| <= T log2(d-1) + h2(T)` for `T <= 1 - 1/d`),
//! channels and marginalizations do not increase total variation, and
//! `I(X_I;Y) = H(X_I) + H(Y) - H(X_I,Y)`. So the lattice neighbour `q` of the
//! optimum has `H(q) >= b - ΔH` and `I(q) >= I(p*) - ΔI`, giving
//! `C <= max{ I(q) : H(q) >= b - ΔH } + ΔI`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    improves, trivial_bound, Bracket, CapacityEstimate, KnowledgeSet, Method, ENTROPY_FEASIBILITY_TOL,
};
use crate::channel::{joint_io_raw, PrivacyChannel};
use crate::error::{Error, Result};
use crate::prob::{binary_entropy, entropy_bits, mi_table, JointDistribution, UniverseShape};

/// Constants behind a grid bracket, reported with every grid estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCertificate {
    pub resolution: usize,
    pub points: usize,
    /// Total-variation radius `floor(N/2) / G` covering the simplex.
    pub tv_radius: f64,
    /// Entropy slack `ΔH` on the joint at that radius.
    pub entropy_modulus: f64,
    /// Information slack `ΔI` added to the best lattice value.
    pub information_modulus: f64,
}

/// Continuity modulus of Shannon entropy on `d` symbols at total-variation
/// distance `t`: `t log2(d-1) + h2(t)`, saturating at `log2 d`.
pub fn entropy_continuity(t: f64, d: usize) -> f64 {
    if d <= 1 || t <= 0.0 {
        return 0.0;
    }
    let cap = (d as f64).log2();
    if t >= 1.0 - 1.0 / d as f64 {
        return cap;
    }
    (t * ((d - 1) as f64).log2() + binary_entropy(t)).min(cap)
}

/// Number of lattice points, `C(G + N - 1, N - 1)`.
pub fn composition_count(resolution: usize, parts: usize) -> f64 {
    let k = parts.saturating_sub(1);
    (1..=k).fold(1.0, |acc, j| acc * (resolution + j) as f64 / j as f64)
}

/// Default resolution by universe size; above 8 symbols, the finest
/// resolution whose lattice fits under `cap`.
pub fn default_resolution(parts: usize, cap: f64) -> usize {
    match parts {
        0 | 1 => 1,
        2 => 1024,
        3 => 256,
        4 => 64,
        5..=8 => 16,
        _ => (1..=16)
            .rev()
            .find(|&g| composition_count(g, parts) <= cap)
            .unwrap_or(1),
    }
}

fn compositions(parts: usize, resolution: usize) -> Vec<u32> {
    fn fill(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<u32>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u32;
            out.extend_from_slice(cur);
            return;
        }
        for v in 0..=left {
            cur[pos] = v as u32;
            fill(pos + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fill(0, resolution, &mut cur, &mut out);
    out
}

/// Entropy and per-target information at every lattice point, reusable
/// across entropy bounds.
#[derive(Debug, Clone)]
pub struct GridTable {
    shape: UniverseShape,
    resolution: usize,
    counts: Vec<u32>,
    entropy: Vec<f64>,
    targets: Vec<Vec<usize>>,
    /// `info[t][k]`: information towards target `t` at point `k`.
    info: Vec<Vec<f64>>,
    /// Information at the exact uniform law, which is always feasible.
    uniform_info: Vec<f64>,
    tv_radius: f64,
    entropy_modulus: f64,
    info_modulus: Vec<f64>,
    trivial: Vec<f64>,
}

impl GridTable {
    pub fn build(ch: &PrivacyChannel, targets: &[Vec<usize>], resolution: usize, cap: f64) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Parameter("grid resolution must be >= 1".into()));
        }
        let shape = ch.input_shape().clone();
        let parts = shape.total_size();
        let needed = composition_count(resolution, parts);
        if needed > cap {
            return Err(Error::Infeasible {
                what: format!("grid at resolution {resolution} over {parts} datasets"),
                needed,
                cap,
                fallback: "mirror ascent (--method mirror) or a coarser --grid".into(),
            });
        }
        let sorted: Vec<Vec<usize>> = targets
            .iter()
            .map(|t| shape.check_indices(t))
            .collect::<Result<_>>()?;
        let projections: Vec<(Vec<usize>, usize)> = sorted
            .iter()
            .map(|t| {
                let sub = shape.sub_shape(t).expect("validated");
                (shape.projection_unchecked(t), sub.total_size())
            })
            .collect();
        let outputs = ch.output_size();
        let rows = ch.matrix();
        let eval = |mass: &[f64]| -> Vec<f64> {
            projections
                .iter()
                .map(|(proj, sub)| mi_table(&joint_io_raw(rows, outputs, proj, *sub, mass), *sub, outputs))
                .collect()
        };

        let counts = compositions(parts, resolution);
        let g = resolution as f64;
        let evaluated: Vec<(f64, Vec<f64>)> = counts
            .par_chunks(parts)
            .map(|c| {
                let mass: Vec<f64> = c.iter().map(|&v| v as f64 / g).collect();
                (entropy_bits(&mass), eval(&mass))
            })
            .collect();
        let mut entropy = Vec::with_capacity(evaluated.len());
        let mut info = vec![Vec::with_capacity(evaluated.len()); sorted.len()];
        for (h, vals) in evaluated {
            entropy.push(h);
            for (col, v) in info.iter_mut().zip(vals) {
                col.push(v);
            }
        }
        let uniform_info = eval(&vec![1.0 / parts as f64; parts]);

        let tv_radius = (parts / 2) as f64 / g;
        let entropy_modulus = entropy_continuity(tv_radius, parts);
        let info_modulus = projections
            .iter()
            .map(|(_, sub)| {
                entropy_continuity(tv_radius, *sub)
                    + entropy_continuity(tv_radius, outputs)
                    + entropy_continuity(tv_radius, sub * outputs)
            })
            .collect();
        let trivial = sorted
            .iter()
            .map(|t| trivial_bound(ch, t))
            .collect::<Result<_>>()?;
        Ok(GridTable {
            shape,
            resolution,
            counts,
            entropy,
            targets: sorted,
            info,
            uniform_info,
            tv_radius,
            entropy_modulus,
            info_modulus,
            trivial,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn points(&self) -> usize {
        self.entropy.len()
    }

    pub fn targets(&self) -> &[Vec<usize>] {
        &self.targets
    }

    fn mass_of(&self, k: usize) -> Vec<f64> {
        let parts = self.shape.total_size();
        let g = self.resolution as f64;
        self.counts[k * parts..(k + 1) * parts]
            .iter()
            .map(|&v| v as f64 / g)
            .collect()
    }

    /// Certificate constants for target `t`.
    pub fn certificate(&self, t: usize) -> GridCertificate {
        GridCertificate {
            resolution: self.resolution,
            points: self.points(),
            tv_radius: self.tv_radius,
            entropy_modulus: self.entropy_modulus,
            information_modulus: self.info_modulus[t],
        }
    }

    /// Best lattice point for target `t` under `ks`, with its bracket.
    pub fn best(&self, t: usize, ks: KnowledgeSet) -> Result<CapacityEstimate> {
        ks.validate(self.shape.total_size())?;
        let b = ks.min_entropy();
        let info = &self.info[t];
        let parts = self.shape.total_size();

        let uniform = vec![1.0 / parts as f64; parts];
        let mut best_value = self.uniform_info[t];
        let mut best_mass = uniform;
        let relaxed = b - self.entropy_modulus - ENTROPY_FEASIBILITY_TOL;
        let mut relaxed_max = self.uniform_info[t];
        for (k, (&h, &v)) in self.entropy.iter().zip(info).enumerate() {
            if h >= relaxed {
                relaxed_max = relaxed_max.max(v);
            }
            if h >= b - ENTROPY_FEASIBILITY_TOL && v >= best_value - super::TIE_TOL {
                let mass = self.mass_of(k);
                if improves(v, &mass, best_value, &best_mass) {
                    best_value = v;
                    best_mass = mass;
                }
            }
        }
        let input = JointDistribution::new(self.shape.clone(), best_mass)?;
        let upper = (relaxed_max + self.info_modulus[t])
            .min(self.trivial[t])
            .max(best_value);
        Ok(CapacityEstimate {
            value: best_value,
            attaining_input: input,
            target: self.targets[t].clone(),
            method: Method::Grid,
            knowledge: ks,
            error_bracket: Bracket {
                lower: best_value,
                upper,
            },
            heuristic: false,
            grid: Some(self.certificate(t)),
        })
    }
}

/// Grid oracle for a single index set.
pub fn capacity_grid_oracle(
    ch: &PrivacyChannel,
    indices: &[usize],
    ks: KnowledgeSet,
    resolution: usize,
    cap: f64,
) -> Result<CapacityEstimate> {
    GridTable::build(ch, &[indices.to_vec()], resolution, cap)?.best(0, ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::Mechanism;

    fn xor() -> PrivacyChannel {
        Mechanism::Xor { records: 2 }.build().unwrap()
    }

    #[test]
    fn lattice_size_matches_enumeration() {
        for (g, n) in [(4, 3), (64, 4), (5, 1), (3, 5)] {
            assert_eq!(compositions(n, g).len() / n, composition_count(g, n) as usize);
        }
        assert_eq!(composition_count(64, 4), 47905.0);
        assert_eq!(composition_count(16, 8), 245157.0);
    }

    #[test]
    fn lattice_is_lexicographic() {
        let c = compositions(3, 2);
        let pts: Vec<&[u32]> = c.chunks(3).collect();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[0], &[0, 0, 2]);
    }

    #[test]
    fn continuity_modulus() {
        assert_eq!(entropy_continuity(0.0, 4), 0.0);
        assert_eq!(entropy_continuity(0.1, 1), 0.0);
        assert!((entropy_continuity(0.1, 2) - binary_entropy(0.1)).abs() < 1e-15);
        assert_eq!(entropy_continuity(0.9, 4), 2.0);
    }

    #[test]
    fn identity_binary_unconstrained() {
        let id = Mechanism::Identity { alphabets: vec![2] }.build().unwrap();
        let e = capacity_grid_oracle(&id, &[0], KnowledgeSet::Unconstrained, 32, 1e6).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.attaining_input.mass(), &[0.5, 0.5]);
    }

    #[test]
    fn xor_at_full_entropy_only_uniform_is_feasible() {
        let e = capacity_grid_oracle(&xor(), &[0], KnowledgeSet::from_b(2.0), 64, 1e6).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.attaining_input.mass(), &[0.25; 4]);
    }

    #[test]
    fn xor_at_one_and_a_half_bits() {
        // analytic family: X1 uniform, X2 ~ Bernoulli(q) with H2(q) = 0.5
        // attains I = 1 - H2(q) = 0.5 at H(X) = 1.5
        let e = capacity_grid_oracle(&xor(), &[0], KnowledgeSet::from_b(1.5), 64, 1e6).unwrap();
        assert!(e.lower() <= 0.5 && 0.5 <= e.upper());
        assert!(e.value > 0.45, "{}", e.value);
        assert!(e.attaining_input.entropy() >= 1.5 - 1e-12);
    }

    #[test]
    fn grid_value_non_increasing_in_b() {
        let table = GridTable::build(&xor(), &[vec![0]], 64, 1e6).unwrap();
        let mut prev = f64::INFINITY;
        for s in 0..=40 {
            let b = 2.0 * s as f64 / 40.0;
            let e = table.best(0, KnowledgeSet::from_b(b)).unwrap();
            assert!(e.value <= prev + 1e-9);
            prev = e.value;
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = capacity_grid_oracle(&xor(), &[0], KnowledgeSet::Unconstrained, 64, 1000.0).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
        assert!(capacity_grid_oracle(&xor(), &[0], KnowledgeSet::Unconstrained, 0, 1e6).is_err());
    }
}
