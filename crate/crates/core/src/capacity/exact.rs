use rayon::prelude::*;

use super::blahut::{blahut_arimoto_matrix, blahut_with};
use super::{improves, Bracket, CapacityConfig, CapacityEstimate, KnowledgeSet, Method};
use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};
use crate::prob::JointDistribution;

const CHUNK: usize = 4096;

/// Unconstrained capacity towards record `i` (0-based).
pub fn individual_capacity_unconstrained(
    ch: &PrivacyChannel,
    i: usize,
    config: &CapacityConfig,
) -> Result<CapacityEstimate> {
    exact_capacity(ch, &[i], config)
}

/// Unconstrained capacity `max_X I(X_I;Y)` by enumerating deterministic
/// completions `g: X_I → X_{(I)}` and solving each induced channel
/// `x_I ↦ p(y | x_I, g(x_I))` with Blahut–Arimoto.
pub fn exact_capacity(
    ch: &PrivacyChannel,
    indices: &[usize],
    config: &CapacityConfig,
) -> Result<CapacityEstimate> {
    let shape = ch.input_shape();
    let sorted = shape.check_indices(indices)?;
    let rest = shape.complement(&sorted);
    if rest.is_empty() {
        return blahut_with(ch, config);
    }
    let sub = shape.sub_shape(&sorted)?;
    let rest_shape = shape.sub_shape(&rest)?;
    let (a_count, r_count) = (sub.total_size(), rest_shape.total_size());
    let maps = (r_count as f64).powi(a_count as i32);
    if maps > config.enumeration_cap {
        return Err(Error::Infeasible {
            what: format!("enumerating completions for records {sorted:?}"),
            needed: maps,
            cap: config.enumeration_cap,
            fallback: "mirror ascent (--method mirror)".into(),
        });
    }
    let maps = maps as usize;

    // full[a][r]: flat index of the dataset with x_I = a and x_{(I)} = r
    let mut full = vec![0usize; a_count * r_count];
    for (flat, slot) in (0..shape.total_size()).map(|f| (f, shape.unflatten_unchecked(f))) {
        let a = sorted.iter().fold(0, |acc, &i| acc * shape.sizes()[i] + slot[i]);
        let r = rest.iter().fold(0, |acc, &i| acc * shape.sizes()[i] + slot[i]);
        full[a * r_count + r] = flat;
    }

    let outputs = ch.output_size();
    let solve = |code: usize| {
        let mut w = Vec::with_capacity(a_count * outputs);
        let mut c = code;
        let mut picks = vec![0usize; a_count];
        for pick in picks.iter_mut().rev() {
            *pick = c % r_count;
            c /= r_count;
        }
        for (a, &r) in picks.iter().enumerate() {
            w.extend_from_slice(ch.row(full[a * r_count + r]));
        }
        let ba = blahut_arimoto_matrix(&w, a_count, outputs, config.ba_tol, config.ba_max_iter);
        let mut mass = vec![0.0; shape.total_size()];
        for (a, &r) in picks.iter().enumerate() {
            mass[full[a * r_count + r]] = ba.input[a];
        }
        (ba.lower, ba.upper, mass)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut upper = 0.0f64;
    let mut start = 0;
    while start < maps {
        let end = (start + CHUNK).min(maps);
        let batch: Vec<_> = (start..end).into_par_iter().map(solve).collect();
        for (lower, up, mass) in batch {
            upper = upper.max(up);
            let better = match &best {
                None => true,
                Some((bv, bm)) => improves(lower, &mass, *bv, bm),
            };
            if better {
                best = Some((lower, mass));
            }
        }
        start = end;
    }
    let (_, mass) = best.expect("at least one completion");
    let input = JointDistribution::new(shape.clone(), mass)?;
    let lower = super::information(ch, &sorted, &input)?;
    Ok(CapacityEstimate {
        value: lower,
        attaining_input: input,
        target: sorted,
        method: Method::ExactEnumBa,
        knowledge: KnowledgeSet::Unconstrained,
        error_bracket: Bracket {
            lower,
            upper: upper.max(lower),
        },
        heuristic: false,
        grid: None,
    })
}
