use crate::capacity::{Bracket, CapacityConfig, CapacityEstimate, KnowledgeSet, Method};
use crate::channel::PrivacyChannel;
use crate::error::Result;
use crate::prob::JointDistribution;

/// Outcome of Blahut–Arimoto on a bare matrix.
///
/// `lower = I(p;W)` at the returned input `p`; `upper = max_x D(W_x || pW)`,
/// which bounds the capacity for any `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlahutArimoto {
    pub input: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Per-row divergences `D(W_x || q)` in bits, where `q = pW`.
fn divergences(w: &[f64], inputs: usize, outputs: usize, p: &[f64], q: &mut [f64], d: &mut [f64]) {
    q.iter_mut().for_each(|v| *v = 0.0);
    for x in 0..inputs {
        for y in 0..outputs {
            q[y] += p[x] * w[x * outputs + y];
        }
    }
    for x in 0..inputs {
        let mut acc = 0.0;
        for y in 0..outputs {
            let wy = w[x * outputs + y];
            if wy > 0.0 {
                acc += wy * (wy / q[y]).log2();
            }
        }
        d[x] = acc.max(0.0);
    }
}

/// Capacity `max_p I(p;W)` of a row-stochastic `inputs × outputs` matrix.
pub fn blahut_arimoto_matrix(
    w: &[f64],
    inputs: usize,
    outputs: usize,
    tol: f64,
    max_iter: usize,
) -> BlahutArimoto {
    let mut p = vec![1.0 / inputs as f64; inputs];
    let mut q = vec![0.0; outputs];
    let mut d = vec![0.0; inputs];
    let mut best = BlahutArimoto {
        input: p.clone(),
        lower: 0.0,
        upper: f64::INFINITY,
        iterations: 0,
    };
    for it in 0..max_iter.max(1) {
        divergences(w, inputs, outputs, &p, &mut q, &mut d);
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        let upper = d.iter().copied().fold(0.0, f64::max).max(lower);
        if lower > best.lower || it == 0 {
            best.input.copy_from_slice(&p);
            best.lower = lower;
        }
        best.upper = best.upper.min(upper);
        best.iterations = it + 1;
        if best.upper - best.lower <= tol {
            break;
        }
        // p_x <- p_x 2^{D_x} / Z, shifted by max D for stability
        let shift = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - shift).exp2();
            z += *px;
        }
        p.iter_mut().for_each(|px| *px /= z);
    }
    best
}

/// Blahut–Arimoto on the whole dataset as a single input symbol.
pub fn blahut_arimoto(ch: &PrivacyChannel) -> Result<CapacityEstimate> {
    blahut_with(ch, &CapacityConfig::default())
}

pub(crate) fn blahut_with(ch: &PrivacyChannel, config: &CapacityConfig) -> Result<CapacityEstimate> {
    let ba = blahut_arimoto_matrix(
        ch.matrix(),
        ch.inputs(),
        ch.output_size(),
        config.ba_tol,
        config.ba_max_iter,
    );
    let input = JointDistribution::new(ch.input_shape().clone(), ba.input)?;
    let target: Vec<usize> = (0..ch.input_shape().records()).collect();
    let lower = super::information(ch, &target, &input)?;
    Ok(CapacityEstimate {
        value: lower,
        attaining_input: input,
        target,
        method: Method::ExactEnumBa,
        knowledge: KnowledgeSet::Unconstrained,
        error_bracket: Bracket {
            lower,
            upper: ba.upper.max(lower),
        },
        heuristic: false,
        grid: None,
    })
}
