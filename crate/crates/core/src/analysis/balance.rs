use serde::{Deserialize, Serialize};

use super::{unconstrained_capacity, AnalysisConfig, Interval};
use crate::capacity::{capacity_profile, subsets, KnowledgeSet, Method};
use crate::channel::PrivacyChannel;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 33;

/// `points` equally spaced values from 0 to `log2 size`, both ends exact.
pub fn b_grid(size: usize, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Parameter(format!(
            "a b-grid needs at least 2 points, got {points}"
        )));
    }
    let max = (size as f64).log2();
    let last = points - 1;
    Ok((0..points)
        .map(|t| {
            if t == last {
                max
            } else {
                max * t as f64 / last as f64
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub b: f64,
    /// `C_1` over `ℙ_b`.
    pub constrained: Interval,
    /// `δ(b) = C_1^ℙ - C_1^{ℙ_b}`.
    pub delta: Interval,
}

/// `δ` sampled on an ascending b-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceProfile {
    pub channel: String,
    pub universe: Vec<usize>,
    pub method: Method,
    /// `C_1` over `ℙ`.
    pub unconstrained: Interval,
    pub points: Vec<BalancePoint>,
}

impl BalanceProfile {
    /// `b,delta_lower,delta_upper`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,delta_lower,delta_upper\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::io::format_f64(p.b),
                crate::io::format_f64(p.delta.lower),
                crate::io::format_f64(p.delta.upper)
            ));
        }
        out
    }

    pub fn max_b(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.b)
    }
}

/// `C_1^ℙ`, `C_1^{ℙ_b}` and `δ(b)` at one entropy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub unconstrained: Interval,
    pub constrained: Interval,
    pub delta: Interval,
}

/// Evaluates the balance at ascending `bs`, sharing one unconstrained
/// estimate.
///
/// `ℙ_b` shrinks as `b` grows, so a point attained at a larger `b` is a
/// lower bound at every smaller one and an upper bound at a smaller `b`
/// caps every larger one; both envelopes are propagated before `δ` is
/// formed. At `b = 0` the two sets coincide and `δ` is exactly 0.
fn evaluate(
    ch: &PrivacyChannel,
    bs: &[f64],
    config: &AnalysisConfig,
) -> Result<(Interval, Vec<BalancePoint>)> {
    config.validate()?;
    if bs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("b-grid must be ascending".into()));
    }
    let targets = subsets(ch.input_shape().records(), 1);
    let mut free = Interval::from(&unconstrained_capacity(ch, &targets, config)?);

    let constrained_bs: Vec<f64> = bs.iter().copied().filter(|&b| b > 0.0).collect();
    let sets: Vec<KnowledgeSet> = constrained_bs.iter().map(|&b| KnowledgeSet::from_b(b)).collect();
    let estimates = if sets.is_empty() {
        Vec::new()
    } else {
        capacity_profile(ch, &targets, &sets, config.method, &config.capacity)?
    };
    let mut raw: Vec<Interval> = Vec::with_capacity(bs.len());
    let mut it = estimates.iter();
    for &b in bs {
        raw.push(if b > 0.0 {
            Interval::from(it.next().expect("one estimate per positive b"))
        } else {
            free
        });
    }

    for c in &raw {
        free.lower = free.lower.max(c.lower);
        free.value = free.value.max(c.value);
    }
    free.upper = free.upper.max(free.lower);
    let mut cap = free.upper;
    for c in raw.iter_mut() {
        cap = cap.min(c.upper);
        c.upper = cap;
    }
    let (mut floor, mut point) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in raw.iter_mut().rev() {
        floor = floor.max(c.lower);
        point = point.max(c.value);
        c.lower = floor;
        c.value = point;
        c.upper = c.upper.max(c.lower);
    }

    let points = bs
        .iter()
        .zip(raw)
        .map(|(&b, c)| {
            let (constrained, delta) = if b <= 0.0 {
                (free, Interval::exact(0.0))
            } else {
                (
                    c,
                    Interval {
                        lower: (free.lower - c.upper).max(0.0),
                        value: free.value - c.value,
                        upper: free.upper - c.lower,
                    },
                )
            };
            BalancePoint {
                b,
                constrained,
                delta,
            }
        })
        .collect();
    Ok((free, points))
}

/// The balance function on `points` equally spaced entropy bounds.
pub fn balance_profile(
    ch: &PrivacyChannel,
    channel_id: &str,
    points: usize,
    config: &AnalysisConfig,
) -> Result<BalanceProfile> {
    let bs = b_grid(ch.inputs(), points)?;
    let (unconstrained, points) = evaluate(ch, &bs, config)?;
    Ok(BalanceProfile {
        channel: channel_id.into(),
        universe: ch.input_shape().sizes().to_vec(),
        method: config.method,
        unconstrained,
        points,
    })
}

pub fn balance_at(ch: &PrivacyChannel, b: f64, config: &AnalysisConfig) -> Result<Balance> {
    KnowledgeSet::from_b(b).validate(ch.inputs())?;
    let (unconstrained, points) = evaluate(ch, &[b], config)?;
    Ok(Balance {
        unconstrained,
        constrained: points[0].constrained,
        delta: points[0].delta,
    })
}

/// The largest grid `b` whose `δ` is certainly at most `target`
/// (`δ.upper <= target`), or 0 when no positive grid point qualifies.
pub fn invert_balance(profile: &BalanceProfile, target: f64) -> Result<f64> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::Parameter(format!(
            "balance target {target} must be non-negative"
        )));
    }
    Ok(profile
        .points
        .iter()
        .filter(|p| p.delta.upper <= target + 1e-9)
        .map(|p| p.b)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::Mechanism;

    fn xor() -> PrivacyChannel {
        Mechanism::Xor { records: 2 }.build().unwrap()
    }

    #[test]
    fn grid_has_exact_ends() {
        let g = b_grid(4, 33).unwrap();
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[32], 2.0);
        assert_eq!(g[16], 1.0);
        assert!(b_grid(4, 1).is_err());
    }

    #[test]
    fn constant_and_identity_have_zero_balance() {
        let cfg = AnalysisConfig::default();
        let c = Mechanism::Constant {
            alphabets: vec![2, 2],
            outputs: 3,
            row: None,
        }
        .build()
        .unwrap();
        let p = balance_profile(&c, "constant", 9, &cfg).unwrap();
        assert!(p
            .points
            .iter()
            .all(|pt| pt.delta.value.abs() < 1e-12 && pt.delta.upper < 1e-9));
        assert_eq!(invert_balance(&p, 0.0).unwrap(), 2.0);

        let id = Mechanism::Identity { alphabets: vec![2] }.build().unwrap();
        let p = balance_profile(&id, "identity", 9, &cfg).unwrap();
        for pt in &p.points {
            assert!(pt.delta.value.abs() < 1e-9, "b={} delta={:?}", pt.b, pt.delta);
        }
    }

    #[test]
    fn xor_balance_follows_max_zero_b_minus_one() {
        let cfg = AnalysisConfig::default();
        let p = balance_profile(&xor(), "xor", 33, &cfg).unwrap();
        assert!((p.unconstrained.value - 1.0).abs() < 1e-9);
        let end = p.points.last().unwrap();
        assert_eq!(end.b, 2.0);
        assert!(end.constrained.value.abs() < 1e-12 && end.constrained.upper.abs() < 1e-12);
        assert!((end.delta.value - 1.0).abs() < 1e-9);
        // I(X_1;Y) <= 1 - H(X_2|X_1) <= 2 - b, attained by X_2 = X_1 ⊕ noise
        for pt in &p.points {
            let expected = (pt.b - 1.0).max(0.0);
            assert!(pt.delta.lower <= expected + 1e-9 && expected <= pt.delta.upper + 1e-9);
            assert!(
                (pt.delta.value - expected).abs() < 0.05,
                "b={} {:?}",
                pt.b,
                pt.delta
            );
        }
        let mid = p.points.iter().find(|pt| pt.b == 1.5).unwrap();
        // the best lattice point at G = 64 sits about 0.026 bits short of 2 - b
        assert!((mid.delta.value - 0.5).abs() < 0.03, "{mid:?}");
        assert!(mid.delta.lower <= 0.5 && 0.5 <= mid.delta.upper);
        let b = invert_balance(&p, 0.4).unwrap();
        assert!((b - 1.4).abs() < 0.07, "b = {b}");
        assert_eq!(invert_balance(&p, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn csv_has_fixed_columns() {
        let cfg = AnalysisConfig::default();
        let p = balance_profile(&xor(), "xor", 3, &cfg).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "b,delta_lower,delta_upper");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}
