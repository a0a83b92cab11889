//! Sampling oracle for smooth items.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::market::{ItemSpec, ValueSpec};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    /// Per-item utility estimate for every bidder (copies not applied).
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Sample mean of the realized per-draw utility; `m.len()` fixes the bidder count.
pub fn mc_utility(item: &ItemSpec, m: &[f64], lambda: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()));
    }
    let n = m.len();
    let mut draws: Vec<(usize, f64, Option<Beta<f64>>)> = Vec::new();
    for (&b, spec) in &item.values {
        if b >= n || m[b] <= 0.0 {
            continue;
        }
        match *spec {
            ValueSpec::Zero => {}
            ValueSpec::Fixed(v) => draws.push((b, v, None)),
            ValueSpec::Beta { a, b: bb, scale } => {
                let dist = Beta::new(f64::from(a), f64::from(bb))
                    .map_err(|e| Error::InvalidArgument(format!("beta({a}, {bb}): {e}")))?;
                draws.push((b, scale, Some(dist)));
            }
        }
    }

    let mut rng = seed::rng(seed);
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut values = vec![0.0; draws.len()];
    let mut tied = Vec::with_capacity(draws.len());
    for _ in 0..samples {
        for (slot, (_, scale, dist)) in values.iter_mut().zip(&draws) {
            *slot = match dist {
                Some(d) => scale * d.sample(&mut rng),
                None => *scale,
            };
        }
        let mut top = f64::NEG_INFINITY;
        let mut second = 0.0f64;
        tied.clear();
        for (k, (b, _, _)) in draws.iter().enumerate() {
            let bid = m[*b] * values[k];
            if bid > top {
                second = second.max(top);
                top = bid;
                tied.clear();
                tied.push(k);
            } else if bid == top {
                second = top;
                tied.push(k);
            } else {
                second = second.max(bid);
            }
        }
        if tied.is_empty() || top <= 0.0 {
            continue;
        }
        // Ties have probability zero for continuous values; a uniform pick keeps the estimate unbiased anyway.
        let k = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.random_range(0..tied.len())]
        };
        let (b, _, _) = draws[k];
        let payoff = values[k] - lambda * second - (1.0 - lambda) * top;
        sum[b] += payoff;
        sum_sq[b] += payoff * payoff;
    }

    let s = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|x| x / s).collect();
    let stderr = if samples > 1 {
        sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, mu)| ((q / s - mu * mu).max(0.0) * s / (s - 1.0) / s).sqrt())
            .collect()
    } else {
        vec![0.0; n]
    };
    Ok(McEstimate { mean, stderr })
}
