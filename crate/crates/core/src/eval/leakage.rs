//! Information leakage `I(S; Z)` about the confidential messages.
//!
//! [`exact_leakage`] enumerates the encoder and the eavesdropper channel.
//! [`plugin_leakage`] samples sessions and applies a Miller–Madow corrected
//! plug-in estimate, with a bias-corrected Poisson-bootstrap percentile
//! interval.

use super::enumerate::{conditional_mi, Outcome};
use super::{draw_session, enumerate_sessions, EvalError};
use crate::channel::Observer;
use crate::codec::ChainCode;
use crate::rng::{substream, Purpose, RngBits};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::Poisson;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

/// Largest block length and block count accepted by [`exact_leakage`].
pub const EXACT_MAX_N: usize = 4;
pub const EXACT_MAX_BLOCKS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEstimate {
    pub estimate_bits: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub total_confidential_bits: usize,
    pub exact_leakage_bits: Option<f64>,
    pub plugin: Option<PluginEstimate>,
    pub tv_distance: Option<f64>,
}

/// Exact `I(S_{1:L}; Z_{1:L})` for `n ≤ 4`, `L ≤ 2`.
pub fn exact_leakage(code: &ChainCode, budget: usize) -> Result<LeakageReport, EvalError> {
    let n = code.n();
    let total = code.dimensions().total_confidential();
    if n > EXACT_MAX_N || code.blocks > EXACT_MAX_BLOCKS {
        return Err(EvalError::BudgetExceeded {
            what: format!("exact leakage at n = {n}, L = {} (limit n ≤ {EXACT_MAX_N}, L ≤ {EXACT_MAX_BLOCKS})", code.blocks),
            budget,
        });
    }
    if total == 0 {
        return Ok(LeakageReport {
            total_confidential_bits: 0,
            exact_leakage_bits: Some(0.0),
            ..Default::default()
        });
    }
    let leaves = enumerate_sessions(code, budget)?;
    let outcomes: Vec<(f64, Outcome)> = leaves
        .into_iter()
        .map(|(w, s)| {
            (
                w,
                Outcome {
                    cond: vec![],
                    a: s.messages.confidential.concat(),
                    a_x: vec![],
                    b: vec![],
                    b_x: s.encoded.ciphertext.x_blocks.concat(),
                },
            )
        })
        .collect();
    let z = code.design.spec.channel(Observer::Z);
    let mi = conditional_mi(&outcomes, z, budget)?;
    Ok(LeakageReport {
        total_confidential_bits: total,
        exact_leakage_bits: Some(mi.min(total as f64)),
        ..Default::default()
    })
}

type Counts = BTreeMap<(u64, u64), u64>;

fn sample_counts(code: &ChainCode, seed: u64, range: std::ops::Range<usize>) -> Result<Counts, EvalError> {
    let z_ch = code.design.spec.channel(Observer::Z);
    let q = z_ch.output_size() as u64;
    let mut counts = Counts::new();
    for t in range {
        let mut src = RngBits(substream(seed, Purpose::Messages, t as u64, 0));
        let draw = draw_session(code, &mut src)?;
        let mut ch = substream(seed, Purpose::Channel, t as u64, 0);
        let s = draw
            .messages
            .confidential
            .iter()
            .flatten()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        let z = draw
            .encoded
            .ciphertext
            .x_blocks
            .iter()
            .flatten()
            .fold(0u64, |acc, &x| acc * q + z_ch.sample(x, &mut ch) as u64);
        *counts.entry((s, z)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Miller–Madow corrected entropy in bits from cell counts.
fn mm_entropy<I: IntoIterator<Item = f64>>(counts: I) -> f64 {
    let cells: Vec<f64> = counts.into_iter().filter(|&c| c > 0.0).collect();
    let total: f64 = cells.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let h: f64 = cells.iter().map(|&c| -(c / total) * (c / total).log2()).sum();
    h + (cells.len() as f64 - 1.0) / (2.0 * total * LN_2)
}

fn mm_mutual_information(cells: &[((u64, u64), f64)]) -> f64 {
    let mut s_marg: BTreeMap<u64, f64> = BTreeMap::new();
    let mut z_marg: BTreeMap<u64, f64> = BTreeMap::new();
    for &((s, z), c) in cells {
        *s_marg.entry(s).or_insert(0.0) += c;
        *z_marg.entry(z).or_insert(0.0) += c;
    }
    mm_entropy(s_marg.into_values()) + mm_entropy(z_marg.into_values()) - mm_entropy(cells.iter().map(|c| c.1))
}

/// Plug-in estimate of `I(S; Z)` from `samples` seeded sessions.
///
/// Sessions are split across `workers` threads by index; each session uses
/// its own sub-streams, so the result does not depend on `workers`.
pub fn plugin_leakage(
    code: &ChainCode,
    samples: usize,
    bootstrap: usize,
    confidence: f64,
    seed: u64,
    workers: usize,
) -> Result<PluginEstimate, EvalError> {
    let total_bits = code.dimensions().total_confidential();
    let q = code.design.spec.channel(Observer::Z).output_size() as f64;
    if total_bits > 64 || (code.n() * code.blocks) as f64 * q.log2() > 63.0 {
        return Err(EvalError::InvalidArgument("session too large for the plug-in estimator".into()));
    }
    if samples == 0 || !(0.0..1.0).contains(&confidence) {
        return Err(EvalError::InvalidArgument("need samples ≥ 1 and confidence in (0, 1)".into()));
    }
    let workers = workers.max(1).min(samples);
    let chunk = samples.div_ceil(workers);
    let parts: Vec<Result<Counts, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(samples)..((w + 1) * chunk).min(samples);
                scope.spawn(move || sample_counts(code, seed, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut counts = Counts::new();
    for part in parts {
        for (k, c) in part? {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    let mut cells: Vec<((u64, u64), f64)> = counts.into_iter().map(|(k, c)| (k, c as f64)).collect();
    cells.sort_by_key(|c| c.0);
    let estimate = mm_mutual_information(&cells);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut reps = Vec::with_capacity(bootstrap);
    let mut resampled = cells.clone();
    for _ in 0..bootstrap {
        for (dst, src) in resampled.iter_mut().zip(&cells) {
            dst.1 = rand::distributions::Distribution::sample(&Poisson::new(src.1).expect("positive count"), &mut rng);
        }
        reps.push(mm_mutual_information(&resampled));
    }
    let (ci_low, ci_high, std_error) = if reps.is_empty() {
        (estimate, estimate, 0.0)
    } else {
        reps.sort_by(|a, b| a.total_cmp(b));
        let alpha = (1.0 - confidence) / 2.0;
        let pick = |p: f64| reps[((p * reps.len() as f64).floor() as usize).min(reps.len() - 1)];
        let mean = reps.iter().sum::<f64>() / reps.len() as f64;
        let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps.len().max(2) - 1) as f64;
        // Resampling a sparse table thins it further, which biases replicates
        // upward; shift the percentiles back by the bootstrap bias estimate.
        let bias = mean - estimate;
        (pick(alpha) - bias, pick(1.0 - alpha) - bias, var.sqrt())
    };
    Ok(PluginEstimate {
        estimate_bits: estimate,
        ci_low,
        ci_high,
        confidence,
        std_error,
        samples,
    })
}
