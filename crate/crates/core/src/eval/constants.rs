//! Finite-length constants appearing in the reliability and secrecy bounds.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, SQRT_2};

/// Number of superposed layers (V and X).
const LAYERS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticConstants {
    pub n: usize,
    pub beta: f64,
    /// `2^{-n^β}`.
    pub delta: f64,
    /// `sqrt(2 n δ ln 2)`.
    pub delta1: f64,
    /// `M n sqrt(2√2 δ1 (2n - log(√2 δ1)) + δ)` with `M = 2` layers.
    pub delta2: f64,
    /// `δ2 + √M δ1`: single-block distance between induced and target laws.
    pub delta_star: f64,
    /// `2nδ + 2δ* (4n - log δ*)`: per-block leakage term.
    pub delta_s: f64,
}

pub fn analytic_constants(n: usize, beta: f64) -> AnalyticConstants {
    let nf = n as f64;
    let delta = 2f64.powf(-nf.powf(beta));
    let delta1 = (2.0 * nf * delta * LN_2).sqrt();
    let delta2 = LAYERS * nf * (2.0 * SQRT_2 * delta1 * (2.0 * nf - (SQRT_2 * delta1).log2()) + delta).sqrt();
    let delta_star = delta2 + LAYERS.sqrt() * delta1;
    let delta_s = 2.0 * nf * delta + 2.0 * delta_star * (4.0 * nf - delta_star.log2());
    AnalyticConstants {
        n,
        beta,
        delta,
        delta1,
        delta2,
        delta_star,
        delta_s,
    }
}

/// Upper bound on the session error probability over `blocks` blocks:
/// `L(L+1)/2 · (nδ + 2δ*)`.
pub fn reliability_bound(n: usize, beta: f64, blocks: usize) -> f64 {
    let c = analytic_constants(n, beta);
    let l = blocks as f64;
    l * (l + 1.0) / 2.0 * (n as f64 * c.delta + 2.0 * c.delta_star)
}
