//! Polarized index sets, the partition of the high-entropy set, case
//! classification and the chaining plan.
//!
//! Indices are 0-based throughout. A "set" is a sorted `Vec<usize>`.

use crate::channel::{Conditioning, DmsSpec, SymbolLaw};
use crate::polar::{check_block_length, successive_cancellation, transform_in_place, PolarError};
use crate::rng::{substream, Purpose};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_BETA: f64 = 0.3;
pub const MAX_ENUMERATION_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("method unsupported: {0}")]
    MethodUnsupported(String),
    #[error("beta {0} must lie in (0, 1/2)")]
    InvalidBeta(f64),
    #[error(
        "case undefined: |G1|-|C2| = {lhs}, |G2|-|C1| = {mid}, |C12|-|G0| = {rhs} violate lhs >= mid > rhs"
    )]
    CaseUndefined { lhs: i64, mid: i64, rhs: i64 },
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// How per-index conditional entropies are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyMethod {
    /// Erasure-parameter recursion; exact for erasure-type laws.
    ExactBec,
    /// Average of `-log2` of the realized SC posterior over sampled blocks.
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact conditional entropies by summing over all blocks (n <= 8).
    Enumeration,
}

/// Per-index conditional entropies for every conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub n: usize,
    /// Indexed by [`Conditioning::index`].
    pub values: Vec<Vec<f64>>,
    /// Standard errors for Monte-Carlo estimates.
    pub std_errors: Option<Vec<Vec<f64>>>,
}

impl EntropyProfile {
    pub fn get(&self, cond: Conditioning) -> &[f64] {
        &self.values[cond.index()]
    }
}

// ---------------------------------------------------------------------------
// Small sorted-set helpers
// ---------------------------------------------------------------------------

pub fn mask(set: &[usize], n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in set {
        m[i] = true;
    }
    m
}

pub fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let n = a.iter().chain(b).max().map_or(0, |m| m + 1);
    let mb = mask(b, n);
    a.iter().copied().filter(|&i| mb[i]).collect()
}

pub fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let n = a.iter().chain(b).max().map_or(0, |m| m + 1);
    let mb = mask(b, n);
    a.iter().copied().filter(|&i| !mb[i]).collect()
}

pub fn union(sets: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn complement(a: &[usize], n: usize) -> Vec<usize> {
    let m = mask(a, n);
    (0..n).filter(|&i| !m[i]).collect()
}

/// The first `k` elements of `from` not in `excluded`.
fn lowest(from: &[usize], excluded: &[usize], k: i64, what: &str) -> Result<Vec<usize>, SetError> {
    if k < 0 {
        return Err(SetError::InfeasiblePlan(format!("{what}: negative size {k}")));
    }
    let avail = difference(from, excluded);
    if avail.len() < k as usize {
        return Err(SetError::InfeasiblePlan(format!(
            "{what}: need {k} indices, only {} available",
            avail.len()
        )));
    }
    Ok(avail[..k as usize].to_vec())
}

// ---------------------------------------------------------------------------
// Entropy computation
// ---------------------------------------------------------------------------

/// Per-index entropies for all six conditionings.
pub fn compute_entropies(
    spec: &DmsSpec,
    n: usize,
    method: EntropyMethod,
) -> Result<EntropyProfile, SetError> {
    compute_entropies_parallel(spec, n, method, 1)
}

/// As [`compute_entropies`], spreading Monte-Carlo work over `workers` threads.
/// The result does not depend on `workers`.
pub fn compute_entropies_parallel(
    spec: &DmsSpec,
    n: usize,
    method: EntropyMethod,
    workers: usize,
) -> Result<EntropyProfile, SetError> {
    check_block_length(n)?;
    let mut values = Vec::with_capacity(6);
    let mut errors = Vec::with_capacity(6);
    for cond in Conditioning::ALL {
        let law = spec.symbol_law(cond);
        match method {
            EntropyMethod::ExactBec => values.push(exact_bec_entropies(&law, n).ok_or_else(|| {
                SetError::MethodUnsupported(format!(
                    "exact_bec needs an erasure-type law with a uniform or constant source ({})",
                    cond.label()
                ))
            })?),
            EntropyMethod::Enumeration => {
                if n > MAX_ENUMERATION_N {
                    return Err(SetError::MethodUnsupported(format!(
                        "enumeration limited to n <= {MAX_ENUMERATION_N}, got {n}"
                    )));
                }
                values.push(enumeration_entropies(&law, n));
            }
            EntropyMethod::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(SetError::MethodUnsupported(
                        "monte_carlo needs at least 2 samples".into(),
                    ));
                }
                let (mean, se) =
                    monte_carlo_entropies(&law, n, samples, seed, cond.index() as u64, workers);
                values.push(mean);
                errors.push(se);
            }
        }
    }
    let std_errors = matches!(method, EntropyMethod::MonteCarlo { .. }).then_some(errors);
    Ok(EntropyProfile {
        n,
        values,
        std_errors,
    })
}

/// Erasure probability of a law whose side symbols either determine the
/// source bit or carry no information about it, with a uniform source bit.
/// Returns `Some(0.0)` for a constant source.
fn erasure_parameter(law: &SymbolLaw) -> Option<f64> {
    let m = law.source_marginal();
    if m[0] == 0.0 || m[1] == 0.0 {
        return Some(0.0);
    }
    if (m[0] - m[1]).abs() > 1e-12 {
        return None;
    }
    let mut z = 0.0;
    for row in &law.joint {
        if row[0] > 0.0 && row[1] > 0.0 {
            if (row[0] - row[1]).abs() > 1e-12 * (row[0] + row[1]) {
                return None;
            }
            z += row[0] + row[1];
        }
    }
    Some(z.min(1.0))
}

fn exact_bec_entropies(law: &SymbolLaw, n: usize) -> Option<Vec<f64>> {
    let z = erasure_parameter(law)?;
    fn rec(n: usize, z: f64, out: &mut Vec<f64>) {
        if n == 1 {
            out.push(z);
        } else {
            rec(n / 2, 2.0 * z - z * z, out);
            rec(n / 2, z * z, out);
        }
    }
    let mut out = Vec::with_capacity(n);
    rec(n, z, &mut out);
    Some(out)
}

/// Exact `H(U_j | U_{<j}, S^n)` by summing over every side sequence.
///
/// Side symbols with identical posterior rows are merged first; this leaves
/// the conditional entropies unchanged because the block law of `U` depends on
/// the side sequence only through those rows.
fn enumeration_entropies(law: &SymbolLaw, n: usize) -> Vec<f64> {
    let mut merged: Vec<([f64; 2], f64)> = Vec::new();
    for row in &law.joint {
        let mass = row[0] + row[1];
        if mass <= 0.0 {
            continue;
        }
        let post = [row[0] / mass, row[1] / mass];
        match merged
            .iter_mut()
            .find(|(p, _)| (p[0] - post[0]).abs() < 1e-15)
        {
            Some(entry) => entry.1 += mass,
            None => merged.push((post, mass)),
        }
    }
    let k = merged.len();
    let size = 1usize << n;
    let mut acc = vec![0.0; n + 1]; // acc[j] = H(U_{<j} | S)
    let mut digits = vec![0usize; n];
    let mut table = vec![0.0; size];
    loop {
        let p_side: f64 = digits.iter().map(|&d| merged[d].1).product();
        if p_side > 0.0 {
            // table indexed by u with u_0 as the most significant bit.
            for (idx, slot) in table.iter_mut().enumerate() {
                let mut v: Vec<u8> = (0..n).map(|b| ((idx >> (n - 1 - b)) & 1) as u8).collect();
                transform_in_place(&mut v);
                *slot = v
                    .iter()
                    .zip(&digits)
                    .map(|(&b, &d)| merged[d].0[b as usize])
                    .product();
            }
            let mut level = table.clone();
            for j in (0..=n).rev() {
                // level holds the law of U_{<j}.
                acc[j] += p_side * crate::channel::entropy_bits(&level);
                if j > 0 {
                    level = level.chunks(2).map(|c| c[0] + c[1]).collect();
                }
            }
        }
        // odometer
        let mut pos = 0;
        while pos < n {
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    (0..n).map(|j| (acc[j + 1] - acc[j]).clamp(0.0, 1.0)).collect()
}

const MC_CHUNK: usize = 512;

fn monte_carlo_chunk(law: &SymbolLaw, n: usize, count: usize, seed: u64, stream: u64, chunk: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = substream(seed, Purpose::Entropy, chunk, stream);
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut v = vec![0u8; n];
    let mut w = vec![[0.0; 2]; n];
    for _ in 0..count {
        for k in 0..n {
            let (b, s) = law.sample(&mut rng);
            v[k] = b;
            w[k] = law.joint[s];
        }
        let mut u = v.clone();
        transform_in_place(&mut u);
        successive_cancellation(&w, &mut |j: usize, p0: f64| {
            let p = if u[j] == 0 { p0 } else { 1.0 - p0 };
            let cost = -p.max(f64::MIN_POSITIVE).log2();
            sum[j] += cost;
            sq[j] += cost * cost;
            u[j]
        });
    }
    (sum, sq)
}

fn monte_carlo_entropies(
    law: &SymbolLaw,
    n: usize,
    samples: usize,
    seed: u64,
    stream: u64,
    workers: usize,
) -> (Vec<f64>, Vec<f64>) {
    let chunks: Vec<(u64, usize)> = (0..samples.div_ceil(MC_CHUNK))
        .map(|c| (c as u64, MC_CHUNK.min(samples - c * MC_CHUNK)))
        .collect();
    let workers = workers.max(1).min(chunks.len().max(1));
    let mut results: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; chunks.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let chunks = &chunks;
                scope.spawn(move || {
                    chunks
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i % workers == w)
                        .map(|(i, &(c, count))| (i, monte_carlo_chunk(law, n, count, seed, stream, c)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("entropy worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for (s, q) in results.into_iter().flatten() {
        for j in 0..n {
            sum[j] += s[j];
            sq[j] += q[j];
        }
    }
    let m = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = (0..n)
        .map(|j| {
            let var = ((sq[j] / m) - mean[j] * mean[j]).max(0.0) * m / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    (mean.into_iter().map(|h| h.clamp(0.0, 1.0)).collect(), se)
}

// ---------------------------------------------------------------------------
// Polarized sets
// ---------------------------------------------------------------------------

/// `2^{-n^beta}`.
pub fn delta_n(n: usize, beta: f64) -> f64 {
    2f64.powf(-(n as f64).powf(beta))
}

/// High and low sets for every conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedSets {
    pub n: usize,
    pub beta: f64,
    pub delta_n: f64,
    /// Indexed by [`Conditioning::index`].
    pub high: Vec<Vec<usize>>,
    pub low: Vec<Vec<usize>>,
    /// Entropies after the monotonicity adjustment, indexed like `high`.
    pub entropies: Vec<Vec<f64>>,
}

impl PolarizedSets {
    pub fn high(&self, cond: Conditioning) -> &[usize] {
        &self.high[cond.index()]
    }

    pub fn low(&self, cond: Conditioning) -> &[usize] {
        &self.low[cond.index()]
    }

    /// `H_V ∩ (L_{V|Yk})^C` for receiver `k` in {1, 2}.
    pub fn upsilon_set(&self, receiver: usize) -> Vec<usize> {
        difference(self.high(Conditioning::V), self.low(receiver_cond(receiver)))
    }

    /// `(H_V)^C ∩ (L_{V|Yk})^C` for receiver `k` in {1, 2}.
    pub fn phi_set(&self, receiver: usize) -> Vec<usize> {
        let not_h = complement(self.high(Conditioning::V), self.n);
        difference(&not_h, self.low(receiver_cond(receiver)))
    }

    /// `H_{X|V} \ H_{X|VZ}`.
    pub fn randomizer_set(&self) -> Vec<usize> {
        difference(self.high(Conditioning::XGivenV), self.high(Conditioning::XGivenVZ))
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for cond in Conditioning::ALL {
            let h = self.high(cond);
            let l = self.low(cond);
            if !intersect(h, l).is_empty() {
                return Err(format!("H and L overlap for {}", cond.label()));
            }
            let e = &self.entropies[cond.index()];
            for j in 0..self.n {
                let in_h = h.binary_search(&j).is_ok();
                let in_l = l.binary_search(&j).is_ok();
                if in_h != (e[j] >= 1.0 - self.delta_n) {
                    return Err(format!("H membership of {j} for {}", cond.label()));
                }
                if !in_h && in_l != (e[j] <= self.delta_n) {
                    return Err(format!("L membership of {j} for {}", cond.label()));
                }
            }
        }
        let subset = |a: &[usize], b: &[usize]| difference(a, b).is_empty();
        if !subset(self.high(Conditioning::VGivenZ), self.high(Conditioning::V)) {
            return Err("H_{V|Z} not inside H_V".into());
        }
        for c in [Conditioning::VGivenY1, Conditioning::VGivenY2] {
            if !subset(self.low(Conditioning::V), self.low(c)) {
                return Err(format!("L_V not inside L_{}", c.label()));
            }
        }
        if !subset(self.high(Conditioning::XGivenVZ), self.high(Conditioning::XGivenV)) {
            return Err("H_{X|VZ} not inside H_{X|V}".into());
        }
        Ok(())
    }
}

pub fn receiver_cond(receiver: usize) -> Conditioning {
    match receiver {
        1 => Conditioning::VGivenY1,
        2 => Conditioning::VGivenY2,
        _ => panic!("receiver must be 1 or 2"),
    }
}

/// Thresholds entropies at `1 - δ_n` and `δ_n`.
///
/// Estimated entropies may violate "conditioning reduces entropy" by noise;
/// each conditioned vector is first capped by its less-conditioned
/// counterpart, which leaves exact entropies unchanged.
pub fn build_polarized_sets(
    profile: &EntropyProfile,
    beta: f64,
) -> Result<PolarizedSets, SetError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SetError::InvalidBeta(beta));
    }
    let n = profile.n;
    check_block_length(n)?;
    let delta = delta_n(n, beta);
    let mut ent = profile.values.clone();
    let cap = |ent: &mut Vec<Vec<f64>>, child: Conditioning, parent: Conditioning| {
        for j in 0..n {
            let p = ent[parent.index()][j];
            let c = &mut ent[child.index()][j];
            *c = c.min(p);
        }
    };
    for child in [Conditioning::VGivenY1, Conditioning::VGivenY2, Conditioning::VGivenZ] {
        cap(&mut ent, child, Conditioning::V);
    }
    cap(&mut ent, Conditioning::XGivenVZ, Conditioning::XGivenV);
    let mut high = Vec::with_capacity(6);
    let mut low = Vec::with_capacity(6);
    for e in &ent {
        let h: Vec<usize> = (0..n).filter(|&j| e[j] >= 1.0 - delta).collect();
        let hm = mask(&h, n);
        let l: Vec<usize> = (0..n).filter(|&j| !hm[j] && e[j] <= delta).collect();
        high.push(h);
        low.push(l);
    }
    Ok(PolarizedSets {
        n,
        beta,
        delta_n: delta,
        high,
        low,
        entropies: ent,
    })
}

// ---------------------------------------------------------------------------
// Partition of H_V
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighSetPartition {
    pub g: Vec<usize>,
    pub c: Vec<usize>,
    pub g0: Vec<usize>,
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub g12: Vec<usize>,
    pub c0: Vec<usize>,
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub c12: Vec<usize>,
}

/// Splits `H_V` into `G = H_{V|Z}` and `C = H_V \ H_{V|Z}`, and each of these
/// by membership in `L_{V|Y1}` and `L_{V|Y2}`: suffix 0 is decodable by both
/// receivers, 1 only by receiver 2 (so needed by receiver 1), 2 only by
/// receiver 1, 12 by neither.
pub fn partition_high_set(sets: &PolarizedSets) -> HighSetPartition {
    let g = sets.high(Conditioning::VGivenZ).to_vec();
    let c = difference(sets.high(Conditioning::V), &g);
    let l1 = sets.low(Conditioning::VGivenY1);
    let l2 = sets.low(Conditioning::VGivenY2);
    let cells = |base: &[usize]| {
        let in1 = intersect(base, l1);
        let out1 = difference(base, l1);
        (
            intersect(&in1, l2),
            difference(&out1, &difference(&out1, l2)),
            difference(&in1, l2),
            difference(&out1, l2),
        )
    };
    let (g0, g1, g2, g12) = cells(&g);
    let (c0, c1, c2, c12) = cells(&c);
    HighSetPartition {
        g,
        c,
        g0,
        g1,
        g2,
        g12,
        c0,
        c1,
        c2,
        c12,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainingCase {
    A,
    B,
    C,
    D,
}

impl ChainingCase {
    pub const ALL: [ChainingCase; 4] = [ChainingCase::A, ChainingCase::B, ChainingCase::C, ChainingCase::D];
}

impl std::fmt::Display for ChainingCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Cell sizes `(|G1|, |C2|, |G2|, |C1|, |G0|, |C12|)`.
pub fn classify_sizes(g1: usize, c2: usize, g2: usize, c1: usize, g0: usize, c12: usize) -> Result<ChainingCase, SetError> {
    let (g1, c2, g2, c1, g0, c12) = (g1 as i64, c2 as i64, g2 as i64, c1 as i64, g0 as i64, c12 as i64);
    let lhs = g1 - c2;
    let mid = g2 - c1;
    let rhs = c12 - g0;
    if !(lhs >= mid && mid > rhs) {
        return Err(SetError::CaseUndefined { lhs, mid, rhs });
    }
    if g1 > c2 && g2 > c1 {
        Ok(if g0 >= c12 { ChainingCase::A } else { ChainingCase::B })
    } else if g1 >= c2 && g2 <= c1 && g0 > c12 {
        Ok(ChainingCase::C)
    } else if g1 < c2 && g2 < c1 && g0 > c12 {
        Ok(ChainingCase::D)
    } else {
        // Unreachable when the ordering inequality holds.
        Err(SetError::CaseUndefined { lhs, mid, rhs })
    }
}

pub fn classify_case(p: &HighSetPartition) -> Result<ChainingCase, SetError> {
    classify_sizes(p.g1.len(), p.c2.len(), p.g2.len(), p.c1.len(), p.g0.len(), p.c12.len())
}

/// Lengths of the first and second parts of each carried sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub psi: (usize, usize),
    pub gamma: (usize, usize),
    pub theta_bar: (usize, usize),
    pub gamma_bar: (usize, usize),
}

/// The partition of `G` used to chain consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainingPlan {
    pub case: ChainingCase,
    /// Carries the first part of the next block's encrypted `C1` content.
    pub r1: Vec<usize>,
    /// Carries the second part of the next block's encrypted `C12` content.
    pub r1p: Vec<usize>,
    /// Carries the first part of the previous block's `C2` content.
    pub r2: Vec<usize>,
    /// Carries the second part of the previous block's `C12` content.
    pub r2p: Vec<usize>,
    /// XOR of previous `C12` content and next encrypted `C12` content.
    pub r12: Vec<usize>,
    /// XOR of previous `C2` content and next encrypted `C1` content.
    pub r12p: Vec<usize>,
    /// Fresh confidential bits in every block.
    pub info: Vec<usize>,
    /// Repeats the previous block's `I ∩ G2` content.
    pub rs: Vec<usize>,
    /// Repeats the first block's content at these positions in every block.
    pub rlambda: Vec<usize>,
    pub splits: SplitSizes,
}

impl ChainingPlan {
    /// The nine lists in a fixed order.
    pub fn lists(&self) -> [(&'static str, &[usize]); 9] {
        [
            ("R1", &self.r1),
            ("R1'", &self.r1p),
            ("R2", &self.r2),
            ("R2'", &self.r2p),
            ("R12", &self.r12),
            ("R12'", &self.r12p),
            ("I", &self.info),
            ("R_S", &self.rs),
            ("R_Lambda", &self.rlambda),
        ]
    }

    /// Verifies the plan against its partition: the nine lists partition `G`,
    /// the size identities hold, and the subset relations of the case hold.
    pub fn check(&self, p: &HighSetPartition) -> Result<(), String> {
        let mut all: Vec<usize> = self.lists().iter().flat_map(|(_, s)| s.iter().copied()).collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err("chaining lists overlap".into());
        }
        if all != p.g {
            return Err("chaining lists do not cover G exactly".into());
        }
        let eq = |a: usize, b: usize, what: &str| {
            if a == b {
                Ok(())
            } else {
                Err(format!("{what}: {a} != {b}"))
            }
        };
        eq(self.r1.len() + self.r12p.len(), p.c1.len(), "|R1|+|R12'| = |C1|")?;
        eq(self.r12.len() + self.r1p.len(), p.c12.len(), "|R12|+|R1'| = |C12|")?;
        eq(self.r2.len() + self.r12p.len(), p.c2.len(), "|R2|+|R12'| = |C2|")?;
        eq(self.r12.len() + self.r2p.len(), p.c12.len(), "|R12|+|R2'| = |C12|")?;
        eq(self.rs.len(), intersect(&self.info, &p.g2).len(), "|R_S| = |I ∩ G2|")?;
        let expected_lambda = union(&[&p.g12, &difference(&p.g1, &union(&[&self.r2, &self.r2p, &self.rs]))]);
        if self.rlambda != expected_lambda {
            return Err("R_Lambda != G12 ∪ (G1 \\ (R2 ∪ R2' ∪ R_S))".into());
        }
        let inside = |a: &[usize], b: &[usize], what: &str| {
            if difference(a, b).is_empty() {
                Ok(())
            } else {
                Err(format!("{what} not contained as required"))
            }
        };
        inside(&self.r2, &p.g1, "R2 ⊆ G1")?;
        inside(&self.r2p, &p.g1, "R2' ⊆ G1")?;
        inside(&self.rs, &p.g1, "R_S ⊆ G1")?;
        inside(&self.r1p, &p.g2, "R1' ⊆ G2")?;
        inside(&self.r12, &p.g0, "R12 ⊆ G0")?;
        inside(&self.r12p, &p.g0, "R12' ⊆ G0")?;
        inside(&self.info, &union(&[&p.g0, &p.g2]), "I ⊆ G0 ∪ G2")?;
        inside(&self.r1, &union(&[&p.g0, &p.g2]), "R1 ⊆ G0 ∪ G2")?;
        let s = &self.splits;
        eq(s.psi.0 + s.psi.1, p.c2.len(), "|Ψ|")?;
        eq(s.gamma.0 + s.gamma.1, p.c12.len(), "|Γ|")?;
        eq(s.theta_bar.0 + s.theta_bar.1, p.c1.len(), "|Θ̄|")?;
        eq(s.gamma_bar.0 + s.gamma_bar.1, p.c12.len(), "|Γ̄|")?;
        match self.case {
            ChainingCase::A | ChainingCase::B => {
                inside(&self.r1, &p.g2, "R1 ⊆ G2")?;
                if !self.r12p.is_empty() {
                    return Err("R12' must be empty".into());
                }
            }
            ChainingCase::C => {
                inside(&p.g2, &self.r1, "G2 ⊆ R1")?;
                if !(self.r1p.is_empty() && self.r2p.is_empty() && self.r12p.is_empty() && self.rs.is_empty()) {
                    return Err("case C primed sets and R_S must be empty".into());
                }
            }
            ChainingCase::D => {
                inside(&p.g2, &self.r1, "G2 ⊆ R1")?;
                if self.r2 != p.g1 {
                    return Err("case D needs R2 = G1".into());
                }
                if !(self.r1p.is_empty() && self.r2p.is_empty() && self.rs.is_empty()) {
                    return Err("case D R1', R2', R_S must be empty".into());
                }
            }
        }
        Ok(())
    }
}

/// Builds the chaining lists for `case`, choosing lowest indices first
/// whenever a subset of a given size is required.
pub fn derive_chaining_plan(p: &HighSetPartition, case: ChainingCase) -> Result<ChainingPlan, SetError> {
    let sz = |s: &Vec<usize>| s.len() as i64;
    let none: &[usize] = &[];
    let (r1, r1p, r2, r2p, r12, r12p) = match case {
        ChainingCase::A => (
            lowest(&p.g2, none, sz(&p.c1), "R1")?,
            vec![],
            lowest(&p.g1, none, sz(&p.c2), "R2")?,
            vec![],
            lowest(&p.g0, none, sz(&p.c12), "R12")?,
            vec![],
        ),
        ChainingCase::B => {
            let r1 = lowest(&p.g2, none, sz(&p.c1), "R1")?;
            let r2 = lowest(&p.g1, none, sz(&p.c2), "R2")?;
            let extra = sz(&p.c12) - sz(&p.g0);
            let r1p = lowest(&p.g2, &r1, extra, "R1'")?;
            let r2p = lowest(&p.g1, &r2, extra, "R2'")?;
            (r1, r1p, r2, r2p, p.g0.clone(), vec![])
        }
        ChainingCase::C => {
            let r2 = lowest(&p.g1, none, sz(&p.c2), "R2")?;
            let r12 = lowest(&p.g0, none, sz(&p.c12), "R12")?;
            let extra = lowest(&p.g0, &r12, sz(&p.c1) - sz(&p.g2), "R1 ∩ G0")?;
            let r1 = union(&[&p.g2, &extra]);
            (r1, vec![], r2, vec![], r12, vec![])
        }
        ChainingCase::D => {
            let r12 = lowest(&p.g0, none, sz(&p.c12), "R12")?;
            let r12p = lowest(&p.g0, &r12, sz(&p.c2) - sz(&p.g1), "R12'")?;
            let used = union(&[&r12, &r12p]);
            let k = sz(&p.c1) - sz(&p.g2) - (sz(&p.c2) - sz(&p.g1));
            let extra = lowest(&p.g0, &used, k, "R1 ∩ G0")?;
            let r1 = union(&[&p.g2, &extra]);
            (r1, vec![], p.g1.clone(), vec![], r12, r12p)
        }
    };
    let info = difference(&union(&[&p.g0, &p.g2]), &union(&[&r1, &r1p, &r12, &r12p]));
    let rs_size = intersect(&info, &p.g2).len() as i64;
    let rs = lowest(&p.g1, &union(&[&r2, &r2p]), rs_size, "R_S")?;
    let rlambda = union(&[&p.g12, &difference(&p.g1, &union(&[&r2, &r2p, &rs]))]);
    let splits = SplitSizes {
        psi: (r2.len(), r12p.len()),
        gamma: (r12.len(), r2p.len()),
        theta_bar: (r1.len(), r12p.len()),
        gamma_bar: (r12.len(), r1p.len()),
    };
    let plan = ChainingPlan {
        case,
        r1,
        r1p,
        r2,
        r2p,
        r12,
        r12p,
        info,
        rs,
        rlambda,
        splits,
    };
    plan.check(p).map_err(SetError::InfeasiblePlan)?;
    Ok(plan)
}

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

/// Rates achieved by a concrete design over `L` blocks, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub blocks: usize,
    pub private: f64,
    pub confidential: f64,
    pub randomization: f64,
    pub key: f64,
    pub extra_randomness: f64,
}

pub fn rate_report(plan: &ChainingPlan, p: &HighSetPartition, sets: &PolarizedSets, blocks: usize) -> RateReport {
    let n = sets.n;
    let nl = (n * blocks) as f64;
    let l = blocks as f64;
    let first = union(&[&plan.info, &p.g1, &p.g12]).len() as f64;
    let last = union(&[&plan.info, &p.g2]).len() as f64;
    let confidential = ((l - 2.0) * plan.info.len() as f64 + first + last) / nl;
    let side: f64 = (1..=2)
        .map(|k| l * sets.phi_set(k).len() as f64 + sets.upsilon_set(k).len() as f64)
        .sum();
    let key = (p.c1.len() as f64 + p.c12.len() as f64 + side) / nl;
    let v_mid = difference(&complement(sets.high(Conditioning::V), n), sets.low(Conditioning::V)).len();
    let x_mid = difference(
        &complement(sets.high(Conditioning::XGivenV), n),
        sets.low(Conditioning::XGivenV),
    )
    .len();
    let extra_randomness =
        (sets.high(Conditioning::XGivenVZ).len() as f64 + l * v_mid as f64 + l * x_mid as f64) / nl;
    RateReport {
        n,
        blocks,
        private: p.c.len() as f64 / n as f64,
        confidential,
        randomization: sets.randomizer_set().len() as f64 / n as f64,
        key,
        extra_randomness,
    }
}

// ---------------------------------------------------------------------------
// Complete design
// ---------------------------------------------------------------------------

/// Everything the encoder and decoders need about a code: the law it was
/// designed for, its sets, partition and chaining plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub spec: DmsSpec,
    pub sets: PolarizedSets,
    pub partition: HighSetPartition,
    pub plan: ChainingPlan,
}

impl Design {
    pub fn from_sets(spec: DmsSpec, sets: PolarizedSets) -> Result<Self, SetError> {
        let partition = partition_high_set(&sets);
        let case = classify_case(&partition)?;
        let plan = derive_chaining_plan(&partition, case)?;
        Ok(Design {
            spec,
            sets,
            partition,
            plan,
        })
    }

    /// Computes entropies with `method` and builds the full design. `spec`
    /// should already be ordered by [`crate::channel::validate_and_order`].
    pub fn construct(spec: &DmsSpec, n: usize, beta: f64, method: EntropyMethod) -> Result<Self, SetError> {
        let profile = compute_entropies(spec, n, method)?;
        let sets = build_polarized_sets(&profile, beta)?;
        Self::from_sets(spec.clone(), sets)
    }

    pub fn n(&self) -> usize {
        self.sets.n
    }

    pub fn case(&self) -> ChainingCase {
        self.plan.case
    }

    pub fn rates(&self, blocks: usize) -> RateReport {
        rate_report(&self.plan, &self.partition, &self.sets, blocks)
    }
}

// ---------------------------------------------------------------------------
// Synthetic sets
// ---------------------------------------------------------------------------

/// Cell sizes of a synthetic `H_V` partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSizes {
    pub g0: usize,
    pub g1: usize,
    pub g2: usize,
    pub g12: usize,
    pub c0: usize,
    pub c1: usize,
    pub c2: usize,
    pub c12: usize,
}

impl CellSizes {
    pub fn total(&self) -> usize {
        self.g0 + self.g1 + self.g2 + self.g12 + self.c0 + self.c1 + self.c2 + self.c12
    }

    pub fn case(&self) -> Result<ChainingCase, SetError> {
        classify_sizes(self.g1, self.c2, self.g2, self.c1, self.g0, self.c12)
    }

    /// Draws sizes in `0..=max_cell` until they classify as `case`.
    pub fn random_for_case<R: rand::Rng + ?Sized>(case: ChainingCase, max_cell: usize, rng: &mut R) -> Self {
        loop {
            let mut d = || rng.gen_range(0..=max_cell);
            let s = CellSizes {
                g0: d(),
                g1: d(),
                g2: d(),
                g12: d(),
                c0: d(),
                c1: d(),
                c2: d(),
                c12: d(),
            };
            if s.case().ok() == Some(case) {
                return s;
            }
        }
    }
}

/// Builds polarized sets with the given cell sizes placed at random indices of
/// a block of length `n`, with randomly chosen V-layer memberships for the
/// remaining indices. The X-layer is deterministic (`X = V`), so the sets can
/// be paired with any spec whose input law has `X = V`. Entropies are
/// synthetic (0, 1/2 or 1) and consistent with the sets.
pub fn synthetic_sets<R: rand::Rng + ?Sized>(
    sizes: CellSizes,
    n: usize,
    beta: f64,
    rng: &mut R,
) -> Result<PolarizedSets, SetError> {
    use rand::seq::SliceRandom;
    check_block_length(n)?;
    if sizes.total() > n {
        return Err(SetError::InfeasiblePlan(format!(
            "{} cells do not fit in n = {n}",
            sizes.total()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // (in G, in L1, in L2) per cell.
    let cells = [
        (sizes.g0, true, true, true),
        (sizes.g1, true, false, true),
        (sizes.g2, true, true, false),
        (sizes.g12, true, false, false),
        (sizes.c0, false, true, true),
        (sizes.c1, false, false, true),
        (sizes.c2, false, true, false),
        (sizes.c12, false, false, false),
    ];
    let mut ent = vec![vec![0.0; n]; 6];
    let mut pos = 0;
    let idx = |c: Conditioning| c.index();
    for &(count, in_g, in_l1, in_l2) in &cells {
        for _ in 0..count {
            let j = order[pos];
            pos += 1;
            ent[idx(Conditioning::V)][j] = 1.0;
            ent[idx(Conditioning::VGivenZ)][j] = if in_g { 1.0 } else { 0.5 };
            ent[idx(Conditioning::VGivenY1)][j] = if in_l1 { 0.0 } else { 0.5 };
            ent[idx(Conditioning::VGivenY2)][j] = if in_l2 { 0.0 } else { 0.5 };
        }
    }
    for &j in &order[pos..] {
        let v = *[0.0, 0.5].choose(rng).unwrap();
        ent[idx(Conditioning::V)][j] = v;
        ent[idx(Conditioning::VGivenZ)][j] = v;
        for c in [Conditioning::VGivenY1, Conditioning::VGivenY2] {
            ent[idx(c)][j] = if v == 0.0 { 0.0 } else { *[0.0, 0.5].choose(rng).unwrap() };
        }
    }
    build_polarized_sets(
        &EntropyProfile {
            n,
            values: ent,
            std_errors: None,
        },
        beta,
    )
}

/// Entropies of the whole profile as a map keyed by conditioning label, for
/// reports.
pub fn labelled(profile: &EntropyProfile) -> HashMap<&'static str, Vec<f64>> {
    Conditioning::ALL
        .iter()
        .map(|&c| (c.label(), profile.get(c).to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ComponentChannel;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn profile_from(n: usize, each: Vec<f64>) -> EntropyProfile {
        EntropyProfile {
            n,
            values: vec![each; 6],
            std_errors: None,
        }
    }

    #[test]
    fn bec_half_at_n2() {
        let spec = DmsSpec::bec_triple(0.5, 0.5, 0.5);
        let e = compute_entropies(&spec, 2, EntropyMethod::ExactBec).unwrap();
        assert_eq!(e.get(Conditioning::VGivenY1), &[0.75, 0.25]);
        let en = compute_entropies(&spec, 2, EntropyMethod::Enumeration).unwrap();
        for (a, b) in en.get(Conditioning::VGivenY1).iter().zip([0.75, 0.25]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_source_without_side_info() {
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        for n in [1, 4, 64] {
            let e = compute_entropies(&spec, n, EntropyMethod::ExactBec).unwrap();
            assert!(e.get(Conditioning::V).iter().all(|&h| h == 1.0));
        }
        let e = compute_entropies(&spec, 4, EntropyMethod::Enumeration).unwrap();
        assert!(e.get(Conditioning::V).iter().all(|&h| (h - 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_source_has_zero_entropy() {
        let spec = DmsSpec {
            input_law: [1.0, 0.0, 0.0, 0.0],
            ..DmsSpec::bec_triple(0.4, 0.3, 0.7)
        };
        for method in [EntropyMethod::ExactBec, EntropyMethod::Enumeration] {
            let e = compute_entropies(&spec, 4, method).unwrap();
            for c in Conditioning::ALL {
                assert!(e.get(c).iter().all(|&h| h.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn exact_bec_rejects_bsc() {
        let mut spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        spec.y1 = ComponentChannel::Bsc { crossover: 0.1 };
        assert!(matches!(
            compute_entropies(&spec, 4, EntropyMethod::ExactBec),
            Err(SetError::MethodUnsupported(_))
        ));
        assert!(matches!(
            compute_entropies(&spec, 16, EntropyMethod::Enumeration),
            Err(SetError::MethodUnsupported(_))
        ));
    }

    #[test]
    fn threshold_example_n2() {
        // δ_2 = 2^{-2^{0.3}} ≈ 0.42598, so 0.75 >= 1 - δ_2 ≈ 0.57402.
        let sets = build_polarized_sets(&profile_from(2, vec![0.75, 0.25]), 0.3).unwrap();
        assert!((sets.delta_n - 0.425_979_404_991_349_7).abs() < 1e-12);
        assert_eq!(sets.high(Conditioning::V), &[0]);
        assert_eq!(sets.low(Conditioning::V), &[1]);
    }

    #[test]
    fn threshold_extremes() {
        let all_high = build_polarized_sets(&profile_from(8, vec![1.0; 8]), 0.3).unwrap();
        assert_eq!(all_high.high(Conditioning::V), (0..8).collect::<Vec<_>>());
        assert!(all_high.low(Conditioning::V).is_empty());
        let all_low = build_polarized_sets(&profile_from(8, vec![0.0; 8]), 0.3).unwrap();
        assert_eq!(all_low.low(Conditioning::V), (0..8).collect::<Vec<_>>());
        assert!(all_low.high(Conditioning::V).is_empty());
        assert_eq!(
            build_polarized_sets(&profile_from(8, vec![0.0; 8]), 0.6),
            Err(SetError::InvalidBeta(0.6))
        );
    }

    fn sets_with(n: usize, hv: &[usize], hvz: &[usize], l1: &[usize], l2: &[usize]) -> PolarizedSets {
        let mut values = vec![vec![0.5; n]; 6];
        for &j in hv {
            values[Conditioning::V.index()][j] = 1.0;
        }
        for &j in hvz {
            values[Conditioning::VGivenZ.index()][j] = 1.0;
        }
        for &j in l1 {
            values[Conditioning::VGivenY1.index()][j] = 0.0;
        }
        for &j in l2 {
            values[Conditioning::VGivenY2.index()][j] = 0.0;
        }
        build_polarized_sets(&EntropyProfile { n, values, std_errors: None }, 0.3).unwrap()
    }

    #[test]
    fn partition_example() {
        // 1-based {1,2,3}, {1,2}, {2,3}, {1,2,3} shifted to 0-based.
        let sets = sets_with(4, &[0, 1, 2], &[0, 1], &[1, 2], &[0, 1, 2]);
        let p = partition_high_set(&sets);
        assert_eq!(p.g, vec![0, 1]);
        assert_eq!(p.c, vec![2]);
        assert_eq!(p.g0, vec![1]);
        assert_eq!(p.g1, vec![0]);
        assert_eq!(p.c0, vec![2]);
        assert!(p.g2.is_empty() && p.g12.is_empty() && p.c1.is_empty() && p.c2.is_empty() && p.c12.is_empty());
    }

    #[test]
    fn partition_edge_cases() {
        let sets = sets_with(4, &[0, 1], &[0, 1], &[], &[]);
        assert!(partition_high_set(&sets).c.is_empty());
        let sets = sets_with(4, &[0, 1, 2], &[0], &[0, 1, 2, 3], &[0, 1, 2, 3]);
        let p = partition_high_set(&sets);
        assert_eq!(p.g0, p.g);
        assert_eq!(p.c0, p.c);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_sizes(3, 1, 2, 1, 2, 1), Ok(ChainingCase::A));
        // (3,1,2,1,0,1) gives |G2|-|C1| = |C12|-|G0| = 1, so the strict
        // ordering inequality fails.
        assert!(matches!(classify_sizes(3, 1, 2, 1, 0, 1), Err(SetError::CaseUndefined { .. })));
        assert_eq!(classify_sizes(3, 1, 3, 1, 0, 1), Ok(ChainingCase::B));
        assert_eq!(classify_sizes(1, 2, 1, 2, 3, 1), Ok(ChainingCase::D));
        assert_eq!(classify_sizes(2, 1, 1, 2, 3, 0), Ok(ChainingCase::C));
        assert!(matches!(classify_sizes(0, 0, 0, 0, 0, 0), Err(SetError::CaseUndefined { .. })));
    }

    fn partition_from_sizes(s: CellSizes) -> HighSetPartition {
        let mut next = 0;
        let mut take = |k: usize| {
            let v: Vec<usize> = (next..next + k).collect();
            next += k;
            v
        };
        let (g0, g1, g2, g12) = (take(s.g0), take(s.g1), take(s.g2), take(s.g12));
        let (c0, c1, c2, c12) = (take(s.c0), take(s.c1), take(s.c2), take(s.c12));
        HighSetPartition {
            g: union(&[&g0, &g1, &g2, &g12]),
            c: union(&[&c0, &c1, &c2, &c12]),
            g0,
            g1,
            g2,
            g12,
            c0,
            c1,
            c2,
            c12,
        }
    }

    #[test]
    fn plan_case_a() {
        let s = CellSizes { g0: 2, g1: 3, g2: 2, g12: 1, c0: 0, c1: 1, c2: 1, c12: 1 };
        let p = partition_from_sizes(s);
        let plan = derive_chaining_plan(&p, ChainingCase::A).unwrap();
        assert_eq!(plan.r1, vec![p.g2[0]]);
        assert_eq!(plan.r2, vec![p.g1[0]]);
        assert_eq!(plan.r12, vec![p.g0[0]]);
        assert!(plan.r1p.is_empty() && plan.r2p.is_empty() && plan.r12p.is_empty());
    }

    #[test]
    fn plan_case_b() {
        let s = CellSizes { g0: 0, g1: 3, g2: 2, g12: 0, c0: 0, c1: 1, c2: 1, c12: 1 };
        let p = partition_from_sizes(s);
        let plan = derive_chaining_plan(&p, ChainingCase::B).unwrap();
        assert_eq!(plan.r12, p.g0);
        assert_eq!(plan.r1p.len(), 1);
        assert_eq!(plan.r2p.len(), 1);
    }

    #[test]
    fn plan_case_c_has_no_rs() {
        let s = CellSizes { g0: 3, g1: 2, g2: 1, g12: 1, c0: 1, c1: 2, c2: 1, c12: 0 };
        let p = partition_from_sizes(s);
        let plan = derive_chaining_plan(&p, ChainingCase::C).unwrap();
        assert!(plan.rs.is_empty());
        assert!(intersect(&plan.info, &p.g2).is_empty());
    }

    #[test]
    fn rate_examples() {
        let sets = sets_with(8, &[0, 1, 2, 3], &[0, 1], &[0, 1, 2, 3], &[0, 1, 2, 3]);
        let p = partition_high_set(&sets);
        assert_eq!(p.c.len(), 2);
        let case = classify_case(&p).unwrap();
        let plan = derive_chaining_plan(&p, case).unwrap();
        let r = rate_report(&plan, &p, &sets, 4);
        assert_eq!(r.private, 0.25);
        let sets = sets_with(8, &[0, 1, 2, 3], &[0, 1, 2, 3], &[0, 1, 2, 3], &[0, 1, 2, 3]);
        let p = partition_high_set(&sets);
        let plan = derive_chaining_plan(&p, classify_case(&p).unwrap()).unwrap();
        assert_eq!(rate_report(&plan, &p, &sets, 4).private, 0.0);
    }

    #[test]
    fn confidential_rate_tends_to_info_share() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = CellSizes::random_for_case(ChainingCase::A, 4, &mut rng);
        let sets = synthetic_sets(s, 64, 0.3, &mut rng).unwrap();
        let d = Design::from_sets(DmsSpec::bec_triple(0.4, 0.3, 0.7), sets).unwrap();
        let limit = d.plan.info.len() as f64 / 64.0;
        let gaps: Vec<f64> = [2, 8, 64, 1024].iter().map(|&l| (d.rates(l).confidential - limit).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
        assert!(gaps[3] < 1e-2);
    }

    fn case_strategy() -> impl Strategy<Value = ChainingCase> {
        prop::sample::select(ChainingCase::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn plans_partition_g(case in case_strategy(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sizes = CellSizes::random_for_case(case, 6, &mut rng);
            let n = sizes.total().next_power_of_two().max(2) * 2;
            let sets = synthetic_sets(sizes, n, 0.3, &mut rng).unwrap();
            prop_assert!(sets.check_invariants().is_ok());
            let p = partition_high_set(&sets);
            prop_assert_eq!(classify_case(&p).unwrap(), case);
            let plan = derive_chaining_plan(&p, case).unwrap();
            prop_assert!(plan.check(&p).is_ok());
            // Subset-existence chain from the case analysis.
            let left = difference(&p.g1, &union(&[&plan.r2, &plan.r2p])).len() as i64
                - intersect(&plan.info, &p.g2).len() as i64;
            prop_assert!(left >= 0);
        }

        #[test]
        fn sets_invariants_under_noise(seed in any::<u64>(), m in 1u32..6) {
            let n = 1usize << m;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::Rng;
            let values: Vec<Vec<f64>> = (0..6).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
            let sets = build_polarized_sets(&EntropyProfile { n, values, std_errors: None }, 0.3).unwrap();
            prop_assert!(sets.check_invariants().is_ok());
        }
    }
}
