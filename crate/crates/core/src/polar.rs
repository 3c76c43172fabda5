//! Polar transform and successive-cancellation recursions.
//!
//! The kernel is `F = [[1,0],[1,1]]` applied as a row-vector product
//! `u · F^{⊗m}` in natural index order, so `(u1, u2) -> (u1 ⊕ u2, u2)`. The
//! transform is an involution and the first half of the polarized vector is
//! the transform of the XOR of the two input halves.
//!
//! SC works on per-position likelihood pairs `w[k][b] = P(source bit = b,
//! observation k)`; the decider sees the exact conditional probability that
//! polarized bit `j` is 0 given the decided prefix and the observations.

use crate::channel::SymbolLaw;
use crate::rng::BitSource;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolarError {
    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("side information has length {got}, expected {expected}")]
    SideLength { expected: usize, got: usize },
}

pub fn check_block_length(n: usize) -> Result<(), PolarError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(PolarError::NotPowerOfTwo(n));
    }
    Ok(())
}

/// In-place butterfly; `bits.len()` must be a power of two.
pub fn transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                bits[k] ^= bits[k + h];
            }
        }
        h *= 2;
    }
}

/// `u · G_n` over GF(2).
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>, PolarError> {
    check_block_length(u.len())?;
    let mut out = u.to_vec();
    transform_in_place(&mut out);
    Ok(out)
}

/// Most likely bit, ties to 0.
pub fn argmax_bit(p0: f64) -> u8 {
    if p0 >= 0.5 {
        0
    } else {
        1
    }
}

/// Per-index decision rule used while running SC.
pub trait BitDecider {
    /// Decides polarized bit `j` given `P(bit = 0 | prefix, observations)`.
    fn decide(&mut self, j: usize, p0: f64) -> u8;
}

impl<F: FnMut(usize, f64) -> u8> BitDecider for F {
    fn decide(&mut self, j: usize, p0: f64) -> u8 {
        self(j, p0)
    }
}

fn normalize(p: [f64; 2]) -> [f64; 2] {
    let s = p[0] + p[1];
    if s > 0.0 && s.is_finite() {
        [p[0] / s, p[1] / s]
    } else {
        [0.5, 0.5]
    }
}

fn sc_rec<D: BitDecider + ?Sized>(
    w: &[[f64; 2]],
    offset: usize,
    decider: &mut D,
    u: &mut [u8],
) -> Vec<u8> {
    let n = w.len();
    if n == 1 {
        let p = normalize(w[0]);
        let b = decider.decide(offset, p[0]);
        u[offset] = b;
        return vec![b];
    }
    let h = n / 2;
    let minus: Vec<[f64; 2]> = (0..h)
        .map(|k| {
            let (f, s) = (w[k], w[k + h]);
            normalize([f[0] * s[0] + f[1] * s[1], f[1] * s[0] + f[0] * s[1]])
        })
        .collect();
    let xor_half = sc_rec(&minus, offset, decider, u);
    let plus: Vec<[f64; 2]> = (0..h)
        .map(|k| {
            let (f, s) = (w[k], w[k + h]);
            let c = xor_half[k] as usize;
            normalize([f[c] * s[0], f[c ^ 1] * s[1]])
        })
        .collect();
    let second = sc_rec(&plus, offset + h, decider, u);
    let mut v = Vec::with_capacity(n);
    v.extend(xor_half.iter().zip(&second).map(|(a, b)| a ^ b));
    v.extend_from_slice(&second);
    v
}

/// Runs SC over the likelihood pairs, returning the polarized vector `u`
/// whose transform is the source-domain vector.
pub fn successive_cancellation<D: BitDecider + ?Sized>(w: &[[f64; 2]], decider: &mut D) -> Vec<u8> {
    debug_assert!(w.len().is_power_of_two());
    let mut u = vec![0u8; w.len()];
    sc_rec(w, 0, decider, &mut u);
    u
}

/// `P(polarized bit j = 0 | prefix, observations)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPosterior {
    pub p0: f64,
}

/// How a bit is filled from its posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillRule {
    Uniform,
    Sample,
    Argmax,
}

impl FillRule {
    pub fn apply<S: BitSource + ?Sized>(self, p0: f64, source: &mut S) -> u8 {
        match self {
            FillRule::Uniform => source.uniform_bit(),
            FillRule::Sample => source.bernoulli_bit(p0),
            FillRule::Argmax => argmax_bit(p0),
        }
    }
}

/// A polarization layer together with the per-position side observations.
#[derive(Debug, Clone)]
pub struct ScContext {
    law: SymbolLaw,
    side: Vec<usize>,
}

impl ScContext {
    /// `side[k]` indexes the rows of `law`.
    pub fn new(law: SymbolLaw, side: Vec<usize>) -> Result<Self, PolarError> {
        check_block_length(side.len())?;
        Ok(ScContext { law, side })
    }

    /// Context without side observations: every position uses side symbol 0.
    pub fn without_side(law: SymbolLaw, n: usize) -> Result<Self, PolarError> {
        Self::new(law, vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    pub fn likelihoods(&self) -> Vec<[f64; 2]> {
        self.side.iter().map(|&s| self.law.joint[s]).collect()
    }

    pub fn run<D: BitDecider + ?Sized>(&self, decider: &mut D) -> Vec<u8> {
        successive_cancellation(&self.likelihoods(), decider)
    }

    /// Posterior of bit `j` (0-based) given `prefix = u[0..j]`.
    pub fn posterior(&self, j: usize, prefix: &[u8]) -> IndexPosterior {
        assert_eq!(prefix.len(), j, "prefix length must equal the index");
        let mut captured = 0.5;
        self.run(&mut |idx: usize, p0: f64| {
            if idx < j {
                prefix[idx]
            } else {
                if idx == j {
                    captured = p0;
                }
                0
            }
        });
        IndexPosterior { p0: captured }
    }

    pub fn fill_bit<S: BitSource + ?Sized>(
        &self,
        j: usize,
        prefix: &[u8],
        rule: FillRule,
        source: &mut S,
    ) -> u8 {
        rule.apply(self.posterior(j, prefix).p0, source)
    }

    /// Keeps known bits and fills the rest by argmax.
    pub fn decode_with_known(&self, known: &[Option<u8>]) -> Vec<u8> {
        assert_eq!(known.len(), self.len());
        self.run(&mut |idx: usize, p0: f64| known[idx].unwrap_or_else(|| argmax_bit(p0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ComponentChannel, Conditioning, DmsSpec};
    use crate::rng::RngBits;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Dense matrix product `u · F^{⊗m}` built from the Kronecker definition.
    fn dense_transform(u: &[u8]) -> Vec<u8> {
        let n = u.len();
        let mut g = vec![vec![1u8]];
        while g.len() < n {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    // F = [[1,0],[1,1]]
                    next[r][c] = g[r][c];
                    next[m + r][c] = g[r][c];
                    next[m + r][m + c] = g[r][c];
                }
            }
            g = next;
        }
        (0..n)
            .map(|c| (0..n).fold(0u8, |acc, r| acc ^ (u[r] & g[r][c])))
            .collect()
    }

    fn uniform_law() -> SymbolLaw {
        DmsSpec::bec_triple(0.5, 0.5, 0.5).symbol_law(Conditioning::V)
    }

    fn asym_spec() -> DmsSpec {
        DmsSpec {
            input_law: [0.712, 0.178, 0.022, 0.088],
            y1: ComponentChannel::Bsc { crossover: 0.15 },
            y2: ComponentChannel::Bec { erasure: 0.3 },
            z: ComponentChannel::Matrix {
                rows: [vec![0.6, 0.3, 0.1], vec![0.2, 0.3, 0.5]],
            },
        }
    }

    /// `P(u, side) / P(side)` by direct product over positions.
    fn joint_prob(law: &SymbolLaw, side: &[usize], u: &[u8]) -> f64 {
        let v = dense_transform(u);
        v.iter()
            .zip(side)
            .map(|(&b, &s)| {
                let row = law.joint[s];
                row[b as usize] / (row[0] + row[1])
            })
            .product()
    }

    #[test]
    fn transform_examples() {
        assert_eq!(polar_transform(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(polar_transform(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(polar_transform(&[0; 8]).unwrap(), vec![0; 8]);
        assert_eq!(polar_transform(&[1, 0, 1]), Err(PolarError::NotPowerOfTwo(3)));
    }

    #[test]
    fn n1_uniform_posterior() {
        let ctx = ScContext::without_side(uniform_law(), 1).unwrap();
        assert_eq!(ctx.posterior(0, &[]).p0, 0.5);
    }

    #[test]
    fn n2_noiseless_observation() {
        let spec = DmsSpec {
            input_law: [0.5, 0.0, 0.0, 0.5],
            y1: ComponentChannel::identity(),
            y2: ComponentChannel::identity(),
            z: ComponentChannel::useless(),
        };
        let ctx = ScContext::new(spec.symbol_law(Conditioning::VGivenY1), vec![0, 0]).unwrap();
        assert_eq!(ctx.posterior(0, &[]).p0, 1.0);
        // Observations fully determine v, so the decoder returns the exact u.
        for v in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let ctx = ScContext::new(
                spec.symbol_law(Conditioning::VGivenY1),
                v.iter().map(|&b| b as usize).collect(),
            )
            .unwrap();
            let u = ctx.decode_with_known(&[None, None]);
            assert_eq!(polar_transform(&u).unwrap(), v.to_vec());
        }
    }

    #[test]
    fn n2_both_erased() {
        let spec = DmsSpec::bec_triple(0.5, 0.5, 0.5);
        let e = ComponentChannel::ERASURE;
        let ctx = ScContext::new(spec.symbol_law(Conditioning::VGivenY1), vec![e, e]).unwrap();
        assert_eq!(ctx.posterior(0, &[]).p0, 0.5);
    }

    #[test]
    fn fill_rules() {
        let mut src = RngBits(ChaCha8Rng::seed_from_u64(3));
        assert_eq!(FillRule::Argmax.apply(0.9, &mut src), 0);
        assert_eq!(FillRule::Argmax.apply(0.5, &mut src), 0);
        assert_eq!(FillRule::Argmax.apply(0.1, &mut src), 1);
        for seed in 0..20 {
            let mut s = RngBits(ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(FillRule::Sample.apply(1.0, &mut s), 0);
        }
    }

    #[test]
    fn known_everywhere_is_returned_verbatim() {
        let spec = DmsSpec::bec_triple(1.0, 1.0, 1.0);
        let e = ComponentChannel::ERASURE;
        let ctx = ScContext::new(spec.symbol_law(Conditioning::VGivenY1), vec![e; 8]).unwrap();
        let known = [1, 0, 1, 1, 0, 0, 1, 0];
        let out = ctx.decode_with_known(&known.map(Some));
        assert_eq!(out, known.to_vec());
    }

    #[test]
    fn zero_probability_prefix_gives_half() {
        // Deterministic source V = 0: the prefix u0 = 1 has probability zero.
        let spec = DmsSpec {
            input_law: [1.0, 0.0, 0.0, 0.0],
            ..DmsSpec::bec_triple(0.5, 0.5, 0.5)
        };
        let ctx = ScContext::without_side(spec.symbol_law(Conditioning::V), 2).unwrap();
        assert_eq!(ctx.posterior(0, &[]).p0, 1.0);
        assert_eq!(ctx.posterior(1, &[1]).p0, 0.5);
    }

    fn cond_strategy() -> impl Strategy<Value = Conditioning> {
        prop::sample::select(Conditioning::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn involution(bits in prop::collection::vec(0u8..2, 64)) {
            let once = polar_transform(&bits).unwrap();
            prop_assert_eq!(polar_transform(&once).unwrap(), bits);
        }

        #[test]
        fn linear(a in prop::collection::vec(0u8..2, 32), b in prop::collection::vec(0u8..2, 32)) {
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let lhs = polar_transform(&sum).unwrap();
            let rhs: Vec<u8> = polar_transform(&a).unwrap().iter()
                .zip(polar_transform(&b).unwrap()).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn butterfly_matches_dense_product(bits in prop::collection::vec(0u8..2, 16)) {
            prop_assert_eq!(polar_transform(&bits).unwrap(), dense_transform(&bits));
        }

        #[test]
        fn chain_rule(m in 0u32..4, cond in cond_strategy(), seed in any::<u64>()) {
            let n = 1usize << m;
            let spec = asym_spec();
            let law = spec.symbol_law(cond);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut side = Vec::new();
            let mut v = Vec::new();
            for _ in 0..n {
                let (b, s) = law.sample(&mut rng);
                v.push(b);
                side.push(s);
            }
            let u = dense_transform(&v);
            let ctx = ScContext::new(law.clone(), side.clone()).unwrap();
            let mut sum = 0.0;
            for j in 0..n {
                let p0 = ctx.posterior(j, &u[..j]).p0;
                let p = if u[j] == 0 { p0 } else { 1.0 - p0 };
                sum += -p.log2();
            }
            let exact = -joint_prob(&law, &side, &u).log2();
            prop_assert!((sum - exact).abs() < 1e-9, "sum {} exact {}", sum, exact);
        }

        #[test]
        fn marginal_consistency(m in 0u32..4, cond in cond_strategy(), j_frac in 0.0f64..1.0, side_seed in any::<u64>()) {
            let n = 1usize << m;
            let j = ((j_frac * n as f64) as usize).min(n - 1);
            let spec = asym_spec();
            let law = spec.symbol_law(cond);
            let mut rng = ChaCha8Rng::seed_from_u64(side_seed);
            let side: Vec<usize> = (0..n).map(|_| law.sample(&mut rng).1).collect();
            let ctx = ScContext::new(law.clone(), side.clone()).unwrap();
            // Sum over all u of P(u | side) 1[u_j = 0] versus the prefix-weighted posterior.
            let mut direct = 0.0;
            let mut weighted = 0.0;
            let mut prefix_mass = std::collections::HashMap::new();
            for idx in 0..(1u32 << n) {
                let u: Vec<u8> = (0..n).map(|k| ((idx >> k) & 1) as u8).collect();
                let p = joint_prob(&law, &side, &u);
                if u[j] == 0 {
                    direct += p;
                }
                *prefix_mass.entry(u[..j].to_vec()).or_insert(0.0) += p;
            }
            for (prefix, mass) in prefix_mass {
                if mass > 0.0 {
                    weighted += mass * ctx.posterior(j, &prefix).p0;
                }
            }
            prop_assert!((direct - weighted).abs() < 1e-9);
        }
    }
}
