//! Exact enumeration of the encoder's random choices.
//!
//! [`ScriptedSource`] replays a prefix of branch decisions and extends it
//! with the first branch of positive weight. [`enumerate_paths`] drives a
//! closure repeatedly, backtracking depth-first, so every leaf of the
//! encoder's probability tree is visited once with its exact weight.
//!
//! [`conditional_mi`] then turns weighted leaves into exact (conditional)
//! mutual information, optionally passing some bit blocks through a
//! component channel first.

use super::EvalError;
use crate::channel::ComponentChannel;
use crate::rng::BitSource;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    script: Vec<u8>,
    weights: Vec<[f64; 2]>,
    pos: usize,
    weight: f64,
}

impl ScriptedSource {
    fn restart(&mut self) {
        self.pos = 0;
        self.weight = 1.0;
    }

    fn choose(&mut self, w: [f64; 2]) -> u8 {
        let b = if self.pos < self.script.len() {
            self.script[self.pos]
        } else {
            let b = if w[0] > 0.0 { 0 } else { 1 };
            self.script.push(b);
            self.weights.push(w);
            b
        };
        self.weights[self.pos] = w;
        self.pos += 1;
        self.weight *= w[b as usize];
        b
    }

    /// Moves to the next unexplored path; false when the tree is exhausted.
    fn advance(&mut self) -> bool {
        self.script.truncate(self.pos);
        self.weights.truncate(self.pos);
        while let Some(b) = self.script.pop() {
            let w = self.weights.pop().expect("weights track script");
            if b == 0 && w[1] > 0.0 {
                self.script.push(1);
                self.weights.push(w);
                return true;
            }
        }
        false
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl BitSource for ScriptedSource {
    fn uniform_bit(&mut self) -> u8 {
        self.choose([0.5, 0.5])
    }

    fn bernoulli_bit(&mut self, p0: f64) -> u8 {
        self.choose([p0, 1.0 - p0])
    }
}

/// Runs `f` once per leaf of its random-choice tree and returns the leaves
/// with their probabilities. Errors once more than `budget` leaves are seen.
pub fn enumerate_paths<T, F>(budget: usize, mut f: F) -> Result<Vec<(f64, T)>, EvalError>
where
    F: FnMut(&mut ScriptedSource) -> T,
{
    let mut src = ScriptedSource::default();
    let mut out = Vec::new();
    loop {
        src.restart();
        let value = f(&mut src);
        if src.weight > 0.0 {
            out.push((src.weight, value));
        }
        if out.len() > budget {
            return Err(EvalError::BudgetExceeded {
                what: "encoder leaves".into(),
                budget,
            });
        }
        if !src.advance() {
            return Ok(out);
        }
    }
}

/// Packs bits into an integer key, most significant first.
pub fn pack_bits(bits: &[u8]) -> u128 {
    assert!(bits.len() <= 128, "too many bits to pack");
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

/// One weighted outcome for [`conditional_mi`]: `cond` and `a` are observed
/// directly; `a_x` and `b_x` are channel inputs whose outputs join `A` and
/// `B` respectively.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub cond: Vec<u8>,
    pub a: Vec<u8>,
    pub a_x: Vec<u8>,
    pub b: Vec<u8>,
    pub b_x: Vec<u8>,
}

/// All output sequences with positive probability for input `x`, with their
/// probabilities.
fn channel_outputs(channel: &ComponentChannel, x: &[u8]) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::with_capacity(x.len()), 1.0)];
    for &xi in x {
        let mut next = Vec::with_capacity(out.len() * 2);
        for (z, p) in &out {
            for y in 0..channel.output_size() {
                let q = channel.transition(xi, y);
                if q > 0.0 {
                    let mut z2 = z.clone();
                    z2.push(y);
                    next.push((z2, p * q));
                }
            }
        }
        out = next;
    }
    out
}

fn entropy_term(map: &BTreeMap<Vec<u64>, f64>) -> f64 {
    map.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Exact `I(A, Z(a_x); B, Z(b_x) | cond)` in bits, where `Z(.)` passes a bit
/// block through `channel` symbol by symbol.
pub fn conditional_mi(
    leaves: &[(f64, Outcome)],
    channel: &ComponentChannel,
    budget: usize,
) -> Result<f64, EvalError> {
    let mut grouped: BTreeMap<&Outcome, f64> = BTreeMap::new();
    for (p, o) in leaves {
        *grouped.entry(o).or_insert(0.0) += p;
    }
    let mut joint: BTreeMap<(u128, u128, Vec<usize>, u128, Vec<usize>), f64> = BTreeMap::new();
    let mut cache: BTreeMap<Vec<u8>, Vec<(Vec<usize>, f64)>> = BTreeMap::new();
    for (o, p) in grouped {
        for x in [&o.a_x, &o.b_x] {
            if !cache.contains_key(x) {
                cache.insert(x.clone(), channel_outputs(channel, x));
            }
        }
        let za = &cache[&o.a_x];
        let zb = &cache[&o.b_x];
        if joint.len() + za.len() * zb.len() > budget {
            return Err(EvalError::BudgetExceeded {
                what: "joint outcome table".into(),
                budget,
            });
        }
        let (c, a, b) = (pack_bits(&o.cond), pack_bits(&o.a), pack_bits(&o.b));
        for (z1, q1) in za {
            for (z2, q2) in zb {
                *joint.entry((c, a, z1.clone(), b, z2.clone())).or_insert(0.0) += p * q1 * q2;
            }
        }
    }
    // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
    let key = |v: &[u128], zs: &[&Vec<usize>]| -> Vec<u64> {
        let mut k: Vec<u64> = Vec::new();
        for &x in v {
            k.push((x >> 64) as u64);
            k.push(x as u64);
        }
        for z in zs {
            k.push(u64::MAX);
            k.extend(z.iter().map(|&s| s as u64));
        }
        k
    };
    let mut h_ac = BTreeMap::new();
    let mut h_bc = BTreeMap::new();
    let mut h_abc = BTreeMap::new();
    let mut h_c = BTreeMap::new();
    for ((c, a, za, b, zb), p) in &joint {
        *h_ac.entry(key(&[*c, *a], &[za])).or_insert(0.0) += p;
        *h_bc.entry(key(&[*c, *b], &[zb])).or_insert(0.0) += p;
        *h_abc.entry(key(&[*c, *a, *b], &[za, zb])).or_insert(0.0) += p;
        *h_c.entry(key(&[*c], &[])).or_insert(0.0) += p;
    }
    let mi = entropy_term(&h_ac) + entropy_term(&h_bc) - entropy_term(&h_abc) - entropy_term(&h_c);
    Ok(mi.max(0.0))
}
