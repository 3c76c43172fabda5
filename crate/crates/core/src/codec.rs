//! Multi-block chained encoder.
//!
//! A [`ChainCode`] is a [`Design`] used over a fixed number of blocks. The
//! encoder first writes every block's private message into `C`, derives the
//! carried sequences from those bits, then walks the blocks forward: it places
//! the confidential message and the chained sequences into `G`, completes the
//! V-layer by SC filling, and passes the result through the prefix channel
//! layer to obtain the transmitted block.

use crate::channel::{Conditioning, DmsSpec};
use crate::polar::{argmax_bit, transform_in_place, ScContext};
use crate::rng::{random_bits, BitSource};
use crate::sets::{intersect, mask, union, ChainingPlan, Design, PolarizedSets};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("at least two blocks are required, got {0}")]
    TooFewBlocks(usize),
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("length mismatch for slot {slot}: expected {expected}, got {got}")]
    LengthMismatch {
        slot: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("index {0} written twice in block {1}")]
    Overwrite(usize, usize),
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<(), CodecError> {
    if expected != got {
        return Err(CodecError::DimensionMismatch {
            what: what.to_string(),
            expected,
            got,
        });
    }
    Ok(())
}

pub fn gather(bits: &[u8], idx: &[usize]) -> Vec<u8> {
    idx.iter().map(|&j| bits[j]).collect()
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// XOR where an empty operand stands for the all-zero sequence.
pub fn xor_or_copy(a: &[u8], b: &[u8]) -> Vec<u8> {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_vec(),
        (_, true) => a.to_vec(),
        _ => xor(a, b),
    }
}

/// A design used over `blocks` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCode {
    pub design: Design,
    pub blocks: usize,
}

/// Message and randomizer lengths per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageDimensions {
    pub private: usize,
    pub confidential_first: usize,
    pub confidential_mid: usize,
    pub confidential_last: usize,
    pub randomizer: usize,
    pub blocks: usize,
}

impl MessageDimensions {
    /// Confidential length of block `i` (1-based).
    pub fn confidential(&self, i: usize) -> usize {
        if i == 1 {
            self.confidential_first
        } else if i == self.blocks {
            self.confidential_last
        } else {
            self.confidential_mid
        }
    }

    pub fn total_confidential(&self) -> usize {
        (1..=self.blocks).map(|i| self.confidential(i)).sum()
    }
}

pub fn message_dimensions(design: &Design, blocks: usize) -> MessageDimensions {
    let p = &design.partition;
    let plan = &design.plan;
    MessageDimensions {
        private: p.c.len(),
        confidential_first: union(&[&plan.info, &p.g1, &p.g12]).len(),
        confidential_mid: plan.info.len(),
        confidential_last: union(&[&plan.info, &p.g2]).len(),
        randomizer: design.sets.randomizer_set().len(),
        blocks,
    }
}

impl ChainCode {
    pub fn new(design: Design, blocks: usize) -> Result<Self, CodecError> {
        if blocks < 2 {
            return Err(CodecError::TooFewBlocks(blocks));
        }
        Ok(ChainCode { design, blocks })
    }

    pub fn n(&self) -> usize {
        self.design.sets.n
    }

    pub fn plan(&self) -> &ChainingPlan {
        &self.design.plan
    }

    pub fn dimensions(&self) -> MessageDimensions {
        message_dimensions(&self.design, self.blocks)
    }

    /// Positions of the confidential message in block `i` (1-based).
    pub fn confidential_slots(&self, i: usize) -> Vec<usize> {
        let p = &self.design.partition;
        let info = &self.design.plan.info;
        if i == 1 {
            union(&[info, &p.g1, &p.g12])
        } else if i == self.blocks {
            union(&[info, &p.g2])
        } else {
            info.clone()
        }
    }

    /// `I ∩ G2`.
    pub fn info_g2(&self) -> Vec<usize> {
        intersect(&self.design.plan.info, &self.design.partition.g2)
    }

    /// Length of the encrypted side information for receiver `k`.
    pub fn side_info_len(&self, receiver: usize) -> usize {
        let s = &self.design.sets;
        self.blocks * s.phi_set(receiver).len() + s.upsilon_set(receiver).len()
    }
}

/// Secret keys shared with both legitimate receivers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub kappa_theta: Vec<u8>,
    pub kappa_gamma: Vec<u8>,
    pub kappa_upsilon_phi: [Vec<u8>; 2],
    pub lambda0_x: Vec<u8>,
}

pub fn generate_keys<R: Rng + ?Sized>(code: &ChainCode, rng: &mut R) -> KeyMaterial {
    let p = &code.design.partition;
    KeyMaterial {
        kappa_theta: random_bits(rng, p.c1.len()),
        kappa_gamma: random_bits(rng, p.c12.len()),
        kappa_upsilon_phi: [
            random_bits(rng, code.side_info_len(1)),
            random_bits(rng, code.side_info_len(2)),
        ],
        lambda0_x: random_bits(rng, code.design.sets.high(Conditioning::XGivenVZ).len()),
    }
}

impl KeyMaterial {
    pub fn check(&self, code: &ChainCode) -> Result<(), CodecError> {
        let p = &code.design.partition;
        check_len("kappa_theta", p.c1.len(), self.kappa_theta.len())?;
        check_len("kappa_gamma", p.c12.len(), self.kappa_gamma.len())?;
        check_len("kappa_upsilon_phi_1", code.side_info_len(1), self.kappa_upsilon_phi[0].len())?;
        check_len("kappa_upsilon_phi_2", code.side_info_len(2), self.kappa_upsilon_phi[1].len())?;
        check_len(
            "lambda0_x",
            code.design.sets.high(Conditioning::XGivenVZ).len(),
            self.lambda0_x.len(),
        )
    }
}

/// Private messages `W_i`, confidential messages `S_i` and randomizers `R_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMessages {
    pub private: Vec<Vec<u8>>,
    pub confidential: Vec<Vec<u8>>,
    pub randomizers: Vec<Vec<u8>>,
}

impl SessionMessages {
    pub fn random<R: Rng + ?Sized>(code: &ChainCode, rng: &mut R) -> Self {
        let d = code.dimensions();
        SessionMessages {
            private: (0..code.blocks).map(|_| random_bits(rng, d.private)).collect(),
            confidential: (1..=code.blocks)
                .map(|i| random_bits(rng, d.confidential(i)))
                .collect(),
            randomizers: (0..code.blocks).map(|_| random_bits(rng, d.randomizer)).collect(),
        }
    }

    pub fn check(&self, code: &ChainCode) -> Result<(), CodecError> {
        let d = code.dimensions();
        check_len("private blocks", code.blocks, self.private.len())?;
        check_len("confidential blocks", code.blocks, self.confidential.len())?;
        check_len("randomizer blocks", code.blocks, self.randomizers.len())?;
        for i in 1..=code.blocks {
            check_len(&format!("W_{i}"), d.private, self.private[i - 1].len())?;
            check_len(&format!("S_{i}"), d.confidential(i), self.confidential[i - 1].len())?;
            check_len(&format!("R_{i}"), d.randomizer, self.randomizers[i - 1].len())?;
        }
        Ok(())
    }
}

/// Per-block encoder state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockState {
    /// Polarized V-layer vector.
    pub a_tilde: Vec<u8>,
    /// `a_tilde[C2]`.
    pub psi: Vec<u8>,
    /// `a_tilde[C12]`.
    pub gamma: Vec<u8>,
    /// `a_tilde[C1] ⊕ κ_Θ`.
    pub theta_bar: Vec<u8>,
    /// `a_tilde[C12] ⊕ κ_Γ`.
    pub gamma_bar: Vec<u8>,
    /// `a_tilde[I ∩ G2]`.
    pub pi: Vec<u8>,
    /// `a_tilde[R_Λ]`.
    pub lambda_v: Vec<u8>,
    /// Bits placed in `H_{X|VZ}` of the prefix layer.
    pub lambda_x: Vec<u8>,
    /// Polarized X-layer vector.
    pub t_tilde: Vec<u8>,
    pub v: Vec<u8>,
    pub x: Vec<u8>,
    /// Positions of `G` filled with fresh uniform bits because no message or
    /// chained content is assigned to them.
    pub filler: Vec<usize>,
}

/// What the transmitter sends: channel inputs plus encrypted side information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCiphertext {
    pub x_blocks: Vec<Vec<u8>>,
    /// For receiver k: `[Υ_k, Φ_{k,1}, ..., Φ_{k,L}] ⊕ κ_{ΥΦ(k)}`.
    pub side_info: [Vec<u8>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSession {
    pub ciphertext: SessionCiphertext,
    pub blocks: Vec<BlockState>,
}

/// Chained sequences handed to [`form_a_g`]; empty vectors stand for the
/// missing neighbour at the first and last block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainInputs<'a> {
    pub theta_bar_next: &'a [u8],
    pub gamma_bar_next: &'a [u8],
    pub psi_prev: &'a [u8],
    pub gamma_prev: &'a [u8],
    pub pi_prev: &'a [u8],
    pub lambda_v_prev: &'a [u8],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormOutput {
    pub assignments: Vec<(usize, u8)>,
    pub pi: Vec<u8>,
    pub lambda_v: Vec<u8>,
}

fn slot_len(slot: &'static str, expected: usize, got: &[u8]) -> Result<(), CodecError> {
    if got.len() != expected {
        return Err(CodecError::LengthMismatch {
            slot,
            expected,
            got: got.len(),
        });
    }
    Ok(())
}

/// Places the confidential message and the chained sequences of block `i`
/// (1-based) into `G`.
pub fn form_a_g(code: &ChainCode, i: usize, s_i: &[u8], c: &ChainInputs<'_>) -> Result<FormOutput, CodecError> {
    let plan = code.plan();
    let part = &code.design.partition;
    let sp = plan.splits;
    let last = code.blocks;
    let has_next = i < last;
    let has_prev = i > 1;

    let slots = code.confidential_slots(i);
    slot_len("S_i", slots.len(), s_i)?;
    if has_next {
        slot_len("theta_bar_next", part.c1.len(), c.theta_bar_next)?;
        slot_len("gamma_bar_next", part.c12.len(), c.gamma_bar_next)?;
    }
    if has_prev {
        slot_len("psi_prev", part.c2.len(), c.psi_prev)?;
        slot_len("gamma_prev", part.c12.len(), c.gamma_prev)?;
        slot_len("pi_prev", plan.rs.len(), c.pi_prev)?;
        slot_len("lambda_v_prev", plan.rlambda.len(), c.lambda_v_prev)?;
    }
    let split = |s: &[u8], at: usize| -> (Vec<u8>, Vec<u8>) {
        if s.is_empty() {
            (vec![], vec![])
        } else {
            (s[..at].to_vec(), s[at..].to_vec())
        }
    };
    let (theta1_next, theta2_next) = split(c.theta_bar_next, sp.theta_bar.0);
    let (gbar1_next, gbar2_next) = split(c.gamma_bar_next, sp.gamma_bar.0);
    let (psi1_prev, psi2_prev) = split(c.psi_prev, sp.psi.0);
    let (gamma1_prev, gamma2_prev) = split(c.gamma_prev, sp.gamma.0);

    let mut out = Vec::new();
    let mut put = |idx: &[usize], bits: &[u8]| {
        debug_assert_eq!(idx.len(), bits.len());
        out.extend(idx.iter().copied().zip(bits.iter().copied()));
    };
    put(&slots, s_i);
    put(&plan.r12, &xor_or_copy(&gamma1_prev, &gbar1_next));
    put(&plan.r12p, &xor_or_copy(&psi2_prev, &theta2_next));
    if has_next {
        put(&plan.r1, &theta1_next);
        put(&plan.r1p, &gbar2_next);
    }
    if has_prev {
        put(&plan.r2, &psi1_prev);
        put(&plan.r2p, &gamma2_prev);
        put(&plan.rs, c.pi_prev);
        put(&plan.rlambda, c.lambda_v_prev);
    }
    let mut block = vec![None; code.n()];
    for &(j, b) in &out {
        if block[j].replace(b).is_some() {
            return Err(CodecError::Overwrite(j, i));
        }
    }
    let read = |idx: &[usize]| -> Vec<u8> { idx.iter().map(|&j| block[j].expect("slot assigned")).collect() };
    Ok(FormOutput {
        pi: read(&code.info_g2()),
        lambda_v: read(&plan.rlambda),
        assignments: out,
    })
}

/// Completes the V-layer: preset bits are kept, other bits of `H_V` are
/// uniform, `L_V` is filled by argmax and the rest by sampling the posterior.
pub fn fill_v_layer<S: BitSource + ?Sized>(
    spec: &DmsSpec,
    sets: &PolarizedSets,
    preset: &[Option<u8>],
    source: &mut S,
) -> Vec<u8> {
    let n = sets.n;
    let high = mask(sets.high(Conditioning::V), n);
    let low = mask(sets.low(Conditioning::V), n);
    let ctx = ScContext::without_side(spec.symbol_law(Conditioning::V), n).expect("power of two");
    ctx.run(&mut |j: usize, p0: f64| match preset[j] {
        Some(b) => b,
        None if high[j] => source.uniform_bit(),
        None if low[j] => argmax_bit(p0),
        None => source.bernoulli_bit(p0),
    })
}

/// Completes the X-layer given `v`: preset bits are kept, other bits of
/// `H_{X|V}` are uniform, `L_{X|V}` by argmax, the rest sampled.
pub fn fill_x_layer<S: BitSource + ?Sized>(
    spec: &DmsSpec,
    sets: &PolarizedSets,
    v: &[u8],
    preset: &[Option<u8>],
    source: &mut S,
) -> Vec<u8> {
    let n = sets.n;
    let high = mask(sets.high(Conditioning::XGivenV), n);
    let low = mask(sets.low(Conditioning::XGivenV), n);
    let side = v.iter().map(|&b| b as usize).collect();
    let ctx = ScContext::new(spec.symbol_law(Conditioning::XGivenV), side).expect("power of two");
    ctx.run(&mut |j: usize, p0: f64| match preset[j] {
        Some(b) => b,
        None if high[j] => source.uniform_bit(),
        None if low[j] => argmax_bit(p0),
        None => source.bernoulli_bit(p0),
    })
}

/// Prefix-channel layer: returns `(t_tilde, x)` with `x = t_tilde · G_n`.
pub fn channel_prefix<S: BitSource + ?Sized>(
    design: &Design,
    v_block: &[u8],
    randomizer: &[u8],
    lambda_x: &[u8],
    source: &mut S,
) -> Result<(Vec<u8>, Vec<u8>), CodecError> {
    let n = design.sets.n;
    let seed_set = design.sets.high(Conditioning::XGivenVZ);
    let rand_set = design.sets.randomizer_set();
    check_len("v_block", n, v_block.len())?;
    check_len("R_i", rand_set.len(), randomizer.len())?;
    check_len("lambda_x", seed_set.len(), lambda_x.len())?;
    let mut preset = vec![None; n];
    for (&j, &b) in seed_set.iter().zip(lambda_x) {
        preset[j] = Some(b);
    }
    for (&j, &b) in rand_set.iter().zip(randomizer) {
        preset[j] = Some(b);
    }
    let t = fill_x_layer(&design.spec, &design.sets, v_block, &preset, source);
    let mut x = t.clone();
    transform_in_place(&mut x);
    Ok((t, x))
}

/// Encodes one session of `code.blocks` blocks.
pub fn encode_session<S: BitSource + ?Sized>(
    code: &ChainCode,
    msgs: &SessionMessages,
    keys: &KeyMaterial,
    source: &mut S,
) -> Result<EncodedSession, CodecError> {
    msgs.check(code)?;
    keys.check(code)?;
    let n = code.n();
    let l = code.blocks;
    let d = &code.design;
    let p = &d.partition;
    let plan = &d.plan;

    // Private messages first; every carried sequence derives from C.
    let mut a: Vec<Vec<Option<u8>>> = vec![vec![None; n]; l];
    for (blk, w) in a.iter_mut().zip(&msgs.private) {
        for (&j, &b) in p.c.iter().zip(w) {
            blk[j] = Some(b);
        }
    }
    let read = |blk: &[Option<u8>], idx: &[usize]| -> Vec<u8> { idx.iter().map(|&j| blk[j].unwrap()).collect() };
    let psi: Vec<Vec<u8>> = a.iter().map(|b| read(b, &p.c2)).collect();
    let gamma: Vec<Vec<u8>> = a.iter().map(|b| read(b, &p.c12)).collect();
    let theta_bar: Vec<Vec<u8>> = a.iter().map(|b| xor(&read(b, &p.c1), &keys.kappa_theta)).collect();
    let gamma_bar: Vec<Vec<u8>> = gamma.iter().map(|g| xor(g, &keys.kappa_gamma)).collect();

    let h_v = d.sets.high(Conditioning::V);
    let mut states = Vec::with_capacity(l);
    let mut pi_prev: Vec<u8> = vec![];
    let mut lambda_prev: Vec<u8> = vec![];
    for i in 1..=l {
        source.begin_block(i - 1);
        let empty: &[u8] = &[];
        let inputs = ChainInputs {
            theta_bar_next: if i < l { &theta_bar[i] } else { empty },
            gamma_bar_next: if i < l { &gamma_bar[i] } else { empty },
            psi_prev: if i > 1 { &psi[i - 2] } else { empty },
            gamma_prev: if i > 1 { &gamma[i - 2] } else { empty },
            pi_prev: &pi_prev,
            lambda_v_prev: &lambda_prev,
        };
        let form = form_a_g(code, i, &msgs.confidential[i - 1], &inputs)?;
        let blk = &mut a[i - 1];
        for &(j, b) in &form.assignments {
            if blk[j].replace(b).is_some() {
                return Err(CodecError::Overwrite(j, i));
            }
        }
        let mut filler = Vec::new();
        for &j in h_v {
            if blk[j].is_none() {
                blk[j] = Some(source.uniform_bit());
                filler.push(j);
            }
        }
        let a_tilde = fill_v_layer(&d.spec, &d.sets, blk, source);
        let mut v = a_tilde.clone();
        transform_in_place(&mut v);
        let (t_tilde, x) = channel_prefix(d, &v, &msgs.randomizers[i - 1], &keys.lambda0_x, source)?;
        pi_prev = form.pi.clone();
        lambda_prev = form.lambda_v.clone();
        states.push(BlockState {
            psi: psi[i - 1].clone(),
            gamma: gamma[i - 1].clone(),
            theta_bar: theta_bar[i - 1].clone(),
            gamma_bar: gamma_bar[i - 1].clone(),
            pi: form.pi,
            lambda_v: form.lambda_v,
            lambda_x: keys.lambda0_x.clone(),
            a_tilde,
            t_tilde,
            v,
            x,
            filler,
        });
    }

    let mut side_info: [Vec<u8>; 2] = [vec![], vec![]];
    for k in 1..=2 {
        let ups = d.sets.upsilon_set(k);
        let phi = d.sets.phi_set(k);
        let src = if k == 1 { &states[0] } else { &states[l - 1] };
        let mut plain = gather(&src.a_tilde, &ups);
        for st in &states {
            plain.extend(gather(&st.a_tilde, &phi));
        }
        side_info[k - 1] = xor(&plain, &keys.kappa_upsilon_phi[k - 1]);
    }
    debug_assert!(plan.check(p).is_ok());
    Ok(EncodedSession {
        ciphertext: SessionCiphertext {
            x_blocks: states.iter().map(|s| s.x.clone()).collect(),
            side_info,
        },
        blocks: states,
    })
}

/// Everything needed to decode a session, in one serializable record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionArtifact {
    pub version: u32,
    pub code: ChainCode,
    /// Withheld when the artifact is published without keys.
    pub keys: Option<KeyMaterial>,
    pub ciphertext: SessionCiphertext,
}

impl SessionArtifact {
    pub fn new(code: ChainCode, keys: Option<KeyMaterial>, ciphertext: SessionCiphertext) -> Self {
        SessionArtifact {
            version: ARTIFACT_VERSION,
            code,
            keys,
            ciphertext,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DmsSpec;
    use crate::rng::RngBits;
    use crate::sets::{synthetic_sets, CellSizes, ChainingCase, EntropyMethod};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic_code(case: ChainingCase, n: usize, blocks: usize, seed: u64) -> ChainCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = loop {
            let s = CellSizes::random_for_case(case, 3, &mut rng);
            if s.total() <= n {
                break s;
            }
        };
        let sets = synthetic_sets(sizes, n, 0.3, &mut rng).unwrap();
        let design = Design::from_sets(DmsSpec::bec_triple(0.4, 0.3, 0.7), sets).unwrap();
        ChainCode::new(design, blocks).unwrap()
    }

    #[test]
    fn dimensions_example() {
        // |I| = 2, |G1| = 1, |G12| = 1, |G2| = 1 with I ∩ G2 = ∅.
        let s = CellSizes { g0: 2, g1: 1, g2: 1, g12: 1, c0: 0, c1: 1, c2: 0, c12: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sets = synthetic_sets(s, 8, 0.3, &mut rng).unwrap();
        let design = Design::from_sets(DmsSpec::bec_triple(0.4, 0.3, 0.7), sets).unwrap();
        assert_eq!(design.case(), ChainingCase::C);
        assert_eq!(design.plan.info.len(), 2);
        let d = message_dimensions(&design, 3);
        assert_eq!((d.confidential_first, d.confidential_mid, d.confidential_last), (4, 2, 3));
    }

    #[test]
    fn key_lengths() {
        let code = synthetic_code(ChainingCase::A, 16, 4, 2);
        let keys = generate_keys(&code, &mut ChaCha8Rng::seed_from_u64(1));
        keys.check(&code).unwrap();
        let s = &code.design.sets;
        assert_eq!(
            keys.kappa_upsilon_phi[0].len(),
            4 * s.phi_set(1).len() + s.upsilon_set(1).len()
        );
        assert_eq!(keys, generate_keys(&code, &mut ChaCha8Rng::seed_from_u64(1)));
    }

    #[test]
    fn every_index_written_once() {
        for case in ChainingCase::ALL {
            for blocks in [2, 3, 4] {
                let code = synthetic_code(case, 16, blocks, 11 + blocks as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                let msgs = SessionMessages::random(&code, &mut rng);
                let keys = generate_keys(&code, &mut rng);
                let enc = encode_session(&code, &msgs, &keys, &mut RngBits(rng.clone())).unwrap();
                let p = &code.design.partition;
                let plan = code.plan();
                for (b, st) in enc.blocks.iter().enumerate() {
                    let i = b + 1;
                    // Only R1 ∩ G0 of the last block may need filler bits.
                    let expected: Vec<usize> = if i == blocks {
                        crate::sets::intersect(&plan.r1, &p.g0)
                    } else {
                        vec![]
                    };
                    assert_eq!(st.filler, expected, "case {case} block {i}");
                    assert_eq!(st.psi, gather(&st.a_tilde, &p.c2));
                    assert_eq!(st.pi, gather(&st.a_tilde, &code.info_g2()));
                    assert_eq!(st.lambda_v, gather(&st.a_tilde, &plan.rlambda));
                    assert_eq!(st.theta_bar, xor(&gather(&st.a_tilde, &p.c1), &keys.kappa_theta));
                    assert_eq!(st.lambda_v, enc.blocks[0].lambda_v);
                    let mut x = st.t_tilde.clone();
                    transform_in_place(&mut x);
                    assert_eq!(x, st.x);
                }
            }
        }
    }

    #[test]
    fn chained_slots_hold_neighbour_content() {
        for case in ChainingCase::ALL {
            let code = synthetic_code(case, 16, 4, 99);
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let msgs = SessionMessages::random(&code, &mut rng);
            let keys = generate_keys(&code, &mut rng);
            let enc = encode_session(&code, &msgs, &keys, &mut RngBits(rng)).unwrap();
            let plan = code.plan();
            let sp = plan.splits;
            let b = &enc.blocks;
            for i in 1..3 {
                // Middle block i (0-based) between i-1 and i+1.
                let r12 = gather(&b[i].a_tilde, &plan.r12);
                let gamma1_prev = &b[i - 1].gamma[..sp.gamma.0];
                let gbar1_next = &b[i + 1].gamma_bar[..sp.gamma_bar.0];
                assert_eq!(xor(&r12, gamma1_prev), gbar1_next.to_vec());
                assert_eq!(gather(&b[i].a_tilde, &plan.r1), b[i + 1].theta_bar[..sp.theta_bar.0].to_vec());
                assert_eq!(gather(&b[i].a_tilde, &plan.r2), b[i - 1].psi[..sp.psi.0].to_vec());
                assert_eq!(gather(&b[i].a_tilde, &plan.rs), b[i - 1].pi);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let code = synthetic_code(ChainingCase::B, 16, 3, 4);
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let msgs = SessionMessages::random(&code, &mut rng);
            let keys = generate_keys(&code, &mut rng);
            encode_session(&code, &msgs, &keys, &mut RngBits(rng)).unwrap().ciphertext
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn wrong_message_length_is_rejected() {
        let code = synthetic_code(ChainingCase::A, 16, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut msgs = SessionMessages::random(&code, &mut rng);
        let keys = generate_keys(&code, &mut rng);
        msgs.private[0].push(1);
        assert!(matches!(
            encode_session(&code, &msgs, &keys, &mut RngBits(rng)),
            Err(CodecError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn xor_slot_is_self_inverse() {
        let a = [1u8, 0, 1];
        let b = [0u8, 1, 1];
        assert_eq!(xor(&xor(&a, &b), &a), b.to_vec());
        assert_eq!(xor_or_copy(&[], &b), b.to_vec());
    }

    #[test]
    fn prefix_is_transparent_when_x_equals_v() {
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        let design = Design::construct(&spec, 16, 0.25, EntropyMethod::ExactBec).unwrap();
        assert!(design.sets.high(Conditioning::XGivenV).is_empty());
        let mut src = RngBits(ChaCha8Rng::seed_from_u64(3));
        let v: Vec<u8> = (0..16).map(|k| (k % 3 == 0) as u8).collect();
        let (_, x) = channel_prefix(&design, &v, &[], &[], &mut src).unwrap();
        assert_eq!(x, v);
    }

    #[test]
    fn empty_design_encodes_pure_samples() {
        // No high-entropy indices at all: nothing is carried, everything is
        // filled by SC rules and the side information covers every index.
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        let profile = crate::sets::EntropyProfile {
            n: 8,
            values: vec![vec![0.5; 8]; 6],
            std_errors: None,
        };
        let sets = crate::sets::build_polarized_sets(&profile, 0.3).unwrap();
        // Classification needs |G2|-|C1| > |C12|-|G0|, which fails for empty
        // cells, so the plan is built for case C directly.
        let partition = crate::sets::partition_high_set(&sets);
        let plan = crate::sets::derive_chaining_plan(&partition, ChainingCase::C).unwrap();
        let code = ChainCode::new(Design { spec, sets, partition, plan }, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let msgs = SessionMessages::random(&code, &mut rng);
        assert!(msgs.private.iter().all(|w| w.is_empty()));
        let keys = generate_keys(&code, &mut rng);
        assert_eq!(keys.kappa_upsilon_phi[0].len(), 2 * 8);
        let enc = encode_session(&code, &msgs, &keys, &mut RngBits(rng)).unwrap();
        assert_eq!(enc.ciphertext.x_blocks.len(), 2);
    }
}
