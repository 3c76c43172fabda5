//! Chained SC decoders for the two legitimate receivers.
//!
//! Receiver 1 starts from the first block and walks forward; receiver 2
//! starts from the last block and walks backward. In both directions the
//! decoded block supplies the bits the next SC call needs as known values.

use crate::codec::{gather, xor, xor_or_copy, ChainCode, KeyMaterial, SessionCiphertext};
use crate::polar::ScContext;
use crate::sets::{complement, receiver_cond, union};
use serde::{Deserialize, Serialize};

/// Receiver-side view of a session: the code, the shared keys and the
/// decrypted side information.
#[derive(Debug, Clone)]
pub struct ReceiverContext<'a> {
    pub receiver: usize,
    pub code: &'a ChainCode,
    pub kappa_theta: Vec<u8>,
    pub kappa_gamma: Vec<u8>,
    /// `Υ_k`, in index order of `H_V ∩ (L_{V|Yk})^C`.
    pub upsilon: Vec<u8>,
    /// `Φ_{k,i}` for every block.
    pub phi: Vec<Vec<u8>>,
}

impl<'a> ReceiverContext<'a> {
    /// Decrypts the side information for `receiver` (1 or 2).
    pub fn new(code: &'a ChainCode, receiver: usize, keys: &KeyMaterial, ct: &SessionCiphertext) -> Self {
        assert!(receiver == 1 || receiver == 2, "receiver must be 1 or 2");
        let plain = xor(&ct.side_info[receiver - 1], &keys.kappa_upsilon_phi[receiver - 1]);
        let ups = code.design.sets.upsilon_set(receiver).len();
        let phi_len = code.design.sets.phi_set(receiver).len();
        assert_eq!(plain.len(), ups + code.blocks * phi_len, "side information length");
        let upsilon = plain[..ups].to_vec();
        let phi = (0..code.blocks)
            .map(|b| plain[ups + b * phi_len..ups + (b + 1) * phi_len].to_vec())
            .collect();
        ReceiverContext {
            receiver,
            code,
            kappa_theta: keys.kappa_theta.clone(),
            kappa_gamma: keys.kappa_gamma.clone(),
            upsilon,
            phi,
        }
    }

    /// `(L_{V|Yk})^C`: the indices SC cannot decode on its own.
    pub fn required(&self) -> Vec<usize> {
        let sets = &self.code.design.sets;
        complement(sets.low(receiver_cond(self.receiver)), sets.n)
    }

    fn decode_block(&self, known: &[Option<u8>], observations: &[usize]) -> Vec<u8> {
        let law = self.code.design.spec.symbol_law(receiver_cond(self.receiver));
        let ctx = ScContext::new(law, observations.to_vec()).expect("observation length");
        ctx.decode_with_known(known)
    }
}

/// Decoder output for one receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutput {
    pub a_hat: Vec<Vec<u8>>,
    pub private: Vec<Vec<u8>>,
    pub confidential: Vec<Vec<u8>>,
    /// Per block: the known set passed to SC covered `(L_{V|Yk})^C`.
    pub coverage: Vec<bool>,
    /// Per block: number of known indices passed to SC.
    pub known_counts: Vec<usize>,
}

fn set(known: &mut [Option<u8>], idx: &[usize], bits: &[u8]) {
    debug_assert_eq!(idx.len(), bits.len());
    for (&j, &b) in idx.iter().zip(bits) {
        known[j] = Some(b);
    }
}

fn finish(ctx: &ReceiverContext<'_>, a_hat: Vec<Vec<u8>>, coverage: Vec<bool>, known_counts: Vec<usize>) -> DecodeOutput {
    let code = ctx.code;
    let c = &code.design.partition.c;
    DecodeOutput {
        private: a_hat.iter().map(|a| gather(a, c)).collect(),
        confidential: a_hat
            .iter()
            .enumerate()
            .map(|(b, a)| gather(a, &code.confidential_slots(b + 1)))
            .collect(),
        a_hat,
        coverage,
        known_counts,
    }
}

fn covers(known: &[Option<u8>], required: &[usize]) -> bool {
    required.iter().all(|&j| known[j].is_some())
}

/// Forward decoding for receiver 1; `y1_blocks[b]` is the observation of block `b`.
pub fn decode_rx1(ctx: &ReceiverContext<'_>, y1_blocks: &[Vec<usize>]) -> DecodeOutput {
    let code = ctx.code;
    let l = code.blocks;
    let n = code.n();
    let d = &code.design;
    let p = &d.partition;
    let plan = &d.plan;
    let sp = plan.splits;
    let ups_set = d.sets.upsilon_set(1);
    let phi_set = d.sets.phi_set(1);
    let required = ctx.required();
    let info_g2 = code.info_g2();

    let mut a_hat = Vec::with_capacity(l);
    let mut coverage = Vec::with_capacity(l);
    let mut counts = Vec::with_capacity(l);

    let mut known = vec![None; n];
    set(&mut known, &ups_set, &ctx.upsilon);
    set(&mut known, &phi_set, &ctx.phi[0]);
    coverage.push(covers(&known, &required));
    counts.push(known.iter().flatten().count());
    a_hat.push(ctx.decode_block(&known, &y1_blocks[0]));
    let lambda = gather(&a_hat[0], &plan.rlambda);

    let mut psi2_prev: Vec<u8> = vec![];
    let mut gamma1_prev: Vec<u8> = vec![];
    for b in 0..l - 1 {
        let ai = &a_hat[b];
        let psi = gather(ai, &p.c2);
        let gamma = gather(ai, &p.c12);
        let (psi1, psi2) = psi.split_at(sp.psi.0);
        let (gamma1, gamma2) = gamma.split_at(sp.gamma.0);
        let mut theta_bar_next = gather(ai, &plan.r1);
        theta_bar_next.extend(xor_or_copy(&gather(ai, &plan.r12p), &psi2_prev));
        let mut gamma_bar_next = xor_or_copy(&gather(ai, &plan.r12), &gamma1_prev);
        gamma_bar_next.extend(gather(ai, &plan.r1p));
        let theta_next = xor(&theta_bar_next, &ctx.kappa_theta);
        let gamma_next = xor(&gamma_bar_next, &ctx.kappa_gamma);
        let pi = gather(ai, &info_g2);

        let mut known = vec![None; n];
        set(&mut known, &p.c1, &theta_next);
        set(&mut known, &p.c12, &gamma_next);
        set(&mut known, &plan.r2, psi1);
        set(&mut known, &plan.r2p, gamma2);
        set(&mut known, &plan.rs, &pi);
        set(&mut known, &plan.rlambda, &lambda);
        set(&mut known, &phi_set, &ctx.phi[b + 1]);
        coverage.push(covers(&known, &required));
        counts.push(known.iter().flatten().count());
        let next = ctx.decode_block(&known, &y1_blocks[b + 1]);
        psi2_prev = psi2.to_vec();
        gamma1_prev = gamma1.to_vec();
        a_hat.push(next);
    }
    finish(ctx, a_hat, coverage, counts)
}

/// Backward decoding for receiver 2; `y2_blocks[b]` is the observation of block `b`.
pub fn decode_rx2(ctx: &ReceiverContext<'_>, y2_blocks: &[Vec<usize>]) -> DecodeOutput {
    let code = ctx.code;
    let l = code.blocks;
    let n = code.n();
    let d = &code.design;
    let p = &d.partition;
    let plan = &d.plan;
    let sp = plan.splits;
    let ups_set = d.sets.upsilon_set(2);
    let phi_set = d.sets.phi_set(2);
    let required = ctx.required();
    let info_g2 = code.info_g2();

    let mut a_hat: Vec<Vec<u8>> = vec![vec![]; l];
    let mut coverage = vec![false; l];
    let mut counts = vec![0; l];

    let mut known = vec![None; n];
    set(&mut known, &ups_set, &ctx.upsilon);
    set(&mut known, &phi_set, &ctx.phi[l - 1]);
    coverage[l - 1] = covers(&known, &required);
    counts[l - 1] = known.iter().flatten().count();
    a_hat[l - 1] = ctx.decode_block(&known, &y2_blocks[l - 1]);
    let lambda = gather(&a_hat[l - 1], &plan.rlambda);

    let mut theta2_next: Vec<u8> = vec![];
    let mut gbar1_next: Vec<u8> = vec![];
    for b in (1..l).rev() {
        let ai = &a_hat[b];
        let theta_bar = xor(&gather(ai, &p.c1), &ctx.kappa_theta);
        let gamma_bar = xor(&gather(ai, &p.c12), &ctx.kappa_gamma);
        let (theta1, theta2) = theta_bar.split_at(sp.theta_bar.0);
        let (gbar1, gbar2) = gamma_bar.split_at(sp.gamma_bar.0);
        let mut psi_prev = gather(ai, &plan.r2);
        psi_prev.extend(xor_or_copy(&gather(ai, &plan.r12p), &theta2_next));
        let mut gamma_prev = xor_or_copy(&gather(ai, &plan.r12), &gbar1_next);
        gamma_prev.extend(gather(ai, &plan.r2p));
        let pi_prev = gather(ai, &plan.rs);

        let mut known = vec![None; n];
        set(&mut known, &plan.r1, theta1);
        set(&mut known, &plan.r1p, gbar2);
        set(&mut known, &p.c2, &psi_prev);
        set(&mut known, &p.c12, &gamma_prev);
        set(&mut known, &info_g2, &pi_prev);
        set(&mut known, &plan.rlambda, &lambda);
        set(&mut known, &phi_set, &ctx.phi[b - 1]);
        coverage[b - 1] = covers(&known, &required);
        counts[b - 1] = known.iter().flatten().count();
        a_hat[b - 1] = ctx.decode_block(&known, &y2_blocks[b - 1]);
        theta2_next = theta2.to_vec();
        gbar1_next = gbar1.to_vec();
    }
    finish(ctx, a_hat, coverage, counts)
}

/// Indices receiver `k` is handed in every non-initial block, for auditing.
pub fn chained_known_set(code: &ChainCode, receiver: usize) -> Vec<usize> {
    let d = &code.design;
    let p = &d.partition;
    let plan = &d.plan;
    let phi = d.sets.phi_set(receiver);
    if receiver == 1 {
        union(&[&p.c1, &p.c12, &plan.r2, &plan.r2p, &plan.rs, &plan.rlambda, &phi])
    } else {
        union(&[&plan.r1, &plan.r1p, &p.c2, &p.c12, &code.info_g2(), &plan.rlambda, &phi])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ComponentChannel, DmsSpec};
    use crate::codec::{encode_session, generate_keys, SessionMessages};
    use crate::rng::RngBits;
    use crate::sets::{synthetic_sets, CellSizes, ChainingCase, Design};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless() -> DmsSpec {
        DmsSpec {
            input_law: [0.5, 0.0, 0.0, 0.5],
            y1: ComponentChannel::identity(),
            y2: ComponentChannel::identity(),
            z: ComponentChannel::Bec { erasure: 0.7 },
        }
    }

    fn code_for(case: ChainingCase, n: usize, blocks: usize, seed: u64) -> ChainCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = loop {
            let s = CellSizes::random_for_case(case, 3, &mut rng);
            if s.total() <= n {
                break s;
            }
        };
        let sets = synthetic_sets(sizes, n, 0.3, &mut rng).unwrap();
        ChainCode::new(Design::from_sets(noiseless(), sets).unwrap(), blocks).unwrap()
    }

    fn as_obs(x: &[u8]) -> Vec<usize> {
        x.iter().map(|&b| b as usize).collect()
    }

    #[test]
    fn noiseless_round_trip_all_cases() {
        for case in ChainingCase::ALL {
            for blocks in [2, 3, 4] {
                let code = code_for(case, 8, blocks, 1000 + blocks as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(21);
                let msgs = SessionMessages::random(&code, &mut rng);
                let keys = generate_keys(&code, &mut rng);
                let enc = encode_session(&code, &msgs, &keys, &mut RngBits(rng)).unwrap();
                let obs: Vec<Vec<usize>> = enc.ciphertext.x_blocks.iter().map(|x| as_obs(x)).collect();
                for k in 1..=2 {
                    let ctx = ReceiverContext::new(&code, k, &keys, &enc.ciphertext);
                    let out = if k == 1 { decode_rx1(&ctx, &obs) } else { decode_rx2(&ctx, &obs) };
                    assert!(out.coverage.iter().all(|&c| c), "coverage case {case} rx{k}");
                    assert_eq!(out.private, msgs.private, "W case {case} L {blocks} rx{k}");
                    assert_eq!(out.confidential, msgs.confidential, "S case {case} L {blocks} rx{k}");
                    let truth: Vec<Vec<u8>> = enc.blocks.iter().map(|b| b.a_tilde.clone()).collect();
                    assert_eq!(out.a_hat, truth);
                }
            }
        }
    }

    #[test]
    fn receiver1_known_set_is_exact() {
        for case in ChainingCase::ALL {
            let code = code_for(case, 16, 3, 7);
            let required = complement(code.design.sets.low(receiver_cond(1)), 16);
            assert_eq!(chained_known_set(&code, 1), required, "case {case}");
            let required2 = complement(code.design.sets.low(receiver_cond(2)), 16);
            let known2 = chained_known_set(&code, 2);
            assert!(crate::sets::difference(&required2, &known2).is_empty(), "case {case}");
        }
    }

    #[test]
    fn corrupted_side_info_only_affects_estimates() {
        let code = code_for(ChainingCase::A, 8, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msgs = SessionMessages::random(&code, &mut rng);
        let keys = generate_keys(&code, &mut rng);
        let mut enc = encode_session(&code, &msgs, &keys, &mut RngBits(rng)).unwrap();
        if let Some(bit) = enc.ciphertext.side_info[0].first_mut() {
            *bit ^= 1;
        }
        let obs: Vec<Vec<usize>> = enc.ciphertext.x_blocks.iter().map(|x| as_obs(x)).collect();
        let ctx = ReceiverContext::new(&code, 1, &keys, &enc.ciphertext);
        let out = decode_rx1(&ctx, &obs);
        assert_eq!(out.a_hat.len(), 3);
    }
}
