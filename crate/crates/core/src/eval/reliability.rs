//! Monte-Carlo reliability trials.

use super::constants::{analytic_constants, reliability_bound};
use super::EvalError;
use crate::codec::{encode_session, generate_keys, ChainCode, SessionMessages};
use crate::decoder::{decode_rx1, decode_rx2, ReceiverContext};
use crate::rng::{substream, BlockStreams, Purpose};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n: usize,
    pub blocks: usize,
    pub case_label: String,
    pub trials: usize,
    pub seed: u64,
    /// Blocks whose `(W_i, S_i)` was decoded wrongly, summed over trials.
    pub block_errors_rx1: usize,
    pub block_errors_rx2: usize,
    /// Trials in which either receiver got any block wrong.
    pub session_errors: usize,
    pub session_error_rate: f64,
    pub session_error_std_error: f64,
    pub bound_value: f64,
    pub delta: f64,
    pub delta_star: f64,
    pub delta_s: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    rx1: usize,
    rx2: usize,
    sessions: usize,
}

fn run_trial(code: &ChainCode, seed: u64, t: u64) -> Result<Tally, EvalError> {
    let l = code.blocks;
    let msgs = SessionMessages::random(code, &mut substream(seed, Purpose::Messages, t, 0));
    let keys = generate_keys(code, &mut substream(seed, Purpose::Keys, t, 0));
    let enc = encode_session(code, &msgs, &keys, &mut BlockStreams::new(seed, t))?;
    let ct = &enc.ciphertext;
    let mut ch = substream(seed, Purpose::Channel, t, 0);
    let outs: Vec<_> = ct.x_blocks.iter().map(|x| code.design.spec.sample_outputs(x, &mut ch)).collect();
    let y1: Vec<Vec<usize>> = outs.iter().map(|o| o.y1.clone()).collect();
    let y2: Vec<Vec<usize>> = outs.iter().map(|o| o.y2.clone()).collect();
    let d1 = decode_rx1(&ReceiverContext::new(code, 1, &keys, ct), &y1);
    let d2 = decode_rx2(&ReceiverContext::new(code, 2, &keys, ct), &y2);
    let wrong = |d: &crate::decoder::DecodeOutput, i: usize| {
        d.private[i] != msgs.private[i] || d.confidential[i] != msgs.confidential[i]
    };
    let mut tally = Tally::default();
    for i in 0..l {
        tally.rx1 += wrong(&d1, i) as usize;
        tally.rx2 += wrong(&d2, i) as usize;
    }
    tally.sessions = (tally.rx1 + tally.rx2 > 0) as usize;
    Ok(tally)
}

/// Runs `trials` independent sessions over the design's channels.
///
/// Trial `t` draws its messages, keys, encoder randomness and channel noise
/// from sub-streams of `seed` indexed by `t`, so results do not depend on
/// `workers`.
pub fn run_reliability_trials(code: &ChainCode, trials: usize, seed: u64, workers: usize) -> Result<TrialReport, EvalError> {
    if trials == 0 {
        return Err(EvalError::InvalidArgument("trials must be at least 1".into()));
    }
    let workers = workers.max(1).min(trials);
    let chunk = trials.div_ceil(workers);
    let parts: Vec<Result<Tally, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(trials)..((w + 1) * chunk).min(trials);
                scope.spawn(move || {
                    let mut acc = Tally::default();
                    for t in range {
                        let r = run_trial(code, seed, t as u64)?;
                        acc.rx1 += r.rx1;
                        acc.rx2 += r.rx2;
                        acc.sessions += r.sessions;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = Tally::default();
    for p in parts {
        let p = p?;
        total.rx1 += p.rx1;
        total.rx2 += p.rx2;
        total.sessions += p.sessions;
    }
    let n = code.n();
    let beta = code.design.sets.beta;
    let c = analytic_constants(n, beta);
    let rate = total.sessions as f64 / trials as f64;
    Ok(TrialReport {
        n,
        blocks: code.blocks,
        case_label: code.design.case().to_string(),
        trials,
        seed,
        block_errors_rx1: total.rx1,
        block_errors_rx2: total.rx2,
        session_errors: total.sessions,
        session_error_rate: rate,
        session_error_std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        bound_value: reliability_bound(n, beta, code.blocks),
        delta: c.delta,
        delta_star: c.delta_star,
        delta_s: c.delta_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ComponentChannel, DmsSpec};
    use crate::sets::{synthetic_sets, CellSizes, ChainingCase, Design};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless_code() -> ChainCode {
        let spec = DmsSpec {
            input_law: [0.5, 0.0, 0.0, 0.5],
            y1: ComponentChannel::identity(),
            y2: ComponentChannel::identity(),
            z: ComponentChannel::Bec { erasure: 0.7 },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sizes = CellSizes::random_for_case(ChainingCase::B, 2, &mut rng);
        let sets = synthetic_sets(sizes, 16, 0.3, &mut rng).unwrap();
        ChainCode::new(Design::from_sets(spec, sets).unwrap(), 3).unwrap()
    }

    #[test]
    fn noiseless_has_no_errors() {
        let r = run_reliability_trials(&noiseless_code(), 200, 4, 2).unwrap();
        assert_eq!(r.session_errors, 0);
        assert_eq!(r.block_errors_rx1 + r.block_errors_rx2, 0);
        assert!(r.bound_value > 1.0);
    }

    #[test]
    fn useless_legitimate_channels_fail() {
        let mut code = noiseless_code();
        code.design.spec.y1 = ComponentChannel::useless();
        code.design.spec.y2 = ComponentChannel::useless();
        let r = run_reliability_trials(&code, 200, 4, 2).unwrap();
        assert!(r.session_error_rate > 0.9);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        let design = Design::construct(&spec, 16, 0.25, crate::sets::EntropyMethod::ExactBec).unwrap();
        let code = ChainCode::new(design, 2).unwrap();
        let a = run_reliability_trials(&code, 64, 9, 1).unwrap();
        let b = run_reliability_trials(&code, 64, 9, 4).unwrap();
        assert_eq!(a, b);
    }
}
