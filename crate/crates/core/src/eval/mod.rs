//! Evaluation harness: reliability trials, exact and estimated leakage,
//! total-variation checks, independence tests, rate scans and report output.
//!
//! Exact quantities come from enumerating the encoder's random choices with
//! [`enumerate::ScriptedSource`]; they are only feasible at tiny block
//! lengths and every entry point takes an explicit budget.

pub mod constants;
pub mod enumerate;
pub mod independence;
pub mod leakage;
pub mod rates;
pub mod reliability;
pub mod report;
pub mod tv;

use crate::channel::ChannelError;
use crate::codec::{encode_session, ChainCode, CodecError, EncodedSession, KeyMaterial, SessionMessages};
use crate::rng::BitSource;
use crate::sets::SetError;
use thiserror::Error;

pub use constants::{analytic_constants, reliability_bound, AnalyticConstants};
pub use independence::{independence_suite, IndependenceRecord, IndependenceTest};
pub use leakage::{exact_leakage, plugin_leakage, LeakageReport, PluginEstimate};
pub use rates::{rate_convergence_scan, RateRow};
pub use reliability::{run_reliability_trials, TrialReport};
pub use tv::tv_distance_check;

/// Default number of weighted outcomes an exact computation may visit.
pub const DEFAULT_BUDGET: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("budget exceeded: {what} (budget {budget} outcomes)")]
    BudgetExceeded { what: String, budget: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl EvalError {
    pub fn is_budget(&self) -> bool {
        matches!(self, EvalError::BudgetExceeded { .. })
    }
}

/// One complete encoder run: its inputs and everything it produced.
#[derive(Debug, Clone)]
pub struct SessionDraw {
    pub messages: SessionMessages,
    pub keys: KeyMaterial,
    pub encoded: EncodedSession,
}

fn draw_bits<S: BitSource + ?Sized>(src: &mut S, len: usize) -> Vec<u8> {
    (0..len).map(|_| src.uniform_bit()).collect()
}

/// Draws uniform messages, randomizers and keys from `src`, then encodes.
/// The side-information key is left at zero: it only masks the side channel
/// and never reaches the channel input.
pub fn draw_session<S: BitSource + ?Sized>(code: &ChainCode, src: &mut S) -> Result<SessionDraw, CodecError> {
    let dims = code.dimensions();
    let d = &code.design;
    let p = &d.partition;
    let l = code.blocks;
    let messages = SessionMessages {
        private: (0..l).map(|_| draw_bits(src, dims.private)).collect(),
        confidential: (1..=l).map(|i| draw_bits(src, dims.confidential(i))).collect(),
        randomizers: (0..l).map(|_| draw_bits(src, dims.randomizer)).collect(),
    };
    let keys = KeyMaterial {
        kappa_theta: draw_bits(src, p.c1.len()),
        kappa_gamma: draw_bits(src, p.c12.len()),
        kappa_upsilon_phi: [vec![0; code.side_info_len(1)], vec![0; code.side_info_len(2)]],
        lambda0_x: draw_bits(src, d.sets.high(crate::channel::Conditioning::XGivenVZ).len()),
    };
    let encoded = encode_session(code, &messages, &keys, src)?;
    Ok(SessionDraw {
        messages,
        keys,
        encoded,
    })
}

/// Every session the encoder can produce, with its exact probability.
pub fn enumerate_sessions(code: &ChainCode, budget: usize) -> Result<Vec<(f64, SessionDraw)>, EvalError> {
    let leaves = enumerate::enumerate_paths(budget, |src| draw_session(code, src))?;
    leaves
        .into_iter()
        .map(|(w, r)| r.map(|s| (w, s)).map_err(EvalError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DmsSpec;
    use crate::sets::{Design, EntropyMethod};

    #[test]
    fn session_weights_sum_to_one() {
        let spec = DmsSpec::bec_triple(0.2, 0.1, 0.7);
        let design = Design::construct(&spec, 2, 0.3, EntropyMethod::ExactBec).unwrap();
        let code = ChainCode::new(design, 2).unwrap();
        let leaves = enumerate_sessions(&code, 1 << 16).unwrap();
        let total: f64 = leaves.iter().map(|(w, _)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
