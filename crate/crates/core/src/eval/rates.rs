//! Achieved rates against the corner-point targets across block lengths.

use super::EvalError;
use crate::channel::{corner_point_rates, DmsSpec};
use crate::sets::{
    build_polarized_sets, classify_case, compute_entropies, derive_chaining_plan, partition_high_set, rate_report,
    EntropyMethod, SetError,
};
use serde::{Deserialize, Serialize};

/// One `(n, L)` row of a rate scan. Plan-dependent columns are `None` when
/// the sets admit no chaining case at that `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub blocks: usize,
    pub case_label: Option<String>,
    pub private: f64,
    pub randomization: f64,
    pub extra_randomness: Option<f64>,
    pub confidential: Option<f64>,
    pub key: Option<f64>,
    pub target_private: f64,
    pub target_confidential: f64,
    pub target_randomization: f64,
    pub gap_private: f64,
    pub gap_confidential: Option<f64>,
    pub gap_randomization: f64,
}

/// Builds sets at each `n` and reports rates for each block count.
pub fn rate_convergence_scan(
    spec: &DmsSpec,
    beta: f64,
    n_list: &[usize],
    blocks_list: &[usize],
    method: EntropyMethod,
) -> Result<Vec<RateRow>, EvalError> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::InvalidArgument("block lengths must be strictly ascending".into()));
    }
    let target = corner_point_rates(spec);
    let mut rows = Vec::new();
    for &n in n_list {
        let profile = compute_entropies(spec, n, method)?;
        let sets = build_polarized_sets(&profile, beta)?;
        let partition = partition_high_set(&sets);
        let plan = match classify_case(&partition) {
            Ok(case) => Some(derive_chaining_plan(&partition, case)?),
            Err(SetError::CaseUndefined { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let private = partition.c.len() as f64 / n as f64;
        let randomization = sets.randomizer_set().len() as f64 / n as f64;
        for &blocks in blocks_list {
            let report = plan.as_ref().map(|p| rate_report(p, &partition, &sets, blocks));
            rows.push(RateRow {
                n,
                blocks,
                case_label: plan.as_ref().map(|p| p.case.to_string()),
                private,
                randomization,
                extra_randomness: report.map(|r| r.extra_randomness),
                confidential: report.map(|r| r.confidential),
                key: report.map(|r| r.key),
                target_private: target.private,
                target_confidential: target.confidential,
                target_randomization: target.randomization,
                gap_private: (private - target.private).abs(),
                gap_confidential: report.map(|r| (r.confidential - target.confidential).abs()),
                gap_randomization: (randomization - target.randomization).abs(),
            });
        }
    }
    Ok(rows)
}
