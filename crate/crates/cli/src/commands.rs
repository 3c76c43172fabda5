//! Subcommand implementations.

use crate::cache::{cache_key, CacheStatus, SetCache};
use crate::config::{ExperimentConfig, LeakageMode, MethodConfig, Suite};
use crate::error::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use wbc_polar::channel::{validate_and_order, BlockOutputs, ChannelOrderReport, CornerRates};
use wbc_polar::codec::{
    encode_session, generate_keys, ChainCode, CodecError, KeyMaterial, MessageDimensions, SessionArtifact,
    SessionMessages, ARTIFACT_VERSION,
};
use wbc_polar::decoder::{decode_rx1, decode_rx2, DecodeOutput, ReceiverContext};
use wbc_polar::eval::independence::SuiteInputs;
use wbc_polar::eval::report::{to_csv, to_json, Report, ReportMeta};
use wbc_polar::eval::{
    analytic_constants, exact_leakage, independence_suite, plugin_leakage, rate_convergence_scan,
    reliability_bound, run_reliability_trials, tv_distance_check, AnalyticConstants,
};
use wbc_polar::rng::{substream, BlockStreams, Purpose};
use wbc_polar::sets::{Design, PolarizedSets, RateReport};
use wbc_polar::{Conditioning, DmsSpec};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub sets_cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub suites: Vec<Suite>,
}

/// Loads the config, applies command-line overrides and validates it.
pub fn load_config(g: &Globals) -> Result<ExperimentConfig, CliError> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if g.seed.is_some() {
        config.seed = g.seed;
    }
    if !g.suites.is_empty() {
        config.suites = g.suites.clone();
    }
    if g.out.is_some() {
        config.out = g.out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_file(path, &text)
}

fn out_dir(config: Option<&ExperimentConfig>, g: &Globals) -> Result<PathBuf, CliError> {
    g.out
        .clone()
        .or_else(|| config.and_then(|c| c.out.clone()))
        .ok_or_else(|| CliError::Config("an output directory is required (--out)".into()))
}

/// The channel law with receivers ordered, its sets and (when a chaining case
/// exists) the full design.
struct Built {
    spec: DmsSpec,
    order: ChannelOrderReport,
    sets: PolarizedSets,
}

impl Built {
    fn design(&self) -> Result<Design, CliError> {
        Ok(Design::from_sets(self.spec.clone(), self.sets.clone())?)
    }

    fn code(&self, blocks: usize) -> Result<ChainCode, CliError> {
        Ok(ChainCode::new(self.design()?, blocks)?)
    }
}

fn report_cache(status: CacheStatus, key: &str) {
    match status {
        CacheStatus::Hit => eprintln!("sets cache hit: {key}"),
        CacheStatus::Miss => eprintln!("sets cache miss: {key} (stored)"),
        CacheStatus::Disabled => {}
    }
}

fn build(config: &ExperimentConfig, g: &Globals, n: usize) -> Result<Built, CliError> {
    let (spec, order) = validate_and_order(&config.channel.spec())?;
    let cache = SetCache::new(g.sets_cache.clone());
    let method = config.method();
    let key = cache_key(&spec, n, config.beta, &method);
    let (sets, status) = cache.get_or_build(&spec, n, config.beta, method, g.workers)?;
    report_cache(status, &key);
    Ok(Built { spec, order, sets })
}

fn seeds(config: &ExperimentConfig) -> Vec<u64> {
    let mut s = vec![config.seed()];
    if let MethodConfig::MonteCarlo { seed, .. } = config.method {
        s.push(seed);
    }
    s
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSize {
    pub conditioning: String,
    pub high: usize,
    pub low: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructSummary {
    pub n: usize,
    pub blocks: usize,
    pub beta: f64,
    pub delta_n: f64,
    pub sets_key: String,
    pub channel_order: ChannelOrderReport,
    pub case: String,
    pub sets: Vec<SetSize>,
    pub partition: serde_json::Map<String, serde_json::Value>,
    pub plan: serde_json::Map<String, serde_json::Value>,
    pub dimensions: MessageDimensions,
    pub rates: RateReport,
    pub targets: CornerRates,
}

pub fn construct(g: &Globals) -> Result<ConstructSummary, CliError> {
    let config = load_config(g)?;
    let built = build(&config, g, config.n)?;
    let code = built.code(config.blocks)?;
    let d = &code.design;
    let p = &d.partition;
    let cells: [(&str, &[usize]); 10] = [
        ("G", &p.g),
        ("C", &p.c),
        ("G0", &p.g0),
        ("G1", &p.g1),
        ("G2", &p.g2),
        ("G12", &p.g12),
        ("C0", &p.c0),
        ("C1", &p.c1),
        ("C2", &p.c2),
        ("C12", &p.c12),
    ];
    let size_map = |items: &[(&str, &[usize])]| {
        items
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::from(v.len())))
            .collect::<serde_json::Map<_, _>>()
    };
    let summary = ConstructSummary {
        n: config.n,
        blocks: config.blocks,
        beta: config.beta,
        delta_n: d.sets.delta_n,
        sets_key: cache_key(&built.spec, config.n, config.beta, &config.method()),
        channel_order: built.order.clone(),
        case: d.case().to_string(),
        sets: Conditioning::ALL
            .iter()
            .map(|&c| SetSize {
                conditioning: c.label().to_string(),
                high: d.sets.high(c).len(),
                low: d.sets.low(c).len(),
            })
            .collect(),
        partition: size_map(&cells),
        plan: size_map(&d.plan.lists()),
        dimensions: code.dimensions(),
        rates: d.rates(config.blocks),
        targets: wbc_polar::channel::corner_point_rates(&built.spec),
    };
    if let Some(dir) = g.out.clone().or(config.out.clone()) {
        write_json(&dir.join("construct.json"), &summary)?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

/// Result of one suite: its rows are on disk; failures of hard invariants
/// are listed here.
pub struct SuiteOutcome {
    pub suite: Suite,
    pub summary: String,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageRow {
    pub n: usize,
    pub blocks: usize,
    pub total_confidential_bits: usize,
    pub exact_bits: Option<f64>,
    pub plugin_bits: Option<f64>,
    pub plugin_ci_low: Option<f64>,
    pub plugin_ci_high: Option<f64>,
    pub plugin_std_error: Option<f64>,
    pub plugin_samples: Option<usize>,
    pub exact_within_ci: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub n: usize,
    pub beta: f64,
    pub tv_distance: f64,
    pub tv_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    #[serde(flatten)]
    pub constants: AnalyticConstants,
    pub blocks: usize,
    pub reliability_bound: f64,
}

fn emit<T: Serialize>(dir: &Path, config: &ExperimentConfig, suite: Suite, rows: Vec<T>) -> Result<(), CliError> {
    let report = Report {
        meta: ReportMeta::new(&config.hashed(), seeds(config)),
        suite: suite.name().to_string(),
        rows,
    };
    let mut json = to_json(&report);
    json.push('\n');
    write_file(&dir.join(format!("{}.json", suite.name())), &json)?;
    write_file(&dir.join(format!("{}.csv", suite.name())), &to_csv(&report))
}

fn legit_noiseless(spec: &DmsSpec) -> bool {
    [Conditioning::VGivenY1, Conditioning::VGivenY2]
        .iter()
        .all(|&c| spec.conditional_entropy(c) < 1e-12)
}

fn run_suite(
    suite: Suite,
    config: &ExperimentConfig,
    g: &Globals,
    built: &Built,
    dir: &Path,
) -> Result<SuiteOutcome, CliError> {
    let seed = config.seed();
    let workers = g.workers;
    let mut failures = Vec::new();
    let summary = match suite {
        Suite::Reliability => {
            let code = built.code(config.blocks)?;
            let r = run_reliability_trials(&code, config.trials, seed, workers)?;
            if legit_noiseless(&built.spec) && r.session_errors > 0 {
                failures.push(format!(
                    "reliability: {} session errors on noiseless legitimate channels",
                    r.session_errors
                ));
            }
            let s = format!(
                "case {}, {} trials: {} session errors (rate {:.4e} ± {:.1e}), bound {:.3e}",
                r.case_label, r.trials, r.session_errors, r.session_error_rate, r.session_error_std_error, r.bound_value
            );
            emit(dir, config, suite, vec![r])?;
            s
        }
        Suite::Leakage => {
            let code = built.code(config.blocks)?;
            let mode = config.leakage.mode;
            let exact = match mode {
                LeakageMode::Exact | LeakageMode::Both => exact_leakage(&code, config.budget)?.exact_leakage_bits,
                LeakageMode::Plugin => None,
            };
            let plugin = match mode {
                LeakageMode::Plugin | LeakageMode::Both => Some(plugin_leakage(
                    &code,
                    config.leakage.plugin_samples,
                    config.leakage.bootstrap,
                    config.leakage.confidence,
                    seed,
                    workers,
                )?),
                LeakageMode::Exact => None,
            };
            let row = LeakageRow {
                n: code.n(),
                blocks: code.blocks,
                total_confidential_bits: code.dimensions().total_confidential(),
                exact_bits: exact,
                plugin_bits: plugin.map(|p| p.estimate_bits),
                plugin_ci_low: plugin.map(|p| p.ci_low),
                plugin_ci_high: plugin.map(|p| p.ci_high),
                plugin_std_error: plugin.map(|p| p.std_error),
                plugin_samples: plugin.map(|p| p.samples),
                exact_within_ci: exact.zip(plugin).map(|(e, p)| p.ci_low <= e && e <= p.ci_high),
            };
            let s = format!(
                "{} confidential bits, exact {}, plug-in {}",
                row.total_confidential_bits,
                row.exact_bits.map_or("-".into(), |v| format!("{v:.6}")),
                row.plugin_bits.map_or("-".into(), |v| format!("{v:.6}")),
            );
            emit(dir, config, suite, vec![row])?;
            s
        }
        Suite::Tv => {
            let tv = tv_distance_check(&built.spec, &built.sets, config.budget)?;
            let row = TvRow {
                n: config.n,
                beta: config.beta,
                tv_distance: tv,
                tv_per_bit: tv / config.n as f64,
            };
            let s = format!("n = {}: distance {:.6}, per bit {:.6}", row.n, row.tv_distance, row.tv_per_bit);
            emit(dir, config, suite, vec![row])?;
            s
        }
        Suite::Independence => {
            let ic = &config.independence;
            let trend = match ic.trend_n {
                Some([a, b]) => Some((build(config, g, a)?.sets, build(config, g, b)?.sets)),
                None => None,
            };
            let code = if ic.conditional { Some(built.code(config.blocks)?) } else { None };
            let inputs = SuiteInputs {
                trend: trend.as_ref().map(|(a, b)| (&built.spec, a, b)),
                chained: code.as_ref(),
                pad_bits: ic.pad_bits.clone(),
                chi_square_samples: ic.chi_square_samples,
                seed,
                budget: config.budget,
            };
            let records = independence_suite(&inputs)?;
            for r in records.iter().filter(|r| r.hard && !r.passed) {
                failures.push(format!("independence: {:?} failed ({})", r.test, r.detail));
            }
            let passed = records.iter().filter(|r| r.passed).count();
            let s = format!("{passed}/{} records passed", records.len());
            emit(dir, config, suite, records)?;
            s
        }
        Suite::Rates => {
            let n_list = config.rates.n_list.clone().unwrap_or_else(|| vec![config.n]);
            let blocks_list = config.rates.blocks_list.clone().unwrap_or_else(|| vec![config.blocks]);
            let rows = rate_convergence_scan(&built.spec, config.beta, &n_list, &blocks_list, config.method())?;
            let s = format!("{} rows over n = {n_list:?}, L = {blocks_list:?}", rows.len());
            emit(dir, config, suite, rows)?;
            s
        }
        Suite::Constants => {
            let row = ConstantsRow {
                constants: analytic_constants(config.n, config.beta),
                blocks: config.blocks,
                reliability_bound: reliability_bound(config.n, config.beta, config.blocks),
            };
            let s = format!(
                "delta_n = {:.6e}, delta* = {:.6e}, bound = {:.6e}",
                row.constants.delta, row.constants.delta_star, row.reliability_bound
            );
            emit(dir, config, suite, vec![row])?;
            s
        }
    };
    Ok(SuiteOutcome {
        suite,
        summary,
        failures,
    })
}

/// Runs the selected suites in order, writing `<out>/<suite>.json` and
/// `.csv` for each. Stops at the first error; suite failures are collected.
pub fn run(g: &Globals, mut on_suite: impl FnMut(&SuiteOutcome)) -> Result<(), CliError> {
    let config = load_config(g)?;
    let dir = out_dir(Some(&config), g)?;
    let mut suites: Vec<Suite> = Vec::new();
    for s in &config.suites {
        if !suites.contains(s) {
            suites.push(*s);
        }
    }
    if suites.is_empty() {
        return Err(CliError::Config("no suites selected (config `suites` or --suite)".into()));
    }
    let built = build(&config, g, config.n)?;
    let mut failures = Vec::new();
    for suite in suites {
        let outcome = run_suite(suite, &config, g, &built, &dir)?;
        on_suite(&outcome);
        failures.extend(outcome.failures);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailed(failures))
    }
}

// ---------------------------------------------------------------------------
// encode / decode
// ---------------------------------------------------------------------------

/// Channel outputs of every block of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observations {
    pub blocks: Vec<BlockOutputs>,
}

pub struct EncodeSummary {
    pub dir: PathBuf,
    pub dimensions: MessageDimensions,
    pub case: String,
    pub keys_withheld: bool,
}

/// Encodes one session. Messages come from `messages` or from the seed; keys,
/// encoder randomness and channel noise always come from the seed.
pub fn encode(g: &Globals, messages: Option<&Path>, withhold_keys: bool) -> Result<EncodeSummary, CliError> {
    let config = load_config(g)?;
    let dir = out_dir(Some(&config), g)?;
    let seed = config.seed();
    let built = build(&config, g, config.n)?;
    let code = built.code(config.blocks)?;
    let msgs = match messages {
        Some(path) => read_json::<SessionMessages>(path)?,
        None => SessionMessages::random(&code, &mut substream(seed, Purpose::Messages, 0, 0)),
    };
    msgs.check(&code)?;
    let keys = generate_keys(&code, &mut substream(seed, Purpose::Keys, 0, 0));
    let enc = encode_session(&code, &msgs, &keys, &mut BlockStreams::new(seed, 0))?;
    let mut ch = substream(seed, Purpose::Channel, 0, 0);
    let observations = Observations {
        blocks: enc
            .ciphertext
            .x_blocks
            .iter()
            .map(|x| built.spec.sample_outputs(x, &mut ch))
            .collect(),
    };
    let dimensions = code.dimensions();
    let case = code.design.case().to_string();
    let artifact = SessionArtifact::new(code, (!withhold_keys).then(|| keys.clone()), enc.ciphertext);
    write_json(&dir.join("artifact.json"), &artifact)?;
    write_json(&dir.join("keys.json"), &keys)?;
    write_json(&dir.join("messages.json"), &msgs)?;
    write_json(&dir.join("observations.json"), &observations)?;
    Ok(EncodeSummary {
        dir,
        dimensions,
        case,
        keys_withheld: withhold_keys,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub block: usize,
    /// The known bits passed to SC covered every index it cannot decode alone.
    pub side_info_covered: bool,
    pub private_correct: Option<bool>,
    pub confidential_correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverReport {
    pub receiver: usize,
    pub private: Vec<Vec<u8>>,
    pub confidential: Vec<Vec<u8>>,
    pub blocks: Vec<BlockCheck>,
    pub all_correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub version: u32,
    pub receivers: Vec<ReceiverReport>,
}

fn check_observations(code: &ChainCode, obs: &Observations) -> Result<(), CliError> {
    let mismatch = |what: String, expected: usize, got: usize| CodecError::DimensionMismatch { what, expected, got };
    if obs.blocks.len() != code.blocks {
        return Err(mismatch("observation blocks".into(), code.blocks, obs.blocks.len()).into());
    }
    let spec = &code.design.spec;
    for (b, o) in obs.blocks.iter().enumerate() {
        for (name, y, ch) in [("y1", &o.y1, &spec.y1), ("y2", &o.y2, &spec.y2)] {
            if y.len() != code.n() {
                return Err(mismatch(format!("{name} of block {}", b + 1), code.n(), y.len()).into());
            }
            if let Some(&s) = y.iter().find(|&&s| s >= ch.output_size()) {
                return Err(CliError::Config(format!(
                    "{name} of block {} has symbol {s} outside an alphabet of {}",
                    b + 1,
                    ch.output_size()
                )));
            }
        }
    }
    Ok(())
}

fn receiver_report(receiver: usize, out: DecodeOutput, reference: Option<&SessionMessages>) -> ReceiverReport {
    let blocks: Vec<BlockCheck> = (0..out.private.len())
        .map(|i| BlockCheck {
            block: i + 1,
            side_info_covered: out.coverage[i],
            private_correct: reference.map(|m| m.private[i] == out.private[i]),
            confidential_correct: reference.map(|m| m.confidential[i] == out.confidential[i]),
        })
        .collect();
    let all_correct = reference.map(|_| {
        blocks
            .iter()
            .all(|b| b.private_correct == Some(true) && b.confidential_correct == Some(true))
    });
    ReceiverReport {
        receiver,
        private: out.private,
        confidential: out.confidential,
        blocks,
        all_correct,
    }
}

/// Decodes a session artifact for both receivers and writes `decoded.json`.
pub fn decode(
    g: &Globals,
    artifact: &Path,
    observations: &Path,
    keys: Option<&Path>,
    messages: Option<&Path>,
) -> Result<DecodeReport, CliError> {
    let dir = out_dir(None, g)?;
    let art: SessionArtifact = read_json(artifact)?;
    if art.version != ARTIFACT_VERSION {
        return Err(CliError::format(
            artifact,
            format!("artifact version {} is not {ARTIFACT_VERSION}", art.version),
        ));
    }
    let keys: KeyMaterial = match keys {
        Some(path) => read_json(path)?,
        None => art
            .keys
            .clone()
            .ok_or_else(|| CliError::Config("the artifact withholds its keys; pass --keys".into()))?,
    };
    let code = &art.code;
    keys.check(code)?;
    for k in 1..=2 {
        let got = art.ciphertext.side_info[k - 1].len();
        if got != code.side_info_len(k) {
            return Err(CodecError::DimensionMismatch {
                what: format!("side information for receiver {k}"),
                expected: code.side_info_len(k),
                got,
            }
            .into());
        }
    }
    let obs: Observations = read_json(observations)?;
    check_observations(code, &obs)?;
    let reference = match messages {
        Some(path) => {
            let m: SessionMessages = read_json(path)?;
            m.check(code)?;
            Some(m)
        }
        None => None,
    };
    let y1: Vec<Vec<usize>> = obs.blocks.iter().map(|o| o.y1.clone()).collect();
    let y2: Vec<Vec<usize>> = obs.blocks.iter().map(|o| o.y2.clone()).collect();
    let d1 = decode_rx1(&ReceiverContext::new(code, 1, &keys, &art.ciphertext), &y1);
    let d2 = decode_rx2(&ReceiverContext::new(code, 2, &keys, &art.ciphertext), &y2);
    let report = DecodeReport {
        version: ARTIFACT_VERSION,
        receivers: vec![
            receiver_report(1, d1, reference.as_ref()),
            receiver_report(2, d2, reference.as_ref()),
        ],
    };
    write_json(&dir.join("decoded.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Null => Some("-".into()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        serde_json::Value::Number(n) => Some(match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.6}"),
            _ => n.to_string(),
        }),
        serde_json::Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Human-readable digest of every suite report in `dir`, in file-name order.
pub fn report(dir: &Path) -> Result<String, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut out = String::new();
    for path in paths {
        let Ok(rep) = read_json::<Report<serde_json::Value>>(&path) else {
            continue;
        };
        let seeds: Vec<String> = rep.meta.seeds.iter().map(u64::to_string).collect();
        out.push_str(&format!(
            "{}: {} row(s), config {}, seeds {}, version {}\n",
            rep.suite,
            rep.rows.len(),
            &rep.meta.config_hash[..12.min(rep.meta.config_hash.len())],
            seeds.join(" "),
            rep.meta.version
        ));
        for row in &rep.rows {
            let fields: Vec<String> = match row {
                serde_json::Value::Object(m) => m
                    .iter()
                    .filter_map(|(k, v)| scalar(v).map(|s| format!("{k}={s}")))
                    .collect(),
                other => scalar(other).into_iter().collect(),
            };
            out.push_str(&format!("  {}\n", fields.join(" ")));
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("no suite reports in {}", dir.display())));
    }
    Ok(out)
}
