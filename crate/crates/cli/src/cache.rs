//! On-disk cache of frozen index sets.
//!
//! One JSON file per key; the key is the SHA-256 of the ordered channel law,
//! `n`, `β` and the entropy method (including its sample count and seed).

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use wbc_polar::eval::report::config_hash;
use wbc_polar::sets::{build_polarized_sets, compute_entropies_parallel, EntropyMethod, PolarizedSets};
use wbc_polar::DmsSpec;

pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize)]
struct KeyFields<'a> {
    channel: &'a DmsSpec,
    n: usize,
    beta: f64,
    method: &'a EntropyMethod,
}

pub fn cache_key(spec: &DmsSpec, n: usize, beta: f64, method: &EntropyMethod) -> String {
    config_hash(&KeyFields {
        channel: spec,
        n,
        beta,
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub version: u32,
    pub key: String,
    pub n: usize,
    pub beta: f64,
    pub delta_n: f64,
    pub method: EntropyMethod,
    pub sets: PolarizedSets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
}

pub struct SetCache {
    dir: Option<PathBuf>,
}

impl SetCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        SetCache { dir }
    }

    fn path(dir: &Path, key: &str) -> PathBuf {
        dir.join(format!("{key}.json"))
    }

    /// Loads the sets for `(spec, n, beta, method)` or computes and stores them.
    pub fn get_or_build(
        &self,
        spec: &DmsSpec,
        n: usize,
        beta: f64,
        method: EntropyMethod,
        workers: usize,
    ) -> Result<(PolarizedSets, CacheStatus), CliError> {
        let key = cache_key(spec, n, beta, &method);
        if let Some(dir) = &self.dir {
            let path = Self::path(dir, &key);
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let rec: CacheRecord = serde_json::from_str(&text).map_err(|e| CliError::format(&path, e))?;
                if rec.version == CACHE_VERSION && rec.key == key {
                    return Ok((rec.sets, CacheStatus::Hit));
                }
            }
        }
        let profile = compute_entropies_parallel(spec, n, method, workers)?;
        let sets = build_polarized_sets(&profile, beta)?;
        let Some(dir) = &self.dir else {
            return Ok((sets, CacheStatus::Disabled));
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let rec = CacheRecord {
            version: CACHE_VERSION,
            key: key.clone(),
            n,
            beta,
            delta_n: sets.delta_n,
            method,
            sets,
        };
        let path = Self::path(dir, &key);
        let text = serde_json::to_string_pretty(&rec).expect("cache record serializes");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok((rec.sets, CacheStatus::Miss))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_every_field() {
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        let mc = |samples, seed| EntropyMethod::MonteCarlo { samples, seed };
        let base = cache_key(&spec, 16, 0.3, &mc(100, 1));
        assert_eq!(base, cache_key(&spec, 16, 0.3, &mc(100, 1)));
        assert_ne!(base, cache_key(&DmsSpec::bec_triple(0.4, 0.3, 0.6), 16, 0.3, &mc(100, 1)));
        assert_ne!(base, cache_key(&spec, 32, 0.3, &mc(100, 1)));
        assert_ne!(base, cache_key(&spec, 16, 0.25, &mc(100, 1)));
        assert_ne!(base, cache_key(&spec, 16, 0.3, &mc(200, 1)));
        assert_ne!(base, cache_key(&spec, 16, 0.3, &mc(100, 2)));
        assert_ne!(base, cache_key(&spec, 16, 0.3, &EntropyMethod::ExactBec));
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SetCache::new(Some(dir.path().to_path_buf()));
        let spec = DmsSpec::bec_triple(0.4, 0.3, 0.7);
        let (a, s1) = cache.get_or_build(&spec, 16, 0.3, EntropyMethod::ExactBec, 1).unwrap();
        let (b, s2) = cache.get_or_build(&spec, 16, 0.3, EntropyMethod::ExactBec, 1).unwrap();
        assert_eq!((s1, s2), (CacheStatus::Miss, CacheStatus::Hit));
        assert_eq!(a, b);
    }
}
