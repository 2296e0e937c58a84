//! Config file loading: JSON file, flag overrides, environment secrets.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use reflact_core::gateway::{BackendKind, API_KEY_ENV, BASE_URL_ENV};
use reflact_core::runner::RunConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub backend: Option<BackendKind>,
    pub run: RunConfig,
    pub suite: SuiteConfig,
    pub out_dir: Option<String>,
    /// Per-kind paths to format-paragraph replacement files.
    pub instruction_overrides: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    /// Half-open range "A..B".
    pub seeds: String,
    pub task_types: Vec<String>,
    pub flavor: String,
    pub kinds: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seeds: "0..10".to_string(),
            task_types: vec!["put".to_string()],
            flavor: "binary".to_string(),
            kinds: vec!["reflact".to_string()],
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: CliConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow!("config schema error in {}: {e}", path.display()))?;
        Ok(config)
    }

    /// Environment overrides (secrets and endpoint) beat the file; a live
    /// backend without its API key is rejected here, before any run starts.
    pub fn finalize(mut self) -> Result<Self> {
        if let Some(BackendKind::Live { base_url, .. }) = self.backend.as_mut() {
            if let Ok(env_url) = std::env::var(BASE_URL_ENV) {
                *base_url = env_url;
            }
            if std::env::var(API_KEY_ENV).is_err() {
                bail!("missing secret: set {API_KEY_ENV} for live backends");
            }
        }
        self.run.check().map_err(|e| anyhow!("config error: {e}"))?;
        Ok(self)
    }
}

/// Parse the "A..B" half-open seed range.
pub fn parse_seed_range(text: &str) -> Result<std::ops::Range<u64>> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("seed range must look like A..B, got {text:?}"))?;
    let start: u64 = a.trim().parse().context("bad range start")?;
    let end: u64 = b.trim().parse().context("bad range end")?;
    if end < start {
        bail!("empty seed range {text:?}");
    }
    Ok(start..end)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scripted_config_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        // The policy defaults to the oracle; no secrets are required.
        std::fs::write(&path, r#"{"backend":{"kind":"scripted"}}"#).unwrap();
        let config = CliConfig::load(&path).unwrap().finalize().unwrap();
        assert!(matches!(
            config.backend,
            Some(BackendKind::Scripted {
                policy: reflact_core::gateway::ScriptedPolicy::Oracle
            })
        ));
    }

    #[test]
    fn unknown_fields_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"bakend":{"kind":"scripted","policy":"oracle"}}"#).unwrap();
        let err = CliConfig::load(&path).unwrap_err().to_string();
        assert!(err.contains("bakend"), "{err}");
    }

    #[test]
    fn live_backend_without_key_is_rejected() {
        std::env::remove_var(API_KEY_ENV);
        let config = CliConfig {
            backend: Some(BackendKind::Live {
                base_url: "http://localhost:9".to_string(),
                model_name: "m".to_string(),
                temperature: 0.0,
                max_tokens: 16,
                logprob_mode: Default::default(),
                requests_per_second: None,
                timeout_secs: None,
            }),
            ..Default::default()
        };
        let err = config.finalize().unwrap_err().to_string();
        assert!(err.contains("missing secret"), "{err}");
    }

    #[test]
    fn seed_ranges_parse() {
        assert_eq!(parse_seed_range("0..10").unwrap(), 0..10);
        assert_eq!(parse_seed_range("5..5").unwrap(), 5..5);
        assert!(parse_seed_range("10").is_err());
        assert!(parse_seed_range("9..3").is_err());
    }
}
