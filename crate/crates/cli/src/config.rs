//! Run configuration: a single JSON file with strict unknown-key rejection.
//!
//! A typo'd backend URL or option silently falling back to a default would
//! burn paid API calls, so unknown keys fail the load. Every template file
//! is loaded (and its placeholders checked) at config-load time, before any
//! backend is touched.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use casetime::corpus::{GenOptions, TemplateSet};
use casetime::eval::JudgeOptions;
use casetime::gateway::{
    mix_seed, AgentProfile, ChatBackend, EmbedBackend, HttpBackend, IdentityEmbedder, RetryPolicy,
    SimChatBackend, SimEmbedder,
};
use casetime::refine::RefinementConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Timestamp stamped on generated records. Pin it to make runs with the
    /// same seed and config byte-identical; leave unset for wall-clock.
    #[serde(default)]
    pub run_timestamp: Option<String>,
    /// Attempt cap per document across re-invocations of a batch.
    #[serde(default = "default_doc_attempts")]
    pub max_doc_attempts: u32,
    pub paths: PathsConfig,
    #[serde(default)]
    pub refinement: RefinementConfig,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default)]
    pub judge_protocol: JudgeProtocolConfig,
    #[serde(default)]
    pub backends: BackendsConfig,
}

fn default_concurrency() -> usize {
    1
}

fn default_doc_attempts() -> u32 {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub templates_dir: PathBuf,
    pub corpus_file: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub retry_limit: u32,
    pub failure_ceiling: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        let defaults = GenOptions::default();
        Self {
            retry_limit: defaults.retry_limit,
            failure_ceiling: defaults.failure_ceiling,
        }
    }
}

impl GenerationConfig {
    pub fn options(&self) -> GenOptions {
        GenOptions {
            retry_limit: self.retry_limit,
            failure_ceiling: self.failure_ceiling,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JudgeProtocolConfig {
    pub swap_orders: bool,
    pub retry_limit: u32,
}

impl Default for JudgeProtocolConfig {
    fn default() -> Self {
        let defaults = JudgeOptions::default();
        Self {
            swap_orders: defaults.swap_orders,
            retry_limit: defaults.retry_limit,
        }
    }
}

impl JudgeProtocolConfig {
    pub fn options(&self) -> JudgeOptions {
        JudgeOptions {
            swap_orders: self.swap_orders,
            retry_limit: self.retry_limit,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendsConfig {
    #[serde(default)]
    pub extraction: Option<RoleConfig>,
    #[serde(default)]
    pub feedback: Option<RoleConfig>,
    #[serde(default)]
    pub generation: Option<RoleConfig>,
    /// Second generator for a half/half corpus split.
    #[serde(default)]
    pub generation_secondary: Option<RoleConfig>,
    #[serde(default)]
    pub summarizer: Option<RoleConfig>,
    #[serde(default)]
    pub judge: Option<RoleConfig>,
    #[serde(default)]
    pub embedder: Option<RoleConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleConfig {
    /// `http(s)://` endpoint, `sim://chat[?fail_when=MARKER]`, or (for the
    /// embedder role) `sim://embed` / `identity://`.
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    #[serde(default)]
    pub retry: RetryConfig,
}

fn default_max_tokens() -> u32 {
    2048
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub base_backoff_ms: u64,
    pub max_requests_per_minute: u32,
}

impl Default for RetryConfig {
    fn default() -> Self {
        let defaults = RetryPolicy::default();
        Self {
            max_attempts: defaults.max_attempts,
            base_backoff_ms: defaults.base_backoff.as_millis() as u64,
            max_requests_per_minute: defaults.max_requests_per_minute,
        }
    }
}

impl RetryConfig {
    fn policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.max_attempts,
            base_backoff: Duration::from_millis(self.base_backoff_ms),
            max_requests_per_minute: self.max_requests_per_minute,
        }
    }
}

/// Generation-side roles default to a mildly creative temperature; scoring
/// roles (feedback, judge) default to 0 for stable scores.
pub const CREATIVE_TEMPERATURE: f64 = 0.7;
pub const SCORING_TEMPERATURE: f64 = 0.0;

impl RoleConfig {
    pub fn profile(&self, default_temperature: f64) -> AgentProfile {
        AgentProfile::new(
            self.model_name.clone(),
            self.temperature.unwrap_or(default_temperature),
            self.max_output_tokens,
        )
    }

    pub fn chat_backend(&self, seed: u64) -> Result<Arc<dyn ChatBackend>> {
        if let Some(rest) = self.base_url.strip_prefix("sim://") {
            let mut sim = SimChatBackend::new(mix_seed(seed, &self.model_name));
            if let Some((_, query)) = rest.split_once('?') {
                for pair in query.split('&') {
                    match pair.split_once('=') {
                        Some(("fail_when", marker)) => sim = sim.with_fail_marker(marker),
                        Some(("prefer_when", marker)) => sim = sim.with_prefer_marker(marker),
                        _ => bail!("unknown sim option in backend url: {pair:?}"),
                    }
                }
            }
            return Ok(Arc::new(sim));
        }
        if self.base_url.starts_with("http://") || self.base_url.starts_with("https://") {
            let mut backend = HttpBackend::new(&self.base_url, &self.model_name)
                .with_retry(self.retry.policy());
            if let Some(env_var) = &self.credential_env {
                backend = backend
                    .with_api_key_env(env_var)
                    .with_context(|| format!("credential for {}", self.model_name))?;
            }
            return Ok(Arc::new(backend));
        }
        bail!(
            "backend url {:?} is not http(s):// or sim://",
            self.base_url
        );
    }

    pub fn embed_backend(&self, seed: u64) -> Result<Arc<dyn EmbedBackend>> {
        if self.base_url.starts_with("identity://") {
            return Ok(Arc::new(IdentityEmbedder));
        }
        if self.base_url.starts_with("sim://") {
            return Ok(Arc::new(SimEmbedder::new(mix_seed(seed, &self.model_name))));
        }
        if self.base_url.starts_with("http://") || self.base_url.starts_with("https://") {
            let mut backend = HttpBackend::new(&self.base_url, &self.model_name)
                .with_retry(self.retry.policy());
            if let Some(env_var) = &self.credential_env {
                backend = backend
                    .with_api_key_env(env_var)
                    .with_context(|| format!("credential for {}", self.model_name))?;
            }
            return Ok(Arc::new(backend));
        }
        bail!(
            "embedder url {:?} is not http(s)://, sim://, or identity://",
            self.base_url
        );
    }
}

/// A parsed config plus its eagerly loaded template set.
pub struct LoadedConfig {
    pub run: RunConfig,
    pub templates: TemplateSet,
}

impl LoadedConfig {
    /// Load and validate a config file. Relative paths are resolved against
    /// the config file's directory.
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut run: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(seed) = seed_override {
            run.seed = seed;
        }
        if run.concurrency == 0 {
            bail!("concurrency must be at least 1");
        }
        run.refinement
            .validate()
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;

        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        run.paths.templates_dir = resolve(&run.paths.templates_dir);
        run.paths.corpus_file = resolve(&run.paths.corpus_file);
        run.paths.output_dir = resolve(&run.paths.output_dir);

        let templates = TemplateSet::load_dir(&run.paths.templates_dir)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        Ok(Self { run, templates })
    }

    /// Timestamp for generated records: the pinned one, or wall clock.
    pub fn created_at(&self) -> String {
        self.run
            .run_timestamp
            .clone()
            .unwrap_or_else(|| chrono::Utc::now().to_rfc3339())
    }

    pub fn role(&self, name: &str) -> Result<&RoleConfig> {
        let slot = match name {
            "extraction" => &self.run.backends.extraction,
            "feedback" => &self.run.backends.feedback,
            "generation" => &self.run.backends.generation,
            "summarizer" => &self.run.backends.summarizer,
            "judge" => &self.run.backends.judge,
            "embedder" => &self.run.backends.embedder,
            other => bail!("unknown backend role {other:?}"),
        };
        slot.as_ref()
            .with_context(|| format!("backend role {name:?} is not configured"))
    }
}
