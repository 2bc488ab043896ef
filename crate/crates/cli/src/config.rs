use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use innokit::config::{DEFAULT_TOLERANCE, DEFAULT_WORK_LIMIT};
use innokit::{Execution, RngSeed, SearchConfig};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Settings shared by every subcommand. Defaults, then `--config`, then
/// flags (or their environment variables) on top.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tolerance: f64,
    pub seed: u64,
    pub work_limit: u64,
    pub output_format: OutputFormat,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            seed: DEFAULT_SEED,
            work_limit: DEFAULT_WORK_LIMIT,
            output_format: OutputFormat::Json,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub work_limit: Option<u64>,
    pub output_format: Option<OutputFormat>,
    pub execution: Option<Execution>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(t) = overrides.tolerance {
            cfg.tolerance = t;
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(w) = overrides.work_limit {
            cfg.work_limit = w;
        }
        if let Some(f) = overrides.output_format {
            cfg.output_format = f;
        }
        if let Some(e) = overrides.execution {
            cfg.execution = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            bail!("tolerance must be positive, got {}", self.tolerance);
        }
        if self.work_limit == 0 {
            bail!("work limit must be positive");
        }
        Ok(())
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig { tolerance: self.tolerance, work_limit: self.work_limit, execution: self.execution }
    }

    pub fn rng_seed(&self) -> RngSeed {
        RngSeed(self.seed)
    }
}
