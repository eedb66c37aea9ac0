// SPDX-License-Identifier: Apache-2.0

//! Evolution configuration (TOML). Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EvolveError;
use crate::eval::{Clock, DrParams, EvalOptions, WallClock, WorkClock};
use crate::mutate::external::{DEFAULT_TIMEOUT_S, DEFAULT_TOKEN_ENV};
use crate::mutate::{CommandProvider, HttpProvider, Provider, ScriptedProvider};
use crate::pareto::ObjectiveSpec;

/// Prompt used by the external providers when the config names none.
pub const DEFAULT_PROMPT: &str = include_str!("../../prompts/mutate.md");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    #[default]
    Wall,
    /// Deterministic: one microsecond per unit of router work.
    Work,
}

impl ClockKind {
    pub fn clock(self) -> Box<dyn Clock> {
        match self {
            ClockKind::Wall => Box::new(WallClock),
            ClockKind::Work => Box::new(WorkClock::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub clock: ClockKind,
    pub time_limit_s: f64,
    pub memory_limit_mb: u64,
    pub dr_expansion: u32,
    pub dr_slack: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let o = EvalOptions::default();
        Self {
            clock: ClockKind::Wall,
            time_limit_s: o.time_limit_s,
            memory_limit_mb: o.memory_limit_mb,
            dr_expansion: o.dr.expansion,
            dr_slack: o.dr.slack,
        }
    }
}

impl EvalConfig {
    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            dr: DrParams { expansion: self.dr_expansion, slack: self.dr_slack },
            time_limit_s: self.time_limit_s,
            memory_limit_mb: self.memory_limit_mb,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProviderConfig {
    #[default]
    Scripted,
    Command {
        command: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_s: u64,
        #[serde(default)]
        prompt: Option<PathBuf>,
    },
    Http {
        url: String,
        #[serde(default = "default_token_env")]
        token_env: String,
        #[serde(default = "default_timeout")]
        timeout_s: u64,
        #[serde(default)]
        prompt: Option<PathBuf>,
    },
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_S
}

fn default_token_env() -> String {
    DEFAULT_TOKEN_ENV.into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmStart {
    /// Run directory of the source evolution.
    pub run: PathBuf,
    /// Candidate to start from; the source run's selection when absent.
    #[serde(default)]
    pub candidate: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Benchmark file.
    pub design: PathBuf,
    /// Run directory to create.
    pub run_dir: PathBuf,
    #[serde(default = "default_iterations")]
    pub max_iterations: u32,
    #[serde(default = "default_repair_budget")]
    pub repair_budget: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub objectives: ObjectiveSpec,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub warm_start: Option<WarmStart>,
}

fn default_iterations() -> u32 {
    75
}

fn default_repair_budget() -> u32 {
    3
}

impl EvolutionConfig {
    /// A config with every optional field at its default.
    pub fn new(design: impl Into<PathBuf>, run_dir: impl Into<PathBuf>) -> Self {
        Self {
            design: design.into(),
            run_dir: run_dir.into(),
            max_iterations: default_iterations(),
            repair_budget: default_repair_budget(),
            seed: 0,
            objectives: ObjectiveSpec::default(),
            eval: EvalConfig::default(),
            provider: ProviderConfig::Scripted,
            warm_start: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, EvolveError> {
        let c: Self = toml::from_str(text).map_err(|e| EvolveError::Config(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    /// Loads `path` and makes every path in it absolute.
    pub fn load(path: &Path) -> Result<Self, EvolveError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvolveError::Config(format!("{}: {e}", path.display())))?;
        let mut c = Self::from_toml(&text).map_err(|e| EvolveError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = std::path::absolute(&base).unwrap_or(base);
        c.resolve(&base);
        Ok(c)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.design);
        fix(&mut self.run_dir);
        if let Some(w) = &mut self.warm_start {
            fix(&mut w.run);
        }
        match &mut self.provider {
            ProviderConfig::Command { prompt: Some(p), .. } | ProviderConfig::Http { prompt: Some(p), .. } => fix(p),
            _ => {}
        }
    }

    fn check(&self) -> Result<(), EvolveError> {
        let bad = |m: &str| Err(EvolveError::Config(m.into()));
        if self.eval.time_limit_s.is_nan() || self.eval.time_limit_s <= 0.0 {
            return bad("eval.time_limit_s must be positive");
        }
        if self.eval.dr_expansion == 0 {
            return bad("eval.dr_expansion must be at least 1");
        }
        if let ProviderConfig::Command { command, .. } = &self.provider {
            if command.is_empty() {
                return bad("provider.command must name a program");
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Builds the configured mutation provider.
    pub fn provider(&self) -> Result<Box<dyn Provider>, EvolveError> {
        let template = |p: &Option<PathBuf>| match p {
            None => Ok(DEFAULT_PROMPT.to_string()),
            Some(p) => std::fs::read_to_string(p).map_err(|e| EvolveError::Config(format!("prompt {}: {e}", p.display()))),
        };
        Ok(match &self.provider {
            ProviderConfig::Scripted => Box::new(ScriptedProvider::new(self.seed)),
            ProviderConfig::Command { command, timeout_s, prompt } => {
                let mut p = CommandProvider::new(command.clone(), template(prompt)?);
                p.timeout_s = *timeout_s;
                Box::new(p)
            }
            ProviderConfig::Http { url, token_env, timeout_s, prompt } => {
                let mut p = HttpProvider::new(url.clone(), template(prompt)?);
                p.token_env = token_env.clone();
                p.timeout_s = *timeout_s;
                Box::new(p)
            }
        })
    }
}
