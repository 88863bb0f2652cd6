use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use matchsim::{ClassicalBound, ImperfectionModel, Protocol, TiMetric};
use serde::{Deserialize, Serialize};

use crate::args::ModelArgs;

/// Flat key/value settings file. Every key mirrors a command-line flag with
/// dashes replaced by underscores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub protocol: Option<Protocol>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub mu: Option<f64>,
    pub ideal: Option<bool>,
    pub eta_det: Option<f64>,
    pub eta_channel: Option<f64>,
    pub vis: Option<f64>,
    pub p_dark: Option<f64>,
    pub metric: Option<TiMetric>,
    pub bound: Option<ClassicalBound>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub post_select: Option<bool>,
    pub include_dark: Option<bool>,
    pub threads: Option<usize>,
    pub sigma: Option<f64>,
    pub noise: Option<f64>,
    pub blocks: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("{}: cannot read config", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    /// Device model: ideal when requested, otherwise the demonstration setup
    /// without channel loss; individual flags override either.
    pub fn model(&self, args: &ModelArgs) -> Result<ImperfectionModel> {
        let base = if args.ideal || self.ideal.unwrap_or(false) {
            ImperfectionModel::ideal()
        } else {
            ImperfectionModel::table1_detector_only()
        };
        let m = ImperfectionModel::new(
            args.eta_channel
                .or(self.eta_channel)
                .unwrap_or(base.eta_channel),
            args.eta_det.or(self.eta_det).unwrap_or(base.eta_det),
            args.vis.or(self.vis).unwrap_or(base.visibility),
            args.p_dark.or(self.p_dark).unwrap_or(base.p_dark),
        )
        .map_err(|e| UsageError(e.to_string()))?;
        Ok(m)
    }
}

/// Invalid invocation; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
