use std::path::{Path, PathBuf};

use onematch_core::{BlockingOptions, Error, FeatureParams, FpCounting, MatcherConfig, Result, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::io::open;

/// Matcher choice and operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchSettings {
    pub algorithm: String,
    pub direction: String,
    pub threshold: f64,
    /// Threshold grid for `pr-curve`: "default", "scores" or explicit
    /// values; absent means "default".
    pub grid: Option<Grid>,
    /// Largest connected component max-weight will solve.
    pub max_component_nodes: Option<usize>,
}

impl MatchSettings {
    pub fn limits(&self) -> MatcherConfig {
        MatcherConfig { max_component_nodes: self.max_component_nodes }
    }
}

impl Default for MatchSettings {
    fn default() -> Self {
        MatchSettings {
            algorithm: "greedy".into(),
            direction: "l2r".into(),
            threshold: 0.45,
            grid: None,
            max_component_nodes: MatcherConfig::default().max_component_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Named(String),
    Values(Vec<f64>),
}

/// Everything a pipeline run can be configured with. Command-line flags
/// override the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub left: Option<PathBuf>,
    pub right: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub features: FeatureParams,
    pub blocking: BlockingOptions,
    pub training: TrainConfig,
    #[serde(rename = "match")]
    pub matcher: MatchSettings,
    pub fp_counting: FpCounting,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_reader(open(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
