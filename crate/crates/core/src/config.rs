//! Run configuration shared by the command-line front end and the suite.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::ChiStarFamily;
use crate::quad::QuadratureConfig;
use crate::wightman::EpsLadder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}, expected json or csv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiStarConfig {
    pub family: ChiStarFamily,
    /// Family default when absent.
    pub bracket: Option<(f64, f64)>,
}

impl Default for ChiStarConfig {
    fn default() -> Self {
        Self { family: ChiStarFamily::Gaussian, bracket: None }
    }
}

impl ChiStarConfig {
    pub fn bracket(&self) -> (f64, f64) {
        self.bracket.unwrap_or_else(|| self.family.default_bracket())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCounts {
    /// Random pairs for the metric equivalence check.
    pub pairs: usize,
    /// Vectors in the positivity Gram matrices.
    pub gram: usize,
    /// Vectors for the canonical decomposition check.
    pub decomposition: usize,
    /// Non-lightlike points for the commutator check.
    pub wightman_points: usize,
    /// Zero-mean pairs for the position-space cross-check.
    pub position_pairs: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self {
            pairs: 100,
            gram: 8,
            decomposition: 100,
            wightman_points: 20,
            position_pairs: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub quad: QuadratureConfig,
    pub chi_star: ChiStarConfig,
    pub seed: u64,
    pub samples: SampleCounts,
    pub eps_ladder: Vec<f64>,
    /// Where the χ* command writes its context file.
    pub context: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            chi_star: ChiStarConfig::default(),
            seed: 7,
            samples: SampleCounts::default(),
            eps_ladder: EpsLadder::default().values().to_vec(),
            context: None,
            out: None,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        let (lo, hi) = self.chi_star.bracket();
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("chi* bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        let s = &self.samples;
        if s.gram == 0 || s.position_pairs == 0 {
            return Err(Error::InvalidConfig("gram and position_pairs sample counts must be positive".into()));
        }
        self.ladder().map(|_| ())
    }

    pub fn ladder(&self) -> Result<EpsLadder> {
        EpsLadder::new(self.eps_ladder.clone())
    }
}
