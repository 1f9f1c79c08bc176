//! Experiment configuration: JSON schema, parsing, and conversion into core
//! types.
//!
//! Field names mirror the modeling convention (`m`, `N`, `theta`, `T`,
//! `p_lo`/`p_hi`, `p0`/`Y`/`epsilon`), numbers are plain decimals, and
//! profiles are arrays. Any serialized config parses back to an identical
//! structure.

use std::path::{Path, PathBuf};

use relsel_core::{
    ModelSpec, OperationalProfile, SimulationConfig, UncertaintySet, Utility,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub utility: UtilityConfig,
    pub uncertainty: UncertaintyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: usize,
    #[serde(rename = "N")]
    pub initial_defects: Vec<u32>,
    pub theta: Vec<f64>,
    #[serde(rename = "T")]
    pub periods: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityConfig {
    Identity,
    Quadratic,
    Exponential { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintyConfig {
    Singleton {
        profile: Vec<f64>,
    },
    Finite {
        members: Vec<Vec<f64>>,
    },
    Interval {
        p_lo: Vec<f64>,
        p_hi: Vec<f64>,
    },
    Ellipsoid {
        p0: Vec<f64>,
        #[serde(rename = "Y")]
        directions: Vec<Vec<f64>>,
        epsilon: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub runs: u64,
    pub seed: u64,
    pub scoring_profile: Vec<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

fn default_bins() -> usize {
    DEFAULT_HISTOGRAM_BINS
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Read a config file; returns the config and the digest of the raw
    /// bytes (stamped into every CSV artifact).
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Validation(format!("{}: not UTF-8", path.display())))?;
        let config = Self::parse(&text)?;
        Ok((config, digest_hex(&bytes)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Digest of the canonical serialization, for built-in configs.
    pub fn canonical_digest(&self) -> String {
        digest_hex(self.to_json().as_bytes())
    }

    pub fn core_model(&self) -> Result<ModelSpec, CliError> {
        let mc = &self.model;
        if mc.m != mc.initial_defects.len() || mc.m != mc.theta.len() {
            return Err(CliError::Validation(format!(
                "model.m = {} does not match N (len {}) and theta (len {})",
                mc.m,
                mc.initial_defects.len(),
                mc.theta.len()
            )));
        }
        let model = ModelSpec::new(mc.initial_defects.clone(), mc.theta.clone(), mc.periods);
        model.validate()?;
        Ok(model)
    }

    pub fn core_utility(&self) -> Result<Utility, CliError> {
        let utility = match &self.utility {
            UtilityConfig::Identity => Utility::Identity,
            UtilityConfig::Quadratic => Utility::Quadratic,
            UtilityConfig::Exponential { gamma } => Utility::Exponential {
                risk_tolerance: *gamma,
            },
        };
        utility.validate()?;
        Ok(utility)
    }

    pub fn core_uncertainty(&self) -> Result<UncertaintySet, CliError> {
        let set = match &self.uncertainty {
            UncertaintyConfig::Singleton { profile } => {
                UncertaintySet::Singleton(OperationalProfile::new(profile.clone())?)
            }
            UncertaintyConfig::Finite { members } => UncertaintySet::Finite(
                members
                    .iter()
                    .map(|p| OperationalProfile::new(p.clone()))
                    .collect::<Result<_, _>>()?,
            ),
            UncertaintyConfig::Interval { p_lo, p_hi } => UncertaintySet::Interval {
                lower: p_lo.clone(),
                upper: p_hi.clone(),
            },
            UncertaintyConfig::Ellipsoid {
                p0,
                directions,
                epsilon,
            } => UncertaintySet::Ellipsoid {
                center: OperationalProfile::new(p0.clone())?,
                directions: directions.clone(),
                radius: *epsilon,
            },
        };
        set.validate()?;
        Ok(set)
    }

    pub fn core_simulation(&self) -> Result<Option<SimulationConfig>, CliError> {
        match &self.simulation {
            None => Ok(None),
            Some(section) => {
                let mut cfg = SimulationConfig::new(
                    section.runs,
                    section.seed,
                    OperationalProfile::new(section.scoring_profile.clone())?,
                );
                cfg.histogram_bins = section.histogram_bins;
                Ok(Some(cfg))
            }
        }
    }
}

/// FNV-1a 64-bit digest, hex encoded.
pub fn digest_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    format!("{hash:016x}")
}
