//! Run configuration: a TOML file with every knob defaulted, plus the small
//! set of command-line overrides.

use std::path::{Path, PathBuf};

use fairrec_core::demographics::Scheme;
use fairrec_core::minority::{ImMode, ThresholdConfig, UmMode};
use fairrec_core::mln::{AccuracyScale, MlnTrainConfig};
use fairrec_core::pmf::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    /// gender | youth
    pub scheme: String,
    /// Root seed; stages derive their own from it.
    pub seed: u64,
    pub thresholds: Thresholds,
    pub indexes: Indexes,
    pub pmf: Pmf,
    pub mln: Mln,
    pub recommend: Recommend,
    pub evaluate: Evaluate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub ratings: PathBuf,
    pub users: PathBuf,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            ratings: PathBuf::from("data/ml-1m/ratings.dat"),
            users: PathBuf::from("data/ml-1m/users.dat"),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub like: u8,
    pub dislike: u8,
    pub min_side_votes: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { like: 4, dislike: 2, min_side_votes: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Indexes {
    /// pooled | scorediff
    pub im_mode: String,
    /// formula | toy
    pub um_mode: String,
}

impl Default for Indexes {
    fn default() -> Self {
        Self { im_mode: "pooled".into(), um_mode: "formula".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pmf {
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub init_scale: f64,
    /// Rating-level train/validation/test fractions for the factor stage.
    pub split: [f64; 3],
}

impl Default for Pmf {
    fn default() -> Self {
        Self {
            factors: 30,
            learning_rate: 0.005,
            regularization: 0.05,
            epochs: 50,
            init_scale: 0.1,
            split: [0.8, 0.0, 0.2],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mln {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub sq_grad_decay: f64,
    pub epsilon: f64,
    /// normalized | raw
    pub accuracy_scale: String,
    /// Example-level train/validation/test fractions.
    pub split: [f64; 3],
    /// Optional cap on the number of ratings fed into the corpus (seeded
    /// subsample), for desk-scale runs.
    pub ratings_cap: Option<usize>,
    pub dropout: f64,
    pub hidden: [usize; 2],
}

impl Default for Mln {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 256,
            learning_rate: 1e-3,
            sq_grad_decay: 0.9,
            epsilon: 1e-8,
            accuracy_scale: "normalized".into(),
            split: [0.7, 0.1, 0.2],
            ratings_cap: None,
            dropout: 0.2,
            hidden: [80, 10],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recommend {
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    /// dl | heuristic
    pub method: String,
    /// Optional seeded subsample of users to serve.
    pub users_cap: Option<usize>,
}

impl Default for Recommend {
    fn default() -> Self {
        Self { n: 10, beta: 0.5, alpha: 0.0, method: "dl".into(), users_cap: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evaluate {
    pub beta_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub histogram_bins: usize,
    /// Optional seeded subsample of users for the sweeps.
    pub users_cap: Option<usize>,
}

impl Default for Evaluate {
    fn default() -> Self {
        Self {
            beta_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            alpha_grid: vec![0.0, 0.025, 0.05, 0.1, 0.2],
            histogram_bins: 20,
            users_cap: None,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            scheme: "gender".into(),
            seed: 42,
            thresholds: Thresholds::default(),
            indexes: Indexes::default(),
            pmf: Pmf::default(),
            mln: Mln::default(),
            recommend: Recommend::default(),
            evaluate: Evaluate::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn scheme(&self) -> Result<Scheme> {
        match self.scheme.as_str() {
            "gender" => Ok(Scheme::Gender),
            "youth" => Ok(Scheme::Youth),
            other => Err(Error::config(format!("unknown scheme '{other}' (gender|youth)"))),
        }
    }

    pub fn im_mode(&self) -> Result<ImMode> {
        match self.indexes.im_mode.as_str() {
            "pooled" => Ok(ImMode::Pooled),
            "scorediff" => Ok(ImMode::ScoreDifference),
            other => Err(Error::config(format!("unknown im-mode '{other}' (pooled|scorediff)"))),
        }
    }

    pub fn um_mode(&self) -> Result<UmMode> {
        match self.indexes.um_mode.as_str() {
            "formula" => Ok(UmMode::PerFormula),
            "toy" => Ok(UmMode::ToyDivideByMax),
            other => Err(Error::config(format!("unknown um-mode '{other}' (formula|toy)"))),
        }
    }

    pub fn accuracy_scale(&self) -> Result<AccuracyScale> {
        match self.mln.accuracy_scale.as_str() {
            "normalized" => Ok(AccuracyScale::Normalized),
            "raw" => Ok(AccuracyScale::Raw),
            other => Err(Error::config(format!(
                "unknown accuracy-scale '{other}' (normalized|raw)"
            ))),
        }
    }

    pub fn threshold_config(&self) -> ThresholdConfig {
        ThresholdConfig::new(
            self.thresholds.like,
            self.thresholds.dislike,
            self.thresholds.min_side_votes,
        )
    }

    pub fn pmf_config(&self) -> TrainConfig {
        TrainConfig {
            factors: self.pmf.factors,
            learning_rate: self.pmf.learning_rate,
            regularization: self.pmf.regularization,
            epochs: self.pmf.epochs,
            init_scale: self.pmf.init_scale,
            seed: self.seed.wrapping_add(1),
        }
    }

    pub fn mln_config(&self) -> MlnTrainConfig {
        MlnTrainConfig {
            epochs: self.mln.epochs,
            batch_size: self.mln.batch_size,
            learning_rate: self.mln.learning_rate,
            sq_grad_decay: self.mln.sq_grad_decay,
            epsilon: self.mln.epsilon,
            seed: self.seed.wrapping_add(2),
            split: (self.mln.split[0], self.mln.split[1], self.mln.split[2]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme()?;
        self.im_mode()?;
        self.um_mode()?;
        self.accuracy_scale()?;
        for beta in &self.evaluate.beta_grid {
            if !(0.0..=1.0).contains(beta) {
                return Err(Error::config(format!("beta {beta} outside [0,1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.recommend.beta) {
            return Err(Error::config(format!("beta {} outside [0,1]", self.recommend.beta)));
        }
        if self.recommend.alpha < 0.0 {
            return Err(Error::config("alpha must be non-negative".to_string()));
        }
        if self.recommend.n == 0 {
            return Err(Error::config("n must be at least 1".to_string()));
        }
        Ok(())
    }
}
