//! Command-line surface: one subcommand per pipeline stage plus `all`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::Result;
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(
    name = "fairrec",
    about = "Fairness-aware collaborative filtering pipeline",
    version
)]
pub struct Cli {
    /// TOML configuration file; flags below override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Minority scheme: gender | youth
    #[arg(long, global = true)]
    pub scheme: Option<String>,

    /// Accuracy/fairness balance in [0,1] for the ranked recommender.
    #[arg(long, global = true)]
    pub beta: Option<f64>,

    /// Filter threshold for the heuristic recommender.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Recommendation list length.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Root random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Item index mode: pooled | scorediff
    #[arg(long = "im-mode", global = true)]
    pub im_mode: Option<String>,

    /// User index mode: formula | toy
    #[arg(long = "um-mode", global = true)]
    pub um_mode: Option<String>,

    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Recommendation method: dl | heuristic
    #[arg(long, global = true)]
    pub method: Option<String>,

    /// Cap on users served/evaluated (seeded subsample).
    #[arg(long = "users-cap", global = true)]
    pub users_cap: Option<usize>,

    /// Ratings file (overrides config).
    #[arg(long, global = true)]
    pub ratings: Option<PathBuf>,

    /// Users file (overrides config).
    #[arg(long, global = true)]
    pub users: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the input files and write the ratings snapshot.
    Ingest,
    /// Compute the minority indexes, their normalizations and the
    /// classification table.
    Indexes,
    /// Train the factor model.
    TrainMf,
    /// Build the beta-augmented corpus and train the loss network.
    TrainMln,
    /// Produce top-N recommendations (dl or heuristic).
    Recommend,
    /// Run the measurement sweeps and write the figure/table csvs.
    Evaluate,
    /// Run every stage in order.
    All,
}

impl Cli {
    /// Loads the config file (or defaults) and applies flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(scheme) = &self.scheme {
            cfg.scheme = scheme.clone();
        }
        if let Some(beta) = self.beta {
            cfg.recommend.beta = beta;
        }
        if let Some(alpha) = self.alpha {
            cfg.recommend.alpha = alpha;
        }
        if let Some(n) = self.n {
            cfg.recommend.n = n;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(mode) = &self.im_mode {
            cfg.indexes.im_mode = mode.clone();
        }
        if let Some(mode) = &self.um_mode {
            cfg.indexes.um_mode = mode.clone();
        }
        if let Some(out) = &self.out {
            cfg.paths.out = out.clone();
        }
        if let Some(method) = &self.method {
            cfg.recommend.method = method.clone();
        }
        if let Some(cap) = self.users_cap {
            cfg.recommend.users_cap = Some(cap);
            cfg.evaluate.users_cap = Some(cap);
        }
        if let Some(ratings) = &self.ratings {
            cfg.paths.ratings = ratings.clone();
        }
        if let Some(users) = &self.users {
            cfg.paths.users = users.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run(&self) -> Result<()> {
        let cfg = self.resolve_config()?;
        match self.command {
            Command::Ingest => pipeline::ingest(&cfg),
            Command::Indexes => pipeline::indexes(&cfg),
            Command::TrainMf => pipeline::train_mf(&cfg),
            Command::TrainMln => pipeline::train_mln(&cfg),
            Command::Recommend => pipeline::recommend(&cfg),
            Command::Evaluate => pipeline::evaluate(&cfg),
            Command::All => pipeline::all(&cfg),
        }
    }
}
