//! The staged experiment pipeline. Every stage reads its inputs from files,
//! writes its artifacts into the output directory and refreshes the
//! manifest, so any stage can be rerun in isolation.
//!
//! Artifacts, by producing stage:
//! - `ingest`: `ratings.snapshot`
//! - `indexes`: `im.csv`, `um.csv`, `im_norm.csv`, `um_norm.csv`,
//!   `table3.csv`, `histograms.csv`
//! - `train-mf`: `factors.model`, `pmf_log.csv`
//! - `train-mln`: `mln.model`, `mln_log.csv`
//! - `recommend`: `recommendations.csv`
//! - `evaluate`: `table4.csv`, `fig6_curves.csv`, `fig7_curves.csv`

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use fairrec_core::demographics::{assign_groups, DemographicTable, GroupAssignment};
use fairrec_core::evaluate as eval;
use fairrec_core::heuristic::{recommend_heuristic, HeuristicList};
use fairrec_core::minority::{
    classify_users, compute_im, compute_um, ImIndex, NormalizedIndex,
};
use fairrec_core::mln::{beta_grid, build_training_set, mln_train, MlnModel};
use fairrec_core::pmf::{self, FactorModel};
use fairrec_core::ratings::{RatingMatrix, RatingTriple, UserId};
use fairrec_core::recommend::{recommend_dl, RecommendError, RecommendationList};
use fairrec_core::split::{split, SplitSets, SplitSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::manifest;
use crate::model_io;
use crate::movielens::{parse_ratings, parse_users, RatingsFormat};
use crate::report;
use crate::snapshot;

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.paths.out.join(name)
}

fn load_snapshot(cfg: &RunConfig) -> Result<RatingMatrix> {
    let path = out_path(cfg, "ratings.snapshot");
    if !path.exists() {
        return Err(Error::run(format!(
            "{} not found; run `fairrec ingest` first",
            path.display()
        )));
    }
    snapshot::load(&path)
}

fn load_demographics(cfg: &RunConfig) -> Result<DemographicTable> {
    let file = File::open(&cfg.paths.users).map_err(|e| {
        Error::run(format!("cannot open users file {}: {e}", cfg.paths.users.display()))
    })?;
    Ok(parse_users(BufReader::new(file))?)
}

fn load_groups(cfg: &RunConfig) -> Result<GroupAssignment> {
    Ok(assign_groups(&load_demographics(cfg)?, cfg.scheme()?))
}

fn load_factors(cfg: &RunConfig) -> Result<FactorModel> {
    let path = out_path(cfg, "factors.model");
    if !path.exists() {
        return Err(Error::run(format!(
            "{} not found; run `fairrec train-mf` first",
            path.display()
        )));
    }
    model_io::load_factors(&path)
}

fn load_mln_model(cfg: &RunConfig) -> Result<MlnModel> {
    let path = out_path(cfg, "mln.model");
    if !path.exists() {
        return Err(Error::run(format!(
            "{} not found; run `fairrec train-mln` first",
            path.display()
        )));
    }
    model_io::load_mln(&path)
}

fn load_im_index(cfg: &RunConfig) -> Result<ImIndex> {
    let path = out_path(cfg, "im.csv");
    if !path.exists() {
        return Err(Error::run(format!(
            "{} not found; run `fairrec indexes` first",
            path.display()
        )));
    }
    Ok(ImIndex::from_entries(cfg.im_mode()?, report::read_im_csv(&path)?))
}

fn load_norms(cfg: &RunConfig) -> Result<(NormalizedIndex, NormalizedIndex)> {
    let im_path = out_path(cfg, "im.csv");
    let um_path = out_path(cfg, "um.csv");
    if !im_path.exists() || !um_path.exists() {
        return Err(Error::run("index csvs not found; run `fairrec indexes` first".to_string()));
    }
    let im_values: Vec<(u32, f64)> = report::read_im_csv(&im_path)?
        .into_iter()
        .map(|(id, v, _)| (id, v))
        .collect();
    let im_norm = NormalizedIndex::new(im_values)?;
    let um_norm = NormalizedIndex::new(report::read_value_csv(&um_path)?)?;
    Ok((im_norm, um_norm))
}

fn pmf_split(cfg: &RunConfig, ratings: &RatingMatrix) -> Result<SplitSets> {
    let [train, validation, test] = cfg.pmf.split;
    Ok(split(ratings, &SplitSpec::new(train, validation, test, cfg.seed))?)
}

fn to_dense(ratings: &RatingMatrix, triples: &[RatingTriple]) -> Vec<(u32, u32, u8)> {
    triples
        .iter()
        .map(|t| {
            (
                ratings.users().dense(t.user).expect("split user in universe"),
                ratings.items().dense(t.item).expect("split item in universe"),
                t.rating,
            )
        })
        .collect()
}

/// All users, or a seeded subsample of `cap`, in ascending raw id order.
fn select_users(ratings: &RatingMatrix, cap: Option<usize>, seed: u64) -> Vec<UserId> {
    let mut users: Vec<UserId> = ratings.users().raw_ids().to_vec();
    users.sort_unstable();
    if let Some(cap) = cap {
        if cap < users.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            users.shuffle(&mut rng);
            users.truncate(cap);
            users.sort_unstable();
        }
    }
    users
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let file = File::open(&cfg.paths.ratings).map_err(|e| {
        Error::run(format!("cannot open ratings file {}: {e}", cfg.paths.ratings.display()))
    })?;
    let ratings = parse_ratings(BufReader::new(file), &RatingsFormat::default())?;
    let demographics = load_demographics(cfg)?;

    std::fs::create_dir_all(&cfg.paths.out)?;
    snapshot::save(&ratings, &out_path(cfg, "ratings.snapshot"))?;
    manifest::write(cfg, "ingest", &[&cfg.paths.ratings, &cfg.paths.users])?;

    let max_item = ratings.items().raw_ids().iter().max().copied().unwrap_or(0);
    println!(
        "ingest: {} ratings, {} users, {} items (max item id {}), {} demographic records",
        ratings.num_entries(),
        ratings.num_users(),
        ratings.num_items(),
        max_item,
        demographics.len()
    );
    Ok(())
}

pub fn indexes(cfg: &RunConfig) -> Result<()> {
    let ratings = load_snapshot(cfg)?;
    let groups = load_groups(cfg)?;
    let thresholds = cfg.threshold_config();

    let im = compute_im(&ratings, &groups, &thresholds, cfg.im_mode()?)?;
    let um = compute_um(&ratings, &im, &thresholds, cfg.um_mode()?)?;
    let im_norm = NormalizedIndex::from_im(&im)?;
    let um_norm = NormalizedIndex::from_um(&um)?;
    let table = classify_users(&um, &groups);

    report::write_im(&im, &out_path(cfg, "im.csv"))?;
    report::write_um(&um, &out_path(cfg, "um.csv"))?;
    report::write_normalized(&im_norm, "item", &out_path(cfg, "im_norm.csv"))?;
    report::write_normalized(&um_norm, "user", &out_path(cfg, "um_norm.csv"))?;
    report::write_classification(&table, cfg.scheme()?, &out_path(cfg, "table3.csv"))?;

    let im_values: Vec<f64> = im.values().collect();
    let um_values: Vec<f64> = um.iter().map(|(_, v)| v).collect();
    let bins = cfg.evaluate.histogram_bins;
    let im_hist = eval::histogram(&im_values, bins)?;
    let um_hist = eval::histogram(&um_values, bins)?;
    report::write_histograms(
        &[("im", &im_hist), ("um", &um_hist)],
        &out_path(cfg, "histograms.csv"),
    )?;
    manifest::write(cfg, "indexes", &[&cfg.paths.ratings, &cfg.paths.users])?;

    let (minority, majority) = report::group_names(cfg.scheme()?);
    println!(
        "indexes: {} items, {} users; {minority} {}/{} correct ({:.2}%), {majority} {}/{} correct ({:.2}%)",
        im.len(),
        um.len(),
        table.minority.correct,
        table.minority.total(),
        table.minority.percent_correct(),
        table.majority.correct,
        table.majority.total(),
        table.majority.percent_correct(),
    );
    Ok(())
}

pub fn train_mf(cfg: &RunConfig) -> Result<()> {
    let ratings = load_snapshot(cfg)?;
    let sets = pmf_split(cfg, &ratings)?;
    let train = to_dense(&ratings, &sets.train);
    let heldout = to_dense(&ratings, &sets.test);

    let (model, log) = pmf::train_dense(
        ratings.num_users(),
        ratings.num_items(),
        &train,
        &heldout,
        &cfg.pmf_config(),
    )?;
    model_io::save_factors(&model, &out_path(cfg, "factors.model"))?;
    report::write_pmf_log(&log, &out_path(cfg, "pmf_log.csv"))?;
    manifest::write(cfg, "train-mf", &[&cfg.paths.ratings, &cfg.paths.users])?;

    let mae = log.heldout_mae.last().copied().unwrap_or(f64::NAN);
    let rmse = log.heldout_rmse.last().copied().unwrap_or(f64::NAN);
    println!(
        "train-mf: {} factors over {} train / {} held-out ratings; held-out MAE {:.4}, RMSE {:.4}",
        cfg.pmf.factors,
        train.len(),
        heldout.len(),
        mae,
        rmse
    );
    Ok(())
}

pub fn train_mln(cfg: &RunConfig) -> Result<()> {
    let ratings = load_snapshot(cfg)?;
    let factors = load_factors(cfg)?;
    let (im_norm, um_norm) = load_norms(cfg)?;

    let corpus_matrix = match cfg.mln.ratings_cap {
        Some(cap) if cap < ratings.num_entries() => {
            let mut keep = vec![false; ratings.num_entries()];
            let mut order: Vec<usize> = (0..ratings.num_entries()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
            order.shuffle(&mut rng);
            for &k in order.iter().take(cap) {
                keep[k] = true;
            }
            ratings.subset(|k| keep[k])
        }
        _ => ratings.clone(),
    };

    let grid = beta_grid();
    let corpus = build_training_set(
        &factors,
        &corpus_matrix,
        &im_norm,
        &um_norm,
        &grid,
        cfg.accuracy_scale()?,
    )?;

    let sizes = [
        2 * factors.factors() + 1,
        cfg.mln.hidden[0],
        cfg.mln.hidden[1],
        1,
    ];
    let mut model = MlnModel::new(&sizes, cfg.mln.dropout, cfg.seed.wrapping_add(2))?;
    let log = mln_train(&mut model, &corpus, &cfg.mln_config())?;

    model_io::save_mln(&model, &out_path(cfg, "mln.model"))?;
    report::write_mln_log(&log, &out_path(cfg, "mln_log.csv"))?;
    manifest::write(cfg, "train-mln", &[&cfg.paths.ratings, &cfg.paths.users])?;

    use fairrec_core::mln::ExampleSet as _;
    println!(
        "train-mln: {} examples ({} ratings x {} beta values), {} epochs; final validation MAE {:.5}",
        corpus.len(),
        corpus_matrix.num_entries(),
        grid.len(),
        cfg.mln.epochs,
        log.validation_mae.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

/// Rayon-parallel per-user recommendation; output order matches `users`.
pub fn recommend_dl_batch(
    mln: &MlnModel,
    factors: &FactorModel,
    ratings: &RatingMatrix,
    users: &[UserId],
    beta: f64,
    n: usize,
) -> (Vec<RecommendationList>, Vec<(UserId, RecommendError)>) {
    let results: Vec<(UserId, std::result::Result<RecommendationList, RecommendError>)> = users
        .par_iter()
        .map(|&u| (u, recommend_dl(mln, factors, ratings, u, beta, n)))
        .collect();
    let mut lists = Vec::with_capacity(users.len());
    let mut failures = Vec::new();
    for (u, r) in results {
        match r {
            Ok(list) => lists.push(list),
            Err(e) => failures.push((u, e)),
        }
    }
    (lists, failures)
}

pub fn recommend(cfg: &RunConfig) -> Result<()> {
    let ratings = load_snapshot(cfg)?;
    let factors = load_factors(cfg)?;
    // recommendations go over items unseen during factor training
    let train_matrix = pmf_split(cfg, &ratings)?.train_matrix(&ratings);
    let users = select_users(&ratings, cfg.recommend.users_cap, cfg.seed.wrapping_add(3));
    let path = out_path(cfg, "recommendations.csv");

    match cfg.recommend.method.as_str() {
        "dl" => {
            let mln = load_mln_model(cfg)?;
            let (lists, failures) = recommend_dl_batch(
                &mln,
                &factors,
                &train_matrix,
                &users,
                cfg.recommend.beta,
                cfg.recommend.n,
            );
            report::write_dl_recommendations(&lists, &path)?;
            println!(
                "recommend (dl): {} users at beta {}, top {}; {} failures",
                lists.len(),
                cfg.recommend.beta,
                cfg.recommend.n,
                failures.len()
            );
            for (user, e) in failures.iter().take(5) {
                eprintln!("  user {user}: {e}");
            }
        }
        "heuristic" => {
            let im = load_im_index(cfg)?;
            let groups = load_groups(cfg)?;
            let mut lists: Vec<HeuristicList> = Vec::new();
            let mut failures = 0usize;
            for &user in &users {
                match recommend_heuristic(
                    &factors,
                    &im,
                    &train_matrix,
                    user,
                    groups.label(user),
                    cfg.recommend.alpha,
                    cfg.recommend.n,
                ) {
                    Ok(list) => lists.push(list),
                    Err(e) => {
                        if failures < 5 {
                            eprintln!("  user {user}: {e}");
                        }
                        failures += 1;
                    }
                }
            }
            report::write_heuristic_recommendations(&lists, &path)?;
            println!(
                "recommend (heuristic): {} users at alpha {}, top {}; {} failures",
                lists.len(),
                cfg.recommend.alpha,
                cfg.recommend.n,
                failures
            );
        }
        other => {
            return Err(Error::config(format!("unknown method '{other}' (dl|heuristic)")));
        }
    }
    manifest::write(cfg, "recommend", &[&cfg.paths.ratings, &cfg.paths.users])?;
    Ok(())
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    let ratings = load_snapshot(cfg)?;
    let groups = load_groups(cfg)?;
    let factors = load_factors(cfg)?;
    let mln = load_mln_model(cfg)?;
    let im = load_im_index(cfg)?;
    let (im_norm, um_norm) = load_norms(cfg)?;

    let sets = pmf_split(cfg, &ratings)?;
    let train_matrix = sets.train_matrix(&ratings);
    let heldout = &sets.test;
    let users = select_users(&ratings, cfg.evaluate.users_cap, cfg.seed.wrapping_add(3));

    // test-set predictions per user, the per-group index means measurement
    let mut by_user: std::collections::BTreeMap<UserId, Vec<u32>> = Default::default();
    for t in heldout {
        by_user.entry(t.user).or_default().push(t.item);
    }
    let prediction_lists: Vec<(UserId, Vec<u32>)> = by_user.into_iter().collect();
    let means = eval::group_im_mean(&prediction_lists, &im, &groups)?;
    report::write_group_means(&means, cfg.scheme()?, &out_path(cfg, "table4.csv"))?;

    let labeled: Vec<UserId> =
        users.iter().copied().filter(|&u| groups.label(u).is_some()).collect();
    let alpha = eval::alpha_sweep(
        &factors,
        &im,
        &train_matrix,
        heldout,
        &groups,
        &labeled,
        &cfg.evaluate.alpha_grid,
        cfg.recommend.n,
    )?;
    report::write_alpha_sweep(&alpha, &out_path(cfg, "fig6_curves.csv"))?;

    let beta = eval::beta_sweep(
        &mln,
        &factors,
        &train_matrix,
        heldout,
        &groups,
        &um_norm,
        &im_norm,
        &users,
        &cfg.evaluate.beta_grid,
        cfg.recommend.n,
    )?;
    report::write_beta_sweep(&beta, &out_path(cfg, "fig7_curves.csv"))?;
    manifest::write(cfg, "evaluate", &[&cfg.paths.ratings, &cfg.paths.users])?;

    let (minority, majority) = report::group_names(cfg.scheme()?);
    println!(
        "evaluate: {minority} mean IM {:.4}, {majority} mean IM {:.4}; optimum beta {}",
        means.minority, means.majority, beta.optimum_beta
    );
    Ok(())
}

pub fn all(cfg: &RunConfig) -> Result<()> {
    ingest(cfg)?;
    indexes(cfg)?;
    train_mf(cfg)?;
    train_mln(cfg)?;
    recommend(cfg)?;
    evaluate(cfg)
}
