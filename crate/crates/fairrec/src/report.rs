//! CSV emission for every table and curve. Comma-delimited, UTF-8, one
//! header row; floats use shortest round-trip formatting so reruns are
//! byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fairrec_core::demographics::Scheme;
use fairrec_core::evaluate::{
    AlphaSweepResult, BetaSweepResult, GroupImMeans, Histogram,
};
use fairrec_core::heuristic::HeuristicList;
use fairrec_core::minority::{ClassificationTable, ImIndex, NormalizedIndex, UmIndex};
use fairrec_core::pmf::TrainReport;
use fairrec_core::mln::MlnTrainReport;
use fairrec_core::recommend::RecommendationList;

use crate::error::Result;

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Group names under a scheme, minority first.
pub fn group_names(scheme: Scheme) -> (&'static str, &'static str) {
    match scheme {
        Scheme::Gender => ("female", "male"),
        Scheme::Youth => ("senior", "young"),
    }
}

pub fn write_im(im: &ImIndex, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "item,value,neutral")?;
    for (item, entry) in im.iter() {
        writeln!(w, "{item},{},{}", entry.value, entry.neutral as u8)?;
    }
    Ok(w.flush()?)
}

pub fn write_um(um: &UmIndex, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "user,value")?;
    for (user, value) in um.iter() {
        writeln!(w, "{user},{value}")?;
    }
    Ok(w.flush()?)
}

pub fn write_normalized(index: &NormalizedIndex, entity: &str, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "{entity},value")?;
    for (id, value) in index.iter() {
        writeln!(w, "{id},{value}")?;
    }
    Ok(w.flush()?)
}

pub fn write_classification(
    table: &ClassificationTable,
    scheme: Scheme,
    path: &Path,
) -> Result<()> {
    let (minority, majority) = group_names(scheme);
    let mut w = writer(path)?;
    writeln!(w, "scheme,group,correct,incorrect,percent_correct")?;
    writeln!(
        w,
        "{scheme},{minority},{},{},{}",
        table.minority.correct,
        table.minority.incorrect,
        table.minority.percent_correct()
    )?;
    writeln!(
        w,
        "{scheme},{majority},{},{},{}",
        table.majority.correct,
        table.majority.incorrect,
        table.majority.percent_correct()
    )?;
    Ok(w.flush()?)
}

pub fn write_group_means(means: &GroupImMeans, scheme: Scheme, path: &Path) -> Result<()> {
    let (minority, majority) = group_names(scheme);
    let mut w = writer(path)?;
    writeln!(w, "scheme,group,mean_im,items")?;
    writeln!(w, "{scheme},{minority},{},{}", means.minority, means.minority_items)?;
    writeln!(w, "{scheme},{majority},{},{}", means.majority, means.majority_items)?;
    Ok(w.flush()?)
}

pub fn write_histograms(histograms: &[(&str, &Histogram)], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "index,bin,lo,hi,count")?;
    for (name, h) in histograms {
        let width = (h.max - h.min) / h.counts.len() as f64;
        for (b, count) in h.counts.iter().enumerate() {
            let lo = h.min + width * b as f64;
            let hi = if b + 1 == h.counts.len() { h.max } else { h.min + width * (b + 1) as f64 };
            writeln!(w, "{name},{b},{lo},{hi},{count}")?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_alpha_sweep(sweep: &AlphaSweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(
        w,
        "alpha,mean_abs_im_minority,mean_abs_im_majority,accuracy_mse,accuracy_mse_minority,accuracy_mse_majority,coverage,survivors_minority,survivors_majority"
    )?;
    for p in &sweep.points {
        let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p.x,
            p.mean_abs_im_minority,
            p.mean_abs_im_majority,
            p.accuracy,
            fmt_opt(p.accuracy_minority),
            fmt_opt(p.accuracy_majority),
            p.coverage,
            p.survivors_minority,
            p.survivors_majority
        )?;
    }
    Ok(w.flush()?)
}

pub fn write_beta_sweep(sweep: &BetaSweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(
        w,
        "beta,accuracy_mse,fairness_minority,fairness_majority,accuracy_norm,fairness_minority_norm,fairness_majority_norm,coverage,is_optimum"
    )?;
    for (k, p) in sweep.points.iter().enumerate() {
        let n = &sweep.normalized[k];
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p.x,
            p.accuracy,
            p.fairness_minority,
            p.fairness_majority,
            n.accuracy,
            n.fairness_minority,
            n.fairness_majority,
            sweep.coverage[k],
            (p.x == sweep.optimum_beta) as u8
        )?;
    }
    Ok(w.flush()?)
}

pub fn write_dl_recommendations(lists: &[RecommendationList], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "user,beta,rank,item,predicted_loss")?;
    for list in lists {
        for (rank, e) in list.entries.iter().enumerate() {
            writeln!(w, "{},{},{},{},{}", list.user, list.beta, rank + 1, e.item, e.predicted_loss)?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_heuristic_recommendations(lists: &[HeuristicList], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "user,alpha,rank,item,prediction,im")?;
    for list in lists {
        for (rank, c) in list.entries.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                list.user,
                list.alpha,
                rank + 1,
                c.item,
                c.prediction,
                c.minority_value
            )?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_pmf_log(report: &TrainReport, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "epoch,train_loss,heldout_mae,heldout_rmse")?;
    for (k, loss) in report.epoch_loss.iter().enumerate() {
        let mae = report.heldout_mae.get(k).map_or(String::new(), |v| v.to_string());
        let rmse = report.heldout_rmse.get(k).map_or(String::new(), |v| v.to_string());
        writeln!(w, "{},{},{},{}", k + 1, loss, mae, rmse)?;
    }
    Ok(w.flush()?)
}

pub fn write_mln_log(report: &MlnTrainReport, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "epoch,train_mae,validation_mae")?;
    for (k, mae) in report.train_mae.iter().enumerate() {
        let val = report.validation_mae.get(k).map_or(String::new(), |v| v.to_string());
        writeln!(w, "{},{},{}", k + 1, mae, val)?;
    }
    Ok(w.flush()?)
}

/// Reads an `item,value,neutral` csv back into index entries.
pub fn read_im_csv(path: &Path) -> Result<Vec<(u32, f64, bool)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut bad = || crate::error::Error::run(format!("{}: bad row {k}", path.display()));
        let id: u32 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(&mut bad)?;
        let value: f64 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(&mut bad)?;
        let neutral: u8 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(&mut bad)?;
        out.push((id, value, neutral != 0));
    }
    Ok(out)
}

/// Reads the `value` column of a two-column csv written by this module.
pub fn read_value_csv(path: &Path) -> Result<Vec<(u32, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id: u32 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| crate::error::Error::run(format!("{}: bad id", path.display())))?;
        let value: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| crate::error::Error::run(format!("{}: bad value", path.display())))?;
        out.push((id, value));
    }
    Ok(out)
}
