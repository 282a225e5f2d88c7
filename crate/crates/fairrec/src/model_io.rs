//! Versioned flat files for the trained models.
//!
//! Floats are written with Rust's shortest round-trip formatting, so loading
//! reproduces every parameter bit for bit.
//!
//! Factor file:
//! ```text
//! fairrec-factors v1
//! dims <users> <items> <factors>
//! p <row of factors>     (one line per user)
//! q <row of factors>     (one line per item)
//! ```
//!
//! Network file:
//! ```text
//! fairrec-mln v1
//! sizes <layer sizes>
//! dropout <rate>
//! w<l> <flattened out-by-in weights>
//! b<l> <biases>
//! ```
//! Optimizer state is not persisted; a loaded network starts with fresh
//! squared-gradient averages.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fairrec_core::mln::MlnModel;
use fairrec_core::pmf::FactorModel;

use crate::error::{Error, Result};

const FACTORS_MAGIC: &str = "fairrec-factors v1";
const MLN_MAGIC: &str = "fairrec-mln v1";

fn bad(path: &Path, what: &str) -> Error {
    Error::run(format!("model file {}: {what}", path.display()))
}

fn write_row(w: &mut impl Write, prefix: &str, row: &[f64]) -> Result<()> {
    write!(w, "{prefix}")?;
    for v in row {
        write!(w, " {v}")?;
    }
    writeln!(w)?;
    Ok(())
}

fn parse_row(line: &str, prefix: &str, path: &Path) -> Result<Vec<f64>> {
    let rest = line
        .strip_prefix(prefix)
        .ok_or_else(|| bad(path, &format!("expected '{prefix}' line")))?;
    rest.split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(path, "bad float")))
        .collect()
}

pub fn save_factors(model: &FactorModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{FACTORS_MAGIC}")?;
    writeln!(w, "dims {} {} {}", model.num_users(), model.num_items(), model.factors())?;
    for u in 0..model.num_users() as u32 {
        write_row(&mut w, "p", model.user_row(u))?;
    }
    for i in 0..model.num_items() as u32 {
        write_row(&mut w, "q", model.item_row(i))?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_factors(path: &Path) -> Result<FactorModel> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| bad(path, "truncated"))?.map_err(Error::from)
    };
    if next()? != FACTORS_MAGIC {
        return Err(bad(path, "not a factor model (bad magic line)"));
    }
    let dims_line = next()?;
    let dims: Vec<usize> = dims_line
        .strip_prefix("dims ")
        .ok_or_else(|| bad(path, "missing dims"))?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(path, "bad dims")))
        .collect::<Result<_>>()?;
    let [users, items, factors] = dims[..] else {
        return Err(bad(path, "dims needs three numbers"));
    };
    let mut p = Vec::with_capacity(users * factors);
    for _ in 0..users {
        let row = parse_row(&next()?, "p", path)?;
        if row.len() != factors {
            return Err(bad(path, "p row width mismatch"));
        }
        p.extend(row);
    }
    let mut q = Vec::with_capacity(items * factors);
    for _ in 0..items {
        let row = parse_row(&next()?, "q", path)?;
        if row.len() != factors {
            return Err(bad(path, "q row width mismatch"));
        }
        q.extend(row);
    }
    FactorModel::from_rows(users, items, factors, p, q).map_err(|e| bad(path, &e.to_string()))
}

pub fn save_mln(model: &MlnModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{MLN_MAGIC}")?;
    write!(w, "sizes")?;
    for s in model.sizes() {
        write!(w, " {s}")?;
    }
    writeln!(w)?;
    writeln!(w, "dropout {}", model.dropout())?;
    for (l, layer) in model.weights().iter().enumerate() {
        write_row(&mut w, &format!("w{l}"), layer)?;
    }
    for (l, layer) in model.biases().iter().enumerate() {
        write_row(&mut w, &format!("b{l}"), layer)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_mln(path: &Path) -> Result<MlnModel> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| bad(path, "truncated"))?.map_err(Error::from)
    };
    if next()? != MLN_MAGIC {
        return Err(bad(path, "not a network model (bad magic line)"));
    }
    let sizes: Vec<usize> = next()?
        .strip_prefix("sizes ")
        .ok_or_else(|| bad(path, "missing sizes"))?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(path, "bad size")))
        .collect::<Result<_>>()?;
    let dropout: f64 = next()?
        .strip_prefix("dropout ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(path, "bad dropout line"))?;
    let layer_count = sizes.len().saturating_sub(1);
    let mut weights = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        weights.push(parse_row(&next()?, &format!("w{l}"), path)?);
    }
    let mut biases = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        biases.push(parse_row(&next()?, &format!("b{l}"), path)?);
    }
    MlnModel::from_params(sizes, weights, biases, dropout).map_err(|e| bad(path, &e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("fairrec-model-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn factors_round_trip_exactly() {
        let model = FactorModel::init(7, 5, 3, 0.37, 99).unwrap();
        let dir = tmpdir("f");
        let path = dir.join("factors.model");
        save_factors(&model, &path).unwrap();
        assert_eq!(load_factors(&path).unwrap(), model);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn mln_round_trips_exactly() {
        let model = MlnModel::for_factors(4, 123).unwrap();
        let dir = tmpdir("m");
        let path = dir.join("mln.model");
        save_mln(&model, &path).unwrap();
        assert_eq!(load_mln(&path).unwrap(), model);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
