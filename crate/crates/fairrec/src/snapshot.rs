//! Versioned plain-text snapshot of a parsed rating matrix for fast reload.
//!
//! Layout (all lines LF-terminated):
//!
//! ```text
//! fairrec-ratings v1
//! max_rating <N>
//! users <count> <raw ids in dense order, space-separated>
//! items <count> <raw ids in dense order, space-separated>
//! entries <count>
//! <dense-user> <dense-item> <rating>    (one line per entry)
//! ```
//!
//! Dense indexes are persisted so a reloaded matrix lines up with factor
//! model rows exactly; loading reproduces the original matrix bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fairrec_core::ratings::{IdMap, RatingMatrix};

use crate::error::{Error, Result};

const MAGIC: &str = "fairrec-ratings v1";

pub fn save(matrix: &RatingMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "max_rating {}", matrix.max_rating())?;
    write!(w, "users {}", matrix.num_users())?;
    for id in matrix.users().raw_ids() {
        write!(w, " {id}")?;
    }
    writeln!(w)?;
    write!(w, "items {}", matrix.num_items())?;
    for id in matrix.items().raw_ids() {
        write!(w, " {id}")?;
    }
    writeln!(w)?;
    writeln!(w, "entries {}", matrix.num_entries())?;
    for &(u, i, r) in matrix.dense_entries() {
        writeln!(w, "{u} {i} {r}")?;
    }
    w.flush()?;
    Ok(())
}

fn bad(path: &Path, what: &str) -> Error {
    Error::run(format!("snapshot {}: {what}", path.display()))
}

fn parse_id_line(line: &str, keyword: &str, path: &Path) -> Result<IdMap> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(bad(path, &format!("expected '{keyword}' line")));
    }
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(path, &format!("bad {keyword} count")))?;
    let ids: Vec<u32> = parts
        .map(|s| s.parse().map_err(|_| bad(path, &format!("bad {keyword} id"))))
        .collect::<Result<_>>()?;
    if ids.len() != count {
        return Err(bad(path, &format!("{keyword} count mismatch")));
    }
    IdMap::from_raw_ids(ids).ok_or_else(|| bad(path, &format!("duplicate {keyword} id")))
}

pub fn load(path: &Path) -> Result<RatingMatrix> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| bad(path, "truncated"))?
            .map_err(Error::from)
    };

    if next()? != MAGIC {
        return Err(bad(path, "not a ratings snapshot (bad magic line)"));
    }
    let max_rating: u8 = next()?
        .strip_prefix("max_rating ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(path, "bad max_rating line"))?;
    let users = parse_id_line(&next()?, "users", path)?;
    let items = parse_id_line(&next()?, "items", path)?;
    let count: usize = next()?
        .strip_prefix("entries ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(path, "bad entries line"))?;

    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next()?;
        let mut parts = line.split_whitespace();
        let mut field = |name: &str| -> Result<u32> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(path, &format!("bad entry {name}")))
        };
        let u = field("user")?;
        let i = field("item")?;
        let r = field("rating")? as u8;
        entries.push((u, i, r));
    }
    RatingMatrix::from_dense_parts(max_rating, users, items, entries)
        .map_err(|e| bad(path, &e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairrec_core::ratings::RatingMatrixBuilder;

    #[test]
    fn snapshot_round_trips_exactly() {
        let mut b = RatingMatrixBuilder::new(5);
        // insertion order shapes the dense maps; keep it non-monotonic
        for (u, i, r) in [(9, 40, 5), (2, 40, 1), (9, 7, 3), (5, 1, 2)] {
            b.add(u, i, r).unwrap();
        }
        let m = b.build();
        let dir = std::env::temp_dir().join(format!("fairrec-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ratings.snapshot");
        save(&m, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(m, loaded);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = std::env::temp_dir().join(format!("fairrec-snap2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bogus");
        std::fs::write(&path, "something else\n").unwrap();
        assert!(load(&path).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
