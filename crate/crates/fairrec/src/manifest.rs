//! Run manifest: the resolved configuration, derived stage seeds and sha256
//! checksums of the input files, written next to the artifacts so any output
//! can be traced back to exact inputs.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    generator: String,
    stage: &'a str,
    inputs: Vec<InputRecord>,
    seeds: Seeds,
    config: &'a RunConfig,
}

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Seeds {
    root: u64,
    pmf: u64,
    mln: u64,
    subsample: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Writes `manifest.toml` into the output directory.
pub fn write(config: &RunConfig, stage: &str, inputs: &[&Path]) -> Result<()> {
    let records = inputs
        .iter()
        .filter(|p| p.exists())
        .map(|p| {
            Ok(InputRecord { path: p.display().to_string(), sha256: sha256_file(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        generator: format!("fairrec {}", env!("CARGO_PKG_VERSION")),
        stage,
        inputs: records,
        seeds: Seeds {
            root: config.seed,
            pmf: config.seed.wrapping_add(1),
            mln: config.seed.wrapping_add(2),
            subsample: config.seed.wrapping_add(3),
        },
        config,
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| crate::error::Error::run(format!("manifest serialization: {e}")))?;
    fs::create_dir_all(&config.paths.out)?;
    fs::write(config.paths.out.join("manifest.toml"), text)?;
    Ok(())
}
