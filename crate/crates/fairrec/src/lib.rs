//! IO, file formats, configuration and the pipeline driver around
//! `fairrec-core`: MovieLens parsing, rating-matrix snapshots, model files,
//! CSV reports, the run manifest and the staged CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod manifest;
pub mod model_io;
pub mod movielens;
pub mod pipeline;
pub mod report;
pub mod snapshot;

pub use error::Error;
