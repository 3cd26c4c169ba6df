//! File formats, SVG rendering and the `compseq` command-line front end.

pub mod app;
pub mod ingest;
pub mod render;

pub use app::{run, CliError};
