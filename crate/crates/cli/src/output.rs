use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::config::Experiment;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# hyplab <version> config=<json>`, the first line of every CSV.
pub fn csv_preamble(exp: &Experiment) -> String {
    format!("# hyplab {VERSION} config={}\n", exp.echo())
}

/// JSON artifact wrapper carrying the config echo, version and seed.
pub fn envelope(exp: &Experiment, kind: &str, result: Value) -> Value {
    json!({
        "artifact": "hyplab",
        "kind": kind,
        "version": VERSION,
        "seed": exp.seed,
        "config": exp.echo(),
        "result": result,
    })
}

/// The `--out` file, or stdout.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CliError::Internal(e.to_string()))?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Evenly spaced horizons `⌈i·h/points⌉`, `i = 1..=points`.
pub fn grid(horizon: u64, points: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (1..=points).map(|i| (i * horizon).div_ceil(points)).collect();
    g.dedup();
    g
}
