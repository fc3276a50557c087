use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use lshxdp::data::{build_vectors, load_events, read_snapshot, EventFormat, VectorMode, SNAPSHOT_MAGIC};
use lshxdp::nns::Dataset;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Loads a snapshot, or builds per-user vectors from an event file when the
/// first line is not the snapshot header.
pub fn load_dataset(path: &Path, items: Option<usize>, raw_counts: bool, has_header: bool) -> Result<Dataset> {
    let mut first = String::new();
    BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?).read_line(&mut first)?;
    if first.trim() == SNAPSHOT_MAGIC {
        let f = File::open(path)?;
        return read_snapshot(BufReader::new(f)).with_context(|| format!("reading {}", path.display()));
    }
    let Some(n) = items else {
        bail!(
            "{} is an event file; pass --items to set the vector dimension",
            path.display()
        );
    };
    let events = load_events(path, EventFormat::from_path(path), n, has_header)?;
    let mode = if raw_counts {
        VectorMode::RawCounts
    } else {
        VectorMode::RatingCentered
    };
    Ok(build_vectors(&events, n, mode)?)
}

pub fn open_out(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Rows as CSV (after a `# schema:` comment) or as `{"schema", "rows"}` JSON.
pub fn write_rows<T: Serialize>(out: Option<&PathBuf>, format: Format, schema: &str, rows: &[T]) -> Result<()> {
    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(w, "# schema: {schema}")?;
            let mut cw = csv::Writer::from_writer(&mut w);
            for r in rows {
                cw.serialize(r)?;
            }
            cw.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &serde_json::json!({ "schema": schema, "rows": rows }))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Uses `given`, or draws a seed from the OS and reports it on stderr so the
/// run can be repeated.
pub fn seed_or_entropy(given: Option<u64>, name: &str) -> u64 {
    given.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("{name}={s}");
        s
    })
}
