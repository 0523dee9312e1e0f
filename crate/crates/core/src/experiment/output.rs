use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::csv_io;

use super::GridResult;

pub const CSV_HEADER: [&str; 14] = [
    "model",
    "transfer",
    "scenario",
    "d",
    "method",
    "normalized",
    "UnqR",
    "UnqC",
    "Shd",
    "Syn",
    "Hres",
    "HY",
    "seed",
    "n",
];

/// Writes the result table. Floats use the shortest representation that
/// round-trips, so equal results give byte-identical files.
pub fn write_csv<W: Write>(result: &GridResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        let s = &row.spectrum;
        w.write_record([
            row.key.model.to_string(),
            row.key.transfer.to_string(),
            row.key.scenario.to_string(),
            row.key.d.to_string(),
            s.method.to_string(),
            s.normalized.to_string(),
            s.unq_r.to_string(),
            s.unq_c.to_string(),
            s.shd.to_string(),
            s.syn.to_string(),
            s.hres.to_string(),
            s.hy.to_string(),
            row.seed.to_string(),
            row.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &GridResult, path: &Path) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::InvalidConfig("no result rows to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, csv_io(e)))
}

/// Run metadata (seed policy, generator, timing, per-cell diagnostics and
/// failures) as pretty JSON, kept apart from the deterministic table.
pub fn emit_metadata(result: &GridResult, path: &Path) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        metadata: &'a super::GridMetadata,
        failures: &'a [super::CellFailure],
    }
    let doc = Doc {
        metadata: &result.metadata,
        failures: &result.failures,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
