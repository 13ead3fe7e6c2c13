use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fingerprint, RunOutput, Summary, TrialRecord};
use crate::schemes::{Mode, Scenario};
use crate::{Error, Result};

const FORMAT_VERSION: u32 = 1;

/// Contents of the summary document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryDocument {
    pub format: u32,
    pub mode: Mode,
    pub trials: u64,
    /// Digest of `scenario`; identical for every record of the run.
    pub fingerprint: String,
    /// File name of the records CSV, relative to the document.
    pub records: String,
    pub scenario: Scenario,
    pub summary: Summary,
}

/// Paths written by [`persist`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Persisted {
    pub records: PathBuf,
    pub summary: PathBuf,
}

/// Records as CSV bytes, header first.
pub fn records_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Parameter(format!("record {}: {e}", r.trial_index)))?;
    }
    w.into_inner()
        .map_err(|e| Error::Parameter(format!("flushing records: {e}")))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.toml` into `dir`, creating it if needed.
/// Each file appears complete or not at all.
pub fn persist(dir: &Path, stem: &str, scenario: &Scenario, run: &RunOutput) -> Result<Persisted> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let records = dir.join(format!("{stem}.csv"));
    let summary = dir.join(format!("{stem}.toml"));
    let doc = SummaryDocument {
        format: FORMAT_VERSION,
        mode: run.mode,
        trials: run.summary.trials,
        fingerprint: run.fingerprint.clone(),
        records: format!("{stem}.csv"),
        scenario: scenario.clone(),
        summary: run.summary.clone(),
    };
    let text = toml::to_string(&doc)
        .map_err(|e| Error::Format { path: summary.clone(), message: e.to_string() })?;
    let csv = records_csv(&run.records)?;
    write_atomic(&records, &csv)?;
    write_atomic(&summary, text.as_bytes())?;
    Ok(Persisted { records, summary })
}

/// A reloaded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub scenario: Scenario,
    pub run: RunOutput,
}

/// Reads a summary document and its records, and recomputes the summary from
/// the records. Fails if the recomputation disagrees with the document.
pub fn load(summary_path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(summary_path).map_err(|e| Error::io(summary_path, e))?;
    let doc: SummaryDocument = toml::from_str(&text).map_err(|e| Error::Format {
        path: summary_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let format_err = |message: String| Error::Format {
        path: summary_path.to_path_buf(),
        message,
    };
    if doc.format != FORMAT_VERSION {
        return Err(format_err(format!("unsupported format version {}", doc.format)));
    }
    if doc.fingerprint != fingerprint(&doc.scenario) {
        return Err(format_err("fingerprint does not match the scenario".into()));
    }
    let csv_path = summary_path
        .parent()
        .unwrap_or(Path::new("."))
        .join(&doc.records);
    let mut reader = csv::Reader::from_path(&csv_path).map_err(|e| Error::Format {
        path: csv_path.clone(),
        message: e.to_string(),
    })?;
    let records = reader
        .deserialize()
        .collect::<std::result::Result<Vec<TrialRecord>, _>>()
        .map_err(|e| Error::Format {
            path: csv_path.clone(),
            message: e.to_string(),
        })?;
    if records.len() as u64 != doc.trials {
        return Err(format_err(format!(
            "{} records for {} trials",
            records.len(),
            doc.trials
        )));
    }
    let mut summary = Summary::from_records(doc.mode, &records)?;
    summary.analytic_active = doc.summary.analytic_active;
    summary.exact_error = doc.summary.exact_error;
    summary.bound_error = doc.summary.bound_error;
    if summary != doc.summary {
        return Err(format_err("summary does not match the records".into()));
    }
    Ok(Loaded {
        scenario: doc.scenario,
        run: RunOutput {
            mode: doc.mode,
            fingerprint: doc.fingerprint,
            records,
            summary,
        },
    })
}
