use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};
use crate::scenario::ScenarioKind;

pub const CSV_COLUMNS: [&str; 17] = [
    "trial", "seed", "kind", "s", "ell", "delta", "N", "srf", "sigma_min", "lower_cert", "upper_cert", "epsilon",
    "E_xi", "E_a", "E_b", "E_total", "status",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Status {
    Ok,
    /// Recovery failed or its error reached the breakdown threshold.
    Breakdown,
    Failed(String),
}

impl Status {
    pub fn is_failure(&self) -> bool {
        matches!(self, Status::Failed(_))
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Breakdown => f.write_str("breakdown"),
            Status::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<Status> for String {
    fn from(s: Status) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Status {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.as_str() {
            "ok" => Ok(Status::Ok),
            "breakdown" => Ok(Status::Breakdown),
            _ => s
                .strip_prefix("failed: ")
                .map(|m| Status::Failed(m.to_string()))
                .ok_or_else(|| format!("unknown status {s:?}")),
        }
    }
}

/// One trial, flattened to the CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub seed: u64,
    pub kind: ScenarioKind,
    pub s: usize,
    pub ell: usize,
    pub delta: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub srf: f64,
    pub sigma_min: Option<f64>,
    pub lower_cert: Option<f64>,
    pub upper_cert: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "E_xi")]
    pub e_xi: Option<f64>,
    #[serde(rename = "E_a")]
    pub e_a: Option<f64>,
    #[serde(rename = "E_b")]
    pub e_b: Option<f64>,
    #[serde(rename = "E_total")]
    pub e_total: Option<f64>,
    pub status: Status,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes records to any sink; `label` names the sink in errors.
pub fn write_results<W: Write>(records: &[ExperimentRecord], mut sink: W, format: Format, label: &Path) -> Result<()> {
    let io = |source| ExpError::Io {
        path: label.to_path_buf(),
        source,
    };
    match format {
        Format::Csv => {
            let csv_err = |source| ExpError::Csv {
                path: label.to_path_buf(),
                source,
            };
            // Header written by hand so an empty sweep still yields it.
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut sink);
            w.write_record(CSV_COLUMNS).map_err(csv_err)?;
            for r in records {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, records).map_err(|source| ExpError::Json {
                path: label.to_path_buf(),
                source,
            })?;
            sink.write_all(b"\n").map_err(io)?;
        }
    }
    sink.flush().map_err(io)
}

pub fn emit_results(records: &[ExperimentRecord], path: &Path, format: Format) -> Result<()> {
    let f = File::create(path).map_err(|source| ExpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_results(records, BufWriter::new(f), format, path)
}

pub fn read_results(path: &Path, format: Format) -> Result<Vec<ExperimentRecord>> {
    let f = File::open(path).map_err(|source| ExpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        Format::Csv => {
            let csv_err = |source| ExpError::Csv {
                path: path.to_path_buf(),
                source,
            };
            let mut rd = csv::Reader::from_reader(f);
            let header = rd.headers().map_err(csv_err)?.clone();
            if !header.iter().eq(CSV_COLUMNS) {
                return Err(ExpError::Header {
                    path: path.to_path_buf(),
                    found: header.iter().map(String::from).collect(),
                });
            }
            rd.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
        }
        Format::Json => serde_json::from_reader(std::io::BufReader::new(f)).map_err(|source| ExpError::Json {
            path: path.to_path_buf(),
            source,
        }),
    }
}
