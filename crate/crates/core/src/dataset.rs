//! CSV dataset ingestion.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::Partition;

/// Where the ground-truth label lives in each CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LabelColumn {
    #[default]
    Last,
    First,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: false,
            label: LabelColumn::Last,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// `n × d` feature matrix.
    pub features: DMatrix<f64>,
    /// Dense 0-based ground-truth classes, if the file carried them.
    pub labels: Option<Partition>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, labels: Option<Partition>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != features.nrows() {
                return Err(Error::Dimension(format!(
                    "{} labels for {} samples",
                    l.len(),
                    features.nrows()
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(Partition::n_clusters)
    }
}

/// Loads a comma-separated dataset. Rows and columns in errors are 1-based
/// positions in the file (the header, when present, is row 1).
pub fn load_dataset(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    parse_dataset(&name, &text, opts)
}

pub fn parse_dataset(name: &str, text: &str, opts: CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let row_offset = if opts.has_header { 2 } else { 1 };
    let mut width = None;
    let mut values = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();

    for (r, record) in reader.records().enumerate() {
        let row = r + row_offset;
        let record = record.map_err(|e| Error::MalformedInput {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Dimension(format!(
                    "row {row} has {} fields, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        let label_idx = match opts.label {
            LabelColumn::Last => Some(record.len() - 1),
            LabelColumn::First => Some(0),
            LabelColumn::None => None,
        };
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_idx {
                raw_labels.push(field.to_owned());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::MalformedInput {
                row,
                column: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            values.push(v);
        }
    }

    let width = width.ok_or_else(|| Error::MalformedInput {
        row: row_offset,
        column: 0,
        message: "no data rows".into(),
    })?;
    let d = if opts.label == LabelColumn::None { width } else { width - 1 };
    if d == 0 {
        return Err(Error::Dimension("rows carry no feature columns".into()));
    }
    let n = values.len() / d;
    let features = DMatrix::from_row_slice(n, d, &values);
    let labels = match opts.label {
        LabelColumn::None => None,
        _ => Some(Partition::from_labels(&raw_labels)),
    };
    Dataset::new(name, features, labels)
}
