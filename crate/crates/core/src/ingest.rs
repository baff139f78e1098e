//! Reading and writing selection datasets.
//!
//! CSV: one row per subject, `subject,item;item;...`, with an optional first
//! line `#catalog: item;item;...` declaring the full catalog (including items
//! nobody selected). JSON: `{"catalog": [...], "responses": [{"subject": ..,
//! "selected": [..]}]}` where `catalog` may be omitted.

use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

const CATALOG_PREFIX: &str = "#catalog:";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" | "txt" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown dataset format `{other}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    catalog: Option<Vec<String>>,
    responses: Vec<JsonResponse>,
}

#[derive(Serialize, Deserialize)]
struct JsonResponse {
    subject: String,
    #[serde(default)]
    selected: Vec<String>,
}

pub fn parse_dataset<R: Read>(mut input: R, format: Format) -> Result<Dataset> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("input is not valid UTF-8: {e}"),
    })?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut catalog: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let first = record.get(0).unwrap_or("");
        if let Some(rest) = first.strip_prefix(CATALOG_PREFIX) {
            if n != 0 || record.len() != 1 {
                return Err(Error::Parse {
                    line,
                    message: "catalog declaration must be a single field on the first line".into(),
                });
            }
            catalog = Some(split_items(rest));
            continue;
        }
        match record.len() {
            0 => continue,
            1 if first.is_empty() => continue,
            1 | 2 => {}
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `subject,item;item;...`, found {} fields", record.len()),
                })
            }
        }
        if first.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty subject label".into(),
            });
        }
        let selected = record.get(1).map(split_items).unwrap_or_default();
        rows.push((first.to_owned(), selected));
    }
    if catalog.is_none() && rows.iter().all(|(_, s)| s.is_empty()) {
        return Err(Error::Parse {
            line: 0,
            message: "no items: declare a catalog or select at least one item".into(),
        });
    }
    Dataset::from_labeled(catalog.as_deref(), rows)
}

fn split_items(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn parse_json(text: &str) -> Result<Dataset> {
    let doc: JsonDataset = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let rows = doc.responses.into_iter().map(|r| (r.subject, r.selected));
    Dataset::from_labeled(doc.catalog.as_deref(), rows)
}

/// Serializes a dataset; the catalog is always written so unselected items
/// and id order survive a round trip.
pub fn serialize_dataset(dataset: &Dataset, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(dataset),
        Format::Json => to_json(dataset),
    }
}

fn csv_safe(label: &str) -> bool {
    !label.is_empty()
        && label.trim() == label
        && !label.starts_with('#')
        && !label.contains([',', ';', '"', '\n', '\r'])
}

fn to_csv(dataset: &Dataset) -> Result<String> {
    let labels = dataset
        .item_labels()
        .labels()
        .iter()
        .chain(dataset.subject_labels().labels());
    if let Some(bad) = labels.into_iter().find(|l| !csv_safe(l)) {
        return Err(Error::InvalidArgument(format!(
            "label `{bad}` cannot be written as csv"
        )));
    }
    let mut out = String::new();
    out.push_str(CATALOG_PREFIX);
    out.push(' ');
    out.push_str(&dataset.item_labels().labels().join(";"));
    out.push('\n');
    for r in dataset.responses() {
        out.push_str(dataset.subject_label(r.subject));
        out.push(',');
        let items: Vec<&str> = r.selected().iter().map(|&j| dataset.item_label(j)).collect();
        out.push_str(&items.join(";"));
        out.push('\n');
    }
    Ok(out)
}

fn to_json(dataset: &Dataset) -> Result<String> {
    let doc = JsonDataset {
        catalog: Some(dataset.item_labels().labels().to_vec()),
        responses: dataset
            .responses()
            .iter()
            .map(|r| JsonResponse {
                subject: dataset.subject_label(r.subject).to_owned(),
                selected: r
                    .selected()
                    .iter()
                    .map(|&j| dataset.item_label(j).to_owned())
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}
