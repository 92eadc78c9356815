//! Agaricus-Lepiota mushroom records encoded as category indices.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const FILE_NAME: &str = "agaricus-lepiota.data";
pub const EXPECTED_ROWS: usize = 8124;
pub const EXPECTED_SHA256: &str =
    "e65d082030501a3ebcbcd7c9f7c71aa9d28fdfff463bf4cf4716a3fe13ac360e";
/// Environment variable overriding the data directory.
pub const DATA_DIR_ENV: &str = "BAPLAN_DATA_DIR";
pub const MAX_CATEGORIES: usize = 12;

pub const ATTRIBUTES: [&str; 22] = [
    "cap-shape",
    "cap-surface",
    "cap-color",
    "bruises",
    "odor",
    "gill-attachment",
    "gill-spacing",
    "gill-size",
    "gill-color",
    "stalk-shape",
    "stalk-root",
    "stalk-surface-above-ring",
    "stalk-surface-below-ring",
    "stalk-color-above-ring",
    "stalk-color-below-ring",
    "veil-type",
    "veil-color",
    "ring-number",
    "ring-type",
    "spore-print-color",
    "population",
    "habitat",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MushroomRecord {
    pub edible: bool,
    pub attributes: [u8; 22],
}

impl MushroomRecord {
    /// Attributes followed by the outcome value (0 edible, 1 poisonous).
    pub fn encode(&self) -> Vec<u8> {
        let mut v = self.attributes.to_vec();
        v.push(!self.edible as u8);
        v
    }
}

/// Sorted distinct letters of one attribute column; the index of a letter is its code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub name: String,
    pub letters: Vec<char>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MushroomData {
    pub records: Vec<MushroomRecord>,
    pub columns: Vec<ColumnMap>,
}

fn format_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parses the comma-separated single-letter format; `origin` names the
/// source in error messages.
pub fn parse_dataset(text: &str, origin: &str) -> Result<MushroomData> {
    let mut rows: Vec<(usize, bool, Vec<char>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() != 23 {
            return Err(format_err(
                origin,
                line_no,
                format!("expected 23 fields, found {}", fields.len()),
            ));
        }
        let mut letters = Vec::with_capacity(22);
        for (j, f) in fields.iter().enumerate() {
            let mut cs = f.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) if j > 0 => letters.push(c),
                (Some(_), None) => {}
                _ => return Err(format_err(origin, line_no, format!("field {j} is `{f}`"))),
            }
        }
        let edible = match fields[0] {
            "e" => true,
            "p" => false,
            other => {
                return Err(format_err(
                    origin,
                    line_no,
                    format!("unknown class label `{other}`"),
                ))
            }
        };
        rows.push((line_no, edible, letters));
    }
    let mut columns = Vec::with_capacity(22);
    for (j, name) in ATTRIBUTES.iter().enumerate() {
        let mut letters: Vec<char> = rows.iter().map(|r| r.2[j]).collect();
        letters.sort_unstable();
        letters.dedup();
        if letters.len() > MAX_CATEGORIES {
            let line = rows.iter().map(|r| r.0).max().unwrap_or(0);
            return Err(format_err(
                origin,
                line,
                format!("column {name} has {} distinct values", letters.len()),
            ));
        }
        columns.push(ColumnMap {
            name: name.to_string(),
            letters,
        });
    }
    let records = rows
        .iter()
        .map(|(_, edible, letters)| {
            let mut attributes = [0u8; 22];
            for (j, c) in letters.iter().enumerate() {
                attributes[j] = columns[j].letters.binary_search(c).expect("letter in map") as u8;
            }
            MushroomRecord {
                edible: *edible,
                attributes,
            }
        })
        .collect();
    Ok(MushroomData { records, columns })
}

impl MushroomData {
    /// Reconstructs the raw line of a record.
    pub fn decode(&self, r: &MushroomRecord) -> String {
        let mut s = String::with_capacity(45);
        s.push(if r.edible { 'e' } else { 'p' });
        for (j, &a) in r.attributes.iter().enumerate() {
            s.push(',');
            s.push(self.columns[j].letters[a as usize]);
        }
        s
    }

    pub fn edible_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.edible).count() as f64 / self.records.len().max(1) as f64
    }

    pub fn encoded(&self) -> Vec<Vec<u8>> {
        self.records.iter().map(MushroomRecord::encode).collect()
    }

    /// JSON document of the letter maps.
    pub fn sidecar_json(&self) -> String {
        let mut doc = BTreeMap::new();
        doc.insert("class", serde_json::json!({"e": 0, "p": 1}));
        doc.insert(
            "columns",
            serde_json::to_value(&self.columns).expect("plain data"),
        );
        serde_json::to_string_pretty(&doc).expect("plain data")
    }
}

/// Directory holding the dataset: the override variable, or `data/`.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Result of checking a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetAudit {
    pub path: PathBuf,
    pub sha256: String,
    pub rows: usize,
    pub edible_fraction: f64,
    pub distinct: Vec<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, checksums and parses the dataset, rejecting any deviation from
/// the pinned file.
pub fn load_verified(path: &Path) -> Result<(MushroomData, DatasetAudit)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha = sha256_hex(&bytes);
    let origin = path.display().to_string();
    if sha != EXPECTED_SHA256 {
        return Err(format_err(
            &origin,
            0,
            format!("sha256 {sha} does not match {EXPECTED_SHA256}"),
        ));
    }
    let text = String::from_utf8(bytes).map_err(|e| format_err(&origin, 0, e.to_string()))?;
    let data = parse_dataset(&text, &origin)?;
    if data.records.len() != EXPECTED_ROWS {
        return Err(format_err(
            &origin,
            0,
            format!("{} rows, expected {EXPECTED_ROWS}", data.records.len()),
        ));
    }
    let audit = DatasetAudit {
        path: path.to_path_buf(),
        sha256: sha,
        rows: data.records.len(),
        edible_fraction: data.edible_fraction(),
        distinct: data.columns.iter().map(|c| c.letters.len()).collect(),
    };
    Ok((data, audit))
}

/// Dataset path inside `dir`.
pub fn dataset_path(dir: &Path) -> PathBuf {
    dir.join(FILE_NAME)
}
