use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::{BinaryLabel, LabelScheme, SixLevelLabel};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// CSV with `id,news_url,title,...`; the label comes from a `label`
    /// column or from a `_fake` / `_real` file name suffix.
    Fakenewsnet,
    /// Headerless TSV: id, label, statement, subject, speaker, ...
    Liar,
    /// CSV with `id,tweet,label` (or `text` instead of `tweet`).
    Covid,
    /// One JSON object per line: id, text, label, optional source and date.
    GenericJsonl,
}

impl FromStr for DatasetFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "fakenewsnet" => Ok(DatasetFormat::Fakenewsnet),
            "liar" => Ok(DatasetFormat::Liar),
            "covid" | "covid19" | "covid_19" => Ok(DatasetFormat::Covid),
            "generic_jsonl" | "jsonl" => Ok(DatasetFormat::GenericJsonl),
            other => Err(EvalError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub text: String,
    #[serde(rename = "label")]
    pub gold_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

/// Records plus the label scheme they are expressed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub scheme: LabelScheme,
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    /// First `limit` records after a seeded shuffle; `None` keeps them all
    /// in file order.
    pub fn subsample(mut self, limit: Option<usize>, seed: u64) -> Dataset {
        if let Some(n) = limit {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            self.records.shuffle(&mut rng);
            self.records.truncate(n);
        }
        self
    }

    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

fn binary_label(raw: &str) -> Option<&'static str> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "real" | "true" | "1" => Some(BinaryLabel::Real.as_str()),
        "fake" | "false" | "0" => Some(BinaryLabel::Fake.as_str()),
        _ => None,
    }
}

fn six_level_label(raw: &str) -> Option<&'static str> {
    let norm = raw.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    SixLevelLabel::parse(&norm).map(SixLevelLabel::as_str)
}

/// Maps a gold label into `scheme`, or `None` if it is not part of it.
pub fn map_label(raw: &str, scheme: LabelScheme) -> Option<&'static str> {
    match scheme {
        LabelScheme::Binary => binary_label(raw),
        LabelScheme::SixLevel => six_level_label(raw),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> EvalError {
    EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn unknown(path: &Path, row: usize, label: &str) -> EvalError {
    EvalError::UnknownLabel {
        path: path.display().to_string(),
        row,
        label: label.to_string(),
    }
}

fn schema(path: &Path, row: usize, message: impl Into<String>) -> EvalError {
    EvalError::Schema {
        path: path.display().to_string(),
        row,
        message: message.into(),
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, EvalError> {
    match format {
        DatasetFormat::Fakenewsnet => load_fakenewsnet(path),
        DatasetFormat::Liar => load_liar(path),
        DatasetFormat::Covid => load_covid(path),
        DatasetFormat::GenericJsonl => load_generic(path),
    }
}

fn non_empty(s: Option<&str>) -> Option<String> {
    s.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

fn load_fakenewsnet(path: &Path) -> Result<Dataset, EvalError> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_ascii_lowercase();
    let file_label = if stem.ends_with("_fake") {
        Some("fake")
    } else if stem.ends_with("_real") {
        Some("real")
    } else {
        None
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| schema(path, 1, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| schema(path, 1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_c, title_c) = match (col("id"), col("title")) {
        (Some(i), Some(t)) => (i, t),
        _ => return Err(schema(path, 1, "expected `id` and `title` columns")),
    };
    let label_c = col("label");
    if label_c.is_none() && file_label.is_none() {
        return Err(schema(
            path,
            1,
            "no `label` column and the file name does not end in _fake or _real",
        ));
    }
    let url_c = col("news_url");
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| schema(path, line, e.to_string()))?;
        let raw = match label_c {
            Some(c) => row.get(c).unwrap_or(""),
            None => file_label.unwrap_or(""),
        };
        let gold = binary_label(raw).ok_or_else(|| unknown(path, line, raw))?;
        records.push(DatasetRecord {
            id: row.get(id_c).unwrap_or("").trim().to_string(),
            text: row.get(title_c).unwrap_or("").trim().to_string(),
            gold_label: gold.to_string(),
            source: non_empty(url_c.and_then(|c| row.get(c))),
            date: None,
        });
    }
    finish(path, LabelScheme::Binary, records)
}

fn load_liar(path: &Path) -> Result<Dataset, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_path(path)
        .map_err(|e| schema(path, 1, e.to_string()))?;
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 1;
        let row = row.map_err(|e| schema(path, line, e.to_string()))?;
        if row.len() < 3 {
            return Err(schema(path, line, format!("expected at least 3 columns, found {}", row.len())));
        }
        let raw = &row[1];
        let gold = six_level_label(raw).ok_or_else(|| unknown(path, line, raw))?;
        records.push(DatasetRecord {
            id: row[0].trim().to_string(),
            text: row[2].trim().to_string(),
            gold_label: gold.to_string(),
            source: non_empty(row.get(4)),
            date: None,
        });
    }
    finish(path, LabelScheme::SixLevel, records)
}

fn load_covid(path: &Path) -> Result<Dataset, EvalError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| schema(path, 1, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| schema(path, 1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_c = col("tweet").or_else(|| col("text"));
    let (id_c, text_c, label_c) = match (col("id"), text_c, col("label")) {
        (Some(i), Some(t), Some(l)) => (i, t, l),
        _ => return Err(schema(path, 1, "expected `id`, `tweet` (or `text`) and `label` columns")),
    };
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| schema(path, line, e.to_string()))?;
        let raw = row.get(label_c).unwrap_or("");
        let gold = binary_label(raw).ok_or_else(|| unknown(path, line, raw))?;
        records.push(DatasetRecord {
            id: row.get(id_c).unwrap_or("").trim().to_string(),
            text: row.get(text_c).unwrap_or("").trim().to_string(),
            gold_label: gold.to_string(),
            source: None,
            date: None,
        });
    }
    finish(path, LabelScheme::Binary, records)
}

/// Generic JSONL: the scheme is binary when every label maps to real/fake,
/// otherwise six-level.
fn load_generic(path: &Path) -> Result<Dataset, EvalError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut raw = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| schema(path, line_no, e.to_string()))?;
        raw.push((line_no, rec));
    }
    let scheme = if raw.iter().all(|(_, r)| binary_label(&r.gold_label).is_some()) {
        LabelScheme::Binary
    } else {
        LabelScheme::SixLevel
    };
    let mut records = Vec::with_capacity(raw.len());
    for (line, mut rec) in raw {
        let gold = map_label(&rec.gold_label, scheme).ok_or_else(|| unknown(path, line, &rec.gold_label))?;
        rec.gold_label = gold.to_string();
        rec.date = rec.date.as_deref().and_then(crate::model::normalize_date).or(rec.date);
        records.push(rec);
    }
    finish(path, scheme, records)
}

fn finish(path: &Path, scheme: LabelScheme, records: Vec<DatasetRecord>) -> Result<Dataset, EvalError> {
    let mut seen = BTreeSet::new();
    for r in &records {
        if r.id.is_empty() || r.text.is_empty() {
            return Err(EvalError::Schema {
                path: path.display().to_string(),
                row: 0,
                message: format!("record `{}` has an empty id or text", r.id),
            });
        }
        if !seen.insert(r.id.as_str()) {
            return Err(EvalError::DuplicateId(r.id.clone()));
        }
    }
    Ok(Dataset { scheme, records })
}
