//! JSONL and CSV readers for the item record schema
//! `{id, text, likes, dislikes, created_at?}` and a JSONL writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use evalpulse_core::dataset::{EvaluationDataset, Item, Timestamp};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// `.csv` means CSV, anything else JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

/// Accepts RFC 3339, `YYYY-MM-DDTHH:MM:SS` / `YYYY-MM-DD HH:MM:SS` (read as
/// UTC) and bare dates (midnight UTC).
pub fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(Timestamp(dt.timestamp()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(Timestamp(dt.and_utc().timestamp()));
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(Timestamp(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp()));
    }
    Err(format!("not an ISO-8601 timestamp: {s:?}"))
}

pub fn format_timestamp(ts: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(ts.0, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.0.to_string())
}

/// Reads a dataset in input order with `filter_state = raw`.
pub fn load_dataset(path: &Path, format: Format, as_of: Timestamp) -> Result<EvaluationDataset, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let records = match format {
        Format::Jsonl => parse_jsonl(&text),
        Format::Csv => parse_csv(&text),
    }
    .map_err(|(line, message)| CliError::Record { path: path.into(), line, message })?;

    let mut lines = std::collections::HashMap::new();
    for (line, item) in &records {
        if let Some(first) = lines.insert(item.id.as_str(), *line) {
            return Err(CliError::Record {
                path: path.into(),
                line: *line,
                message: format!("duplicate id {:?} (first seen at line {first})", item.id),
            });
        }
    }
    let items = records.into_iter().map(|(_, item)| item).collect();
    let label = path.display().to_string();
    EvaluationDataset::new(items, label, as_of).map_err(|e| CliError::Input(e.to_string()))
}

type RecordError = (usize, String);

fn parse_jsonl(text: &str) -> Result<Vec<(usize, Item)>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| (line_no, format!("invalid JSON: {e}")))?;
        let Value::Object(obj) = value else {
            return Err((line_no, "record is not a JSON object".into()));
        };
        out.push((line_no, json_item(&obj).map_err(|m| (line_no, m))?));
    }
    Ok(out)
}

fn json_item(obj: &Map<String, Value>) -> Result<Item, String> {
    let string = |field: &str| match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(format!("field `{field}` must be a string")),
        None => Err(format!("missing field `{field}`")),
    };
    let count = |field: &str| match obj.get(field) {
        Some(Value::Number(n)) => {
            if let Some(v) = n.as_u64() {
                Ok(v)
            } else if n.as_i64().is_some() || n.as_f64().is_some_and(|f| f < 0.0) {
                Err(format!("negative count in field `{field}`"))
            } else {
                Err(format!("field `{field}` must be an integer, got {n}"))
            }
        }
        Some(other) => Err(format!("field `{field}` must be an integer, got {other}")),
        None => Err(format!("missing field `{field}`")),
    };
    let mut item = Item::new(string("id")?, string("text")?, count("likes")?, count("dislikes")?);
    match obj.get("created_at") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => {
            item.created_at = Some(parse_timestamp(s).map_err(|e| format!("field `created_at`: {e}"))?)
        }
        Some(_) => return Err("field `created_at` must be a string".into()),
    }
    Ok(item)
}

fn parse_csv(text: &str) -> Result<Vec<(usize, Item)>, RecordError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| (1, format!("invalid header: {e}")))?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| column(name).ok_or((1, format!("missing column `{name}`")));
    let (id, text_col, likes, dislikes) = (required("id")?, required("text")?, required("likes")?, required("dislikes")?);
    let created = column("created_at");

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| (e.position().map_or(0, |p| p.line() as usize), format!("invalid CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |j: usize, field: &str| record.get(j).ok_or_else(|| (line, format!("missing field `{field}`")));
        let count = |j: usize, field: &str| -> Result<u64, RecordError> {
            let raw = get(j, field)?.trim();
            if let Ok(v) = raw.parse::<u64>() {
                Ok(v)
            } else if raw.parse::<i64>().is_ok() {
                Err((line, format!("negative count in field `{field}`")))
            } else {
                Err((line, format!("field `{field}` must be an integer, got {raw:?}")))
            }
        };
        let mut item = Item::new(get(id, "id")?, get(text_col, "text")?, count(likes, "likes")?, count(dislikes, "dislikes")?);
        if let Some(j) = created {
            let raw = get(j, "created_at")?.trim();
            if !raw.is_empty() {
                item.created_at = Some(parse_timestamp(raw).map_err(|e| (line, format!("field `created_at`: {e}")))?);
            }
        }
        out.push((line, item));
    }
    Ok(out)
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    text: &'a str,
    likes: u64,
    dislikes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    created_at: Option<String>,
}

pub fn write_jsonl<W: Write>(ds: &EvaluationDataset, mut w: W) -> std::io::Result<()> {
    for item in ds.items() {
        let rec = OutRecord {
            id: &item.id,
            text: &item.text,
            likes: item.likes,
            dislikes: item.dislikes,
            created_at: item.created_at.map(format_timestamp),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
