//! JSON Lines annotation records.
//!
//! ```text
//! {"image_id": "0001_c1_1", "person_id": "0001", "split": "test", "captions": ["..."], "source": "cuhk"}
//! ```

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub person_id: String,
    pub split: Split,
    pub captions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl AnnotationRecord {
    /// Query id of the `index`-th caption: `<image_id>#<index>`.
    pub fn caption_id(&self, index: usize) -> String {
        caption_id(&self.image_id, index)
    }
}

pub fn caption_id(image_id: &str, index: usize) -> String {
    format!("{image_id}#{index}")
}

/// Splits a caption query id into its image id and caption index.
pub fn parse_caption_id(id: &str) -> Option<(&str, usize)> {
    let (image, index) = id.rsplit_once('#')?;
    Some((image, index.parse().ok()?))
}

/// Reads and validates an annotation file. Blank lines are ignored; records
/// are returned in file order.
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(BufReader::new(file), path)
}

pub fn parse_annotations<R: BufRead>(reader: R, path: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let record = record_from_value(value, path, line_no)?;
        if !seen.insert(record.image_id.clone()) {
            return Err(Error::DuplicateId {
                id: record.image_id,
                line: Some(line_no),
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn record_from_value(value: Value, path: &Path, line: usize) -> Result<AnnotationRecord> {
    let schema = |field: &'static str, message: &str| Error::Schema {
        path: path.to_path_buf(),
        line,
        field,
        message: message.to_string(),
    };
    let Value::Object(obj) = value else {
        return Err(schema("<record>", "expected a JSON object"));
    };

    let image_id = required_string(&obj, "image_id").map_err(|m| schema("image_id", m))?;
    let person_id = required_string(&obj, "person_id").map_err(|m| schema("person_id", m))?;
    let split = match obj.get("split") {
        None => return Err(schema("split", "missing")),
        Some(Value::String(s)) if s == "train" => Split::Train,
        Some(Value::String(s)) if s == "test" => Split::Test,
        Some(_) => return Err(schema("split", "expected \"train\" or \"test\"")),
    };
    let captions = match obj.get("captions") {
        None => return Err(schema("captions", "missing")),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_owned))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| schema("captions", "every caption must be a string"))?,
        Some(_) => return Err(schema("captions", "expected an array of strings")),
    };
    if captions.is_empty() {
        return Err(schema("captions", "at least one caption is required"));
    }
    let source = match obj.get("source") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema("source", "expected a string")),
    };
    Ok(AnnotationRecord {
        image_id,
        person_id,
        split,
        captions,
        source,
    })
}

fn required_string(obj: &Map<String, Value>, field: &str) -> Result<String, &'static str> {
    match obj.get(field) {
        None => Err("missing"),
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err("must not be empty"),
        Some(_) => Err("expected a string"),
    }
}
