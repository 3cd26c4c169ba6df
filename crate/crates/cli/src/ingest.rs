//! Annotation readers and the canonical JSONL interchange format.
//!
//! Canonical JSONL holds one image per line:
//!
//! ```text
//! {"image":"img_1","instances":[{"polygon":[[x,y],...],"score":0.9,"ignore":true,"components":[[[x,y],[x,y],[x,y],[x,y]],...]}]}
//! ```
//!
//! `score`, `ignore` and `components` are optional. The writer emits keys in
//! that order, omits `ignore` when false, and prints floats in shortest
//! round-trip form, so `read(write(r)) == r` for every record and
//! `write(read(s)) == s` for every canonical line.

use std::io::{BufRead, Write};

use compseq_core::{ComponentQuad, Point2, Polygon};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub polygon: Polygon,
    pub score: Option<f64>,
    pub ignore: bool,
    pub components: Option<Vec<ComponentQuad>>,
}

impl Instance {
    pub fn new(polygon: Polygon) -> Self {
        Self { polygon, score: None, ignore: false, components: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationRecord {
    pub image: String,
    pub instances: Vec<Instance>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: invalid JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Schema { line: usize, field: String, message: String },
    #[error("line {line}: {message}")]
    Ctw { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    /// 1-based line number of the offending input, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Json { line, .. } | IngestError::Schema { line, .. } | IngestError::Ctw { line, .. } => {
                Some(*line)
            }
            IngestError::Io(_) => None,
        }
    }
}

/// Strips a trailing carriage return so CRLF input reads like LF input.
fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

// ---------------------------------------------------------------------------
// CTW1500

/// Parses CTW1500-style text: one instance per line, either 28 coordinates
/// (`x1,y1,...,x14,y14`) or 32 fields where a leading `xmin,ymin,xmax,ymax`
/// box is followed by 28 coordinates relative to `(xmin, ymin)`.
///
/// A trailing field starting with `#` is a transcription; `###` (optionally
/// behind the `####` separator) marks a don't-care instance. Blank lines are
/// skipped.
pub fn read_ctw1500(image: &str, text: &str) -> Result<AnnotationRecord, IngestError> {
    let mut instances = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = strip_cr(raw).trim();
        if line.is_empty() {
            continue;
        }
        instances.push(parse_ctw_line(line, i + 1)?);
    }
    Ok(AnnotationRecord { image: image.to_string(), instances })
}

fn parse_ctw_line(line: &str, line_no: usize) -> Result<Instance, IngestError> {
    let err = |message: String| IngestError::Ctw { line: line_no, message };
    let (coords, transcription) = match line.find('#') {
        Some(pos) => (&line[..pos], Some(&line[pos..])),
        None => (line, None),
    };
    let coords = coords.trim_end().strip_suffix(',').unwrap_or(coords.trim_end());
    let fields: Vec<&str> = coords.split(',').map(str::trim).collect();
    let values = fields
        .iter()
        .enumerate()
        .map(|(k, f)| match f.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(err(format!("field {}: non-finite value `{f}`", k + 1))),
            Err(_) => Err(err(format!("field {}: not a number: `{f}`", k + 1))),
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let (origin, offsets) = match values.len() {
        28 => ((0.0, 0.0), &values[..]),
        32 => {
            let (xmin, ymin, xmax, ymax) = (values[0], values[1], values[2], values[3]);
            if xmax < xmin || ymax < ymin {
                return Err(err("bounding box has max < min".to_string()));
            }
            ((xmin, ymin), &values[4..])
        }
        n => return Err(err(format!("expected 28 or 32 coordinate fields, found {n}"))),
    };
    let points: Vec<Point2> =
        offsets.chunks_exact(2).map(|c| Point2::new(c[0] + origin.0, c[1] + origin.1)).collect();
    if points.iter().any(|p| !p.is_finite()) {
        return Err(err("coordinate overflow".to_string()));
    }
    let polygon = Polygon::new(points).map_err(|e| err(e.to_string()))?;
    let ignore = transcription.is_some_and(|t| {
        let t = t.trim();
        t == "###" || t.strip_prefix("####").is_some_and(|rest| rest.trim() == "###")
    });
    Ok(Instance { polygon, score: None, ignore, components: None })
}

// ---------------------------------------------------------------------------
// Canonical JSONL: reading

/// Parses one canonical JSONL line. `line_no` is used in errors only.
pub fn parse_record(line: &str, line_no: usize) -> Result<AnnotationRecord, IngestError> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| IngestError::Json { line: line_no, message: e.to_string() })?;
    let schema = |field: &str, message: &str| IngestError::Schema {
        line: line_no,
        field: field.to_string(),
        message: message.to_string(),
    };
    let obj = value.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    reject_unknown(obj, &["image", "instances"], "", line_no)?;
    let image = match obj.get("image") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(schema("image", "expected a string")),
        None => return Err(schema("image", "missing")),
    };
    let items = match obj.get("instances") {
        Some(Value::Array(a)) => a,
        Some(_) => return Err(schema("instances", "expected an array")),
        None => return Err(schema("instances", "missing")),
    };
    let instances = items
        .iter()
        .enumerate()
        .map(|(i, v)| parse_instance(v, &format!("instances[{i}]"), line_no))
        .collect::<Result<_, _>>()?;
    Ok(AnnotationRecord { image, instances })
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], prefix: &str, line: usize) -> Result<(), IngestError> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(IngestError::Schema {
            line,
            field: if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") },
            message: "unknown field".to_string(),
        }),
        None => Ok(()),
    }
}

fn parse_point(v: &Value, field: &str, line: usize) -> Result<Point2, IngestError> {
    let bad = || IngestError::Schema {
        line,
        field: field.to_string(),
        message: "expected [x, y] with finite numbers".to_string(),
    };
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => {
            let p = Point2::new(x.as_f64().ok_or_else(bad)?, y.as_f64().ok_or_else(bad)?);
            if p.is_finite() {
                Ok(p)
            } else {
                Err(bad())
            }
        }
        _ => Err(bad()),
    }
}

fn parse_points(v: &Value, field: &str, line: usize) -> Result<Vec<Point2>, IngestError> {
    let arr = v.as_array().ok_or_else(|| IngestError::Schema {
        line,
        field: field.to_string(),
        message: "expected an array of points".to_string(),
    })?;
    arr.iter().enumerate().map(|(i, p)| parse_point(p, &format!("{field}[{i}]"), line)).collect()
}

pub(crate) fn parse_instance(v: &Value, prefix: &str, line: usize) -> Result<Instance, IngestError> {
    let schema = |field: &str, message: String| IngestError::Schema {
        line,
        field: format!("{prefix}.{field}"),
        message,
    };
    let obj = v.as_object().ok_or_else(|| IngestError::Schema {
        line,
        field: prefix.to_string(),
        message: "expected an object".to_string(),
    })?;
    reject_unknown(obj, &["polygon", "score", "ignore", "components"], prefix, line)?;

    let poly_value = obj.get("polygon").ok_or_else(|| schema("polygon", "missing".to_string()))?;
    let points = parse_points(poly_value, &format!("{prefix}.polygon"), line)?;
    if points.len() < 3 {
        return Err(schema("polygon", format!("needs at least 3 vertices, found {}", points.len())));
    }
    let polygon = Polygon::new(points).map_err(|e| schema("polygon", e.to_string()))?;

    let score = match obj.get("score") {
        None => None,
        Some(s) => match s.as_f64() {
            Some(x) if (0.0..=1.0).contains(&x) => Some(x),
            _ => return Err(schema("score", "expected a number in [0, 1]".to_string())),
        },
    };
    let ignore = match obj.get("ignore") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(schema("ignore", "expected a boolean".to_string())),
    };
    let components = match obj.get("components") {
        None => None,
        Some(Value::Array(quads)) => {
            if quads.is_empty() {
                return Err(schema("components", "expected at least one quad".to_string()));
            }
            let mut out = Vec::with_capacity(quads.len());
            for (i, q) in quads.iter().enumerate() {
                let field = format!("{prefix}.components[{i}]");
                let pts = parse_points(q, &field, line)?;
                let v: [Point2; 4] = pts.try_into().map_err(|_| IngestError::Schema {
                    line,
                    field: field.clone(),
                    message: "expected exactly 4 points".to_string(),
                })?;
                out.push(ComponentQuad::new(v));
            }
            Some(out)
        }
        Some(_) => return Err(schema("components", "expected an array of quads".to_string())),
    };
    Ok(Instance { polygon, score, ignore, components })
}

/// Reads canonical JSONL. Blank lines are skipped; CRLF is accepted.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<AnnotationRecord>, IngestError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = strip_cr(&line);
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(line, i + 1)?);
    }
    Ok(records)
}

pub fn read_jsonl_str(text: &str) -> Result<Vec<AnnotationRecord>, IngestError> {
    read_jsonl(text.as_bytes())
}

/// Reads a pair file: one `{"a": instance, "b": instance}` object per line,
/// with instances in the canonical schema.
pub fn read_pairs_str(text: &str) -> Result<Vec<(Instance, Instance)>, IngestError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = strip_cr(raw);
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(line).map_err(|e| IngestError::Json { line: line_no, message: e.to_string() })?;
        let obj = value.as_object().ok_or_else(|| IngestError::Schema {
            line: line_no,
            field: "$".to_string(),
            message: "expected an object".to_string(),
        })?;
        reject_unknown(obj, &["a", "b"], "", line_no)?;
        let get = |key: &str| {
            obj.get(key).ok_or_else(|| IngestError::Schema {
                line: line_no,
                field: key.to_string(),
                message: "missing".to_string(),
            })
        };
        let a = parse_instance(get("a")?, "a", line_no)?;
        let b = parse_instance(get("b")?, "b", line_no)?;
        pairs.push((a, b));
    }
    Ok(pairs)
}

/// Serializes a pair-file line.
pub fn pair_to_line(a: &Instance, b: &Instance) -> String {
    #[derive(Serialize)]
    struct PairOut {
        a: InstanceOut,
        b: InstanceOut,
    }
    serde_json::to_string(&PairOut { a: a.into(), b: b.into() }).expect("instances hold only finite numbers")
}

// ---------------------------------------------------------------------------
// Canonical JSONL: writing

#[derive(Serialize)]
struct RecordOut<'a> {
    image: &'a str,
    instances: Vec<InstanceOut>,
}

#[derive(Serialize)]
pub(crate) struct InstanceOut {
    polygon: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    ignore: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<Vec<[[f64; 2]; 4]>>,
}

impl From<&Instance> for InstanceOut {
    fn from(inst: &Instance) -> Self {
        InstanceOut {
            polygon: inst.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
            score: inst.score,
            ignore: inst.ignore,
            components: inst.components.as_ref().map(|qs| qs.iter().map(|q| q.v.map(|p| [p.x, p.y])).collect()),
        }
    }
}

/// Serializes one record as a single canonical line (no trailing newline).
pub fn record_to_line(record: &AnnotationRecord) -> String {
    let out = RecordOut { image: &record.image, instances: record.instances.iter().map(InstanceOut::from).collect() };
    serde_json::to_string(&out).expect("records hold only finite numbers")
}

/// Writes records as canonical JSONL with LF line endings.
pub fn write_jsonl<W: Write>(mut writer: W, records: &[AnnotationRecord]) -> std::io::Result<()> {
    for r in records {
        writer.write_all(record_to_line(r).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn to_jsonl_string(records: &[AnnotationRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
