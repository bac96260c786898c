//! Point-list and timeseries readers.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("duplicate code {code:?} at line {first} and line {second}")]
    DuplicateCode {
        code: String,
        first: u64,
        second: u64,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: value {value:?} is not a finite number")]
    InvalidValue { line: u64, value: String },
    #[error("line {line}: unparseable timestamp {value:?}")]
    InvalidTimestamp { line: u64, value: String },
    #[error("unsupported point-list format {0:?} (expected csv or json)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointListFormat {
    Csv,
    Json,
}

impl std::str::FromStr for PointListFormat {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

impl PointListFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPoint {
    pub code: String,
    pub name: String,
    #[serde(default)]
    pub unit: Option<String>,
    /// Columns beyond code/name/unit, kept verbatim.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

impl RawPoint {
    pub fn new(code: impl Into<String>, name: impl Into<String>, unit: Option<&str>) -> Self {
        RawPoint {
            code: code.into(),
            name: name.into(),
            unit: unit.map(str::to_string),
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointList {
    pub source: String,
    pub points: Vec<RawPoint>,
    /// Extra column names in their original order.
    #[serde(default)]
    pub extra_columns: Vec<String>,
}

impl PointList {
    pub fn get(&self, code: &str) -> Option<&RawPoint> {
        self.points.iter().find(|p| p.code == code)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesSample {
    pub code: String,
    #[serde(with = "iso")]
    pub timestamp: NaiveDateTime,
    pub value: f64,
}

mod iso {
    use chrono::NaiveDateTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &NaiveDateTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_timestamp(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDateTime, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_timestamp(&s).ok_or_else(|| serde::de::Error::custom(format!("bad timestamp {s:?}")))
    }
}

fn valid_code(code: &str) -> bool {
    !code.is_empty()
        && code
            .split('.')
            .all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()))
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_pointlist(path: impl AsRef<Path>, format: PointListFormat) -> Result<PointList, IngestError> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut list = parse_pointlist_str(&text, format)?;
    list.source = path.display().to_string();
    Ok(list)
}

pub fn parse_pointlist_str(text: &str, format: PointListFormat) -> Result<PointList, IngestError> {
    let list = match format {
        PointListFormat::Csv => parse_csv(text)?,
        PointListFormat::Json => parse_json(text)?,
    };
    Ok(list)
}

struct Row {
    line: u64,
    point: RawPoint,
}

fn finish(rows: Vec<Row>, extra_columns: Vec<String>) -> Result<PointList, IngestError> {
    let mut seen: HashMap<&str, u64> = HashMap::new();
    for row in &rows {
        if let Some(first) = seen.insert(&row.point.code, row.line) {
            return Err(IngestError::DuplicateCode {
                code: row.point.code.clone(),
                first,
                second: row.line,
            });
        }
    }
    Ok(PointList {
        source: String::new(),
        points: rows.into_iter().map(|r| r.point).collect(),
        extra_columns,
    })
}

fn check_row(line: u64, code: &str, name: &str) -> Result<(), IngestError> {
    if !valid_code(code) {
        return Err(IngestError::Malformed {
            line,
            message: format!("code {code:?} is not a dotted numeric identifier"),
        });
    }
    if name.trim().is_empty() {
        return Err(IngestError::Malformed {
            line,
            message: "empty name".into(),
        });
    }
    Ok(())
}

fn parse_csv(text: &str) -> Result<PointList, IngestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let code_ix = col("code").ok_or(IngestError::MissingColumn("code"))?;
    let name_ix = col("name").ok_or(IngestError::MissingColumn("name"))?;
    let unit_ix = col("unit");
    let extras: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != code_ix && *i != name_ix && Some(*i) != unit_ix)
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let code = record[code_ix].trim().to_string();
        let name = record[name_ix].to_string();
        check_row(line, &code, &name)?;
        let unit = unit_ix
            .map(|i| record[i].to_string())
            .filter(|u| !u.is_empty());
        let extra = extras
            .iter()
            .map(|(i, h)| (h.clone(), record[*i].to_string()))
            .collect();
        rows.push(Row {
            line,
            point: RawPoint {
                code,
                name,
                unit,
                extra,
            },
        });
    }
    finish(rows, extras.into_iter().map(|(_, h)| h).collect())
}

fn parse_json(text: &str) -> Result<PointList, IngestError> {
    let values: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(text).map_err(|e| IngestError::Malformed {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    let mut extra_columns: Vec<String> = Vec::new();
    for (i, obj) in values.into_iter().enumerate() {
        // entries are numbered from 1, like CSV data rows
        let line = i as u64 + 1;
        let field = |key: &'static str| -> Result<Option<String>, IngestError> {
            match obj.get(key) {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
                Some(other) => Err(IngestError::Malformed {
                    line,
                    message: format!("{key} must be a string, got {other}"),
                }),
            }
        };
        let code = field("code")?.ok_or(IngestError::MissingColumn("code"))?;
        let name = field("name")?.ok_or(IngestError::MissingColumn("name"))?;
        check_row(line, &code, &name)?;
        let unit = field("unit")?.filter(|u| !u.is_empty());
        let mut extra = BTreeMap::new();
        for (k, v) in &obj {
            if matches!(k.as_str(), "code" | "name" | "unit") {
                continue;
            }
            let v = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if !extra_columns.contains(k) {
                extra_columns.push(k.clone());
            }
            extra.insert(k.clone(), v);
        }
        rows.push(Row {
            line,
            point: RawPoint {
                code,
                name,
                unit,
                extra,
            },
        });
    }
    finish(rows, extra_columns)
}

/// CSV rendering with the original column order (code, name, unit, extras).
pub fn write_pointlist_csv(list: &PointList) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["code", "name", "unit"];
    header.extend(list.extra_columns.iter().map(String::as_str));
    w.write_record(&header).expect("in-memory write");
    for p in &list.points {
        let mut rec = vec![p.code.as_str(), p.name.as_str(), p.unit.as_deref().unwrap_or("")];
        rec.extend(
            list.extra_columns
                .iter()
                .map(|c| p.extra.get(c).map_or("", String::as_str)),
        );
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// ISO-8601 (date, date-time with `T` or space, optional offset) or
/// `M/D/YYYY` with an optional time.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d.and_time(NaiveTime::MIN));
    }
    for fmt in ["%m/%d/%Y %H:%M:%S", "%m/%d/%Y %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(s, "%m/%d/%Y")
        .ok()
        .map(|d| d.and_time(NaiveTime::MIN))
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.f").to_string()
}

pub fn parse_timeseries(path: impl AsRef<Path>) -> Result<Vec<TimeseriesSample>, IngestError> {
    parse_timeseries_str(&read(path.as_ref())?)
}

pub fn parse_timeseries_str(text: &str) -> Result<Vec<TimeseriesSample>, IngestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(IngestError::MissingColumn(name))
    };
    let (ci, ti, vi) = (col("code")?, col("timestamp")?, col("value")?);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_ts = &record[ti];
        let timestamp = parse_timestamp(raw_ts).ok_or_else(|| IngestError::InvalidTimestamp {
            line,
            value: raw_ts.to_string(),
        })?;
        let raw_v = record[vi].trim();
        let value: f64 = raw_v
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| IngestError::InvalidValue {
                line,
                value: raw_v.to_string(),
            })?;
        out.push(TimeseriesSample {
            code: record[ci].trim().to_string(),
            timestamp,
            value,
        });
    }
    out.sort_by(|a, b| (&a.code, a.timestamp).cmp(&(&b.code, b.timestamp)));
    Ok(out)
}

pub fn write_timeseries_csv(samples: &[TimeseriesSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["code", "timestamp", "value"]).expect("in-memory write");
    for s in samples {
        w.write_record([s.code.as_str(), &format_timestamp(&s.timestamp), &s.value.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Samples whose code is not in the point list.
pub fn orphan_samples<'a>(list: &PointList, samples: &'a [TimeseriesSample]) -> Vec<&'a TimeseriesSample> {
    let codes: std::collections::HashSet<&str> = list.points.iter().map(|p| p.code.as_str()).collect();
    samples.iter().filter(|s| !codes.contains(s.code.as_str())).collect()
}
