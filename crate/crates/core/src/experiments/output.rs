//! Result tables and their CSV / JSON forms.
//!
//! CSV files start with `# key: value` metadata lines, then a header row
//! and one row per scan point. The leading columns are always
//! `param, estimate, std_error, reference, ratio, samples, tail_bound,
//! boundary_touch_rate`; any further columns are scan specific. JSON files
//! hold `{"meta": {...}, "rows": [{...}, ...]}` with the same column names.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::stats::Estimate;

pub const SCAN_SCHEMA: &str = "loopsoup-scan";
pub const SCAN_SCHEMA_VERSION: u32 = 1;

pub const BASE_COLUMNS: [&str; 8] =
    ["param", "estimate", "std_error", "reference", "ratio", "samples", "tail_bound", "boundary_touch_rate"];

/// `git describe` of the build, or the crate version outside a checkout.
pub fn software_version() -> &'static str {
    env!("LOOPSOUP_VERSION")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Format, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub param: f64,
    pub estimate: Estimate,
    pub reference: f64,
    pub ratio: f64,
    /// Scan-specific columns, in output order.
    pub extra: Vec<(String, f64)>,
}

impl ScanRow {
    pub fn new(param: f64, estimate: Estimate, reference: f64) -> ScanRow {
        let ratio = if reference != 0.0 { estimate.value / reference } else { f64::NAN };
        ScanRow { param, estimate, reference, ratio, extra: Vec::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> ScanRow {
        self.extra.push((name.to_string(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// A list of scan points with run metadata.
#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub kind: String,
    pub meta: BTreeMap<String, Value>,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn new(kind: &str) -> ScanResult {
        let mut meta = BTreeMap::new();
        meta.insert("schema".into(), json!(SCAN_SCHEMA));
        meta.insert("schema_version".into(), json!(SCAN_SCHEMA_VERSION));
        meta.insert("kind".into(), json!(kind));
        meta.insert("software_version".into(), json!(software_version()));
        ScanResult { kind: kind.into(), meta, rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> ScanResult {
        self.meta.insert(key.into(), serde_json::to_value(value).expect("serialisable metadata"));
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Serialize) {
        self.meta.insert(key.into(), serde_json::to_value(value).expect("serialisable metadata"));
    }

    fn extra_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for r in &self.rows {
            for (k, _) in &r.extra {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        let extra = self.extra_columns();
        let header: Vec<&str> = BASE_COLUMNS.iter().copied().chain(extra.iter().map(String::as_str)).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in &self.rows {
            let mut cells = vec![
                num(r.param),
                num(r.estimate.value),
                num(r.estimate.std_error),
                num(r.reference),
                num(r.ratio),
                r.estimate.samples.to_string(),
                num(r.estimate.diagnostics.tail_bound),
                num(r.estimate.diagnostics.boundary_touch_rate),
            ];
            for c in &extra {
                cells.push(r.get(c).map(num).unwrap_or_default());
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("param".into(), json_num(r.param));
                m.insert("estimate".into(), json_num(r.estimate.value));
                m.insert("std_error".into(), json_num(r.estimate.std_error));
                m.insert("reference".into(), json_num(r.reference));
                m.insert("ratio".into(), json_num(r.ratio));
                m.insert("samples".into(), json!(r.estimate.samples));
                m.insert("tail_bound".into(), json_num(r.estimate.diagnostics.tail_bound));
                m.insert("boundary_touch_rate".into(), json_num(r.estimate.diagnostics.boundary_touch_rate));
                m.insert("seed".into(), json!(r.estimate.seed));
                m.insert("wall_time_s".into(), json_num(r.estimate.wall_time_s));
                for (k, v) in &r.extra {
                    m.insert(k.clone(), json_num(*v));
                }
                Value::Object(m)
            })
            .collect();
        json!({ "meta": self.meta, "rows": rows })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)?;
        Ok(())
    }
}

/// A flat list of named values with run metadata, for outputs that are not
/// scans. CSV: the `# key: value` lines, then `name,value` rows with
/// non-numeric values as compact JSON. JSON: `{"meta": {...}, "values": {...}}`.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub meta: BTreeMap<String, Value>,
    pub values: Vec<(String, Value)>,
}

impl Record {
    pub fn new(kind: &str) -> Record {
        let scan = ScanResult::new(kind);
        Record { meta: scan.meta, values: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> Record {
        self.meta.insert(key.into(), serde_json::to_value(value).expect("serialisable metadata"));
        self
    }

    pub fn value(mut self, key: &str, value: impl Serialize) -> Record {
        self.values.push((key.into(), serde_json::to_value(value).expect("serialisable value")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn write<W: Write>(&self, mut w: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(w, "# {k}: {v}")?;
                }
                writeln!(w, "name,value")?;
                for (k, v) in &self.values {
                    match v {
                        Value::Number(n) if n.is_f64() => writeln!(w, "{k},{}", num(n.as_f64().unwrap_or(f64::NAN)))?,
                        Value::Number(n) => writeln!(w, "{k},{n}")?,
                        Value::String(s) => writeln!(w, "{k},{s}")?,
                        Value::Bool(b) => writeln!(w, "{k},{b}")?,
                        other => writeln!(w, "{k},\"{}\"", other.to_string().replace('"', "\"\""))?,
                    }
                }
            }
            Format::Json => {
                let values: Map<String, Value> = self.values.iter().cloned().collect();
                serde_json::to_writer_pretty(&mut w, &json!({ "meta": self.meta, "values": values }))?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Shortest round-trip form; non-finite values as `nan` / `inf` / `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { json!(num(x)) }
}
