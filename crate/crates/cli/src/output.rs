use std::io::Write;

use anyhow::Context;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{Format, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    Indeterminate,
    Data,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub worst_margin: Option<f64>,
    pub status: Status,
    #[serde(flatten)]
    pub details: Map<String, Value>,
}

impl Summary {
    pub fn data() -> Self {
        Summary { worst_margin: None, status: Status::Data, details: Map::new() }
    }

    pub fn verdict(worst_margin: Option<f64>, holds: bool) -> Self {
        let status = match (worst_margin, holds) {
            (None, _) => Status::Indeterminate,
            (Some(_), true) => Status::Holds,
            (Some(_), false) => Status::Violated,
        };
        Summary { worst_margin, status, details: Map::new() }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> anyhow::Result<Self> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }
}

/// The complete output of one run.
#[derive(Debug, Serialize)]
pub struct Document {
    pub config: Value,
    pub reports: Vec<Value>,
    pub summary: Summary,
}

impl Document {
    pub fn write(&self, out: &OutputArgs) -> anyhow::Result<()> {
        let text = match out.format {
            Format::Json => serde_json::to_string_pretty(self)? + "\n",
            Format::Csv => self.to_csv()?,
        };
        match &out.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }

    /// One row per report with nested fields flattened to dotted columns.
    fn to_csv(&self) -> anyhow::Result<String> {
        let rows: Vec<Vec<(String, String)>> = self
            .reports
            .iter()
            .map(|r| {
                let mut cells = Vec::new();
                flatten("", r, &mut cells);
                cells
            })
            .collect();
        let mut header: Vec<String> = Vec::new();
        for row in &rows {
            for (k, _) in row {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(header.iter().map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
