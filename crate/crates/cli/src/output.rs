use std::fs;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

use crate::args::{Command, Format, GlobalArgs};

pub const SCHEMA: &str = "tfconc-report-v1";

/// A finished command: the nested JSON result and its flat per-row projection.
pub struct Report {
    pub result: Value,
    pub rows: Vec<Map<String, Value>>,
}

fn meta(global: &GlobalArgs, command: &Command) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command.name(),
        "config": global,
        "args": command,
    })
}

pub fn render_json(report: &Report, global: &GlobalArgs, command: &Command) -> String {
    let doc = json!({ "meta": meta(global, command), "result": report.result });
    let mut text = serde_json::to_string_pretty(&doc).expect("values serialize");
    text.push('\n');
    text
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// Header from the union of row keys in first-seen order, one line per row.
pub fn render_csv(report: &Report) -> String {
    let mut header: Vec<&String> = Vec::new();
    for row in &report.rows {
        for k in row.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut out = header
        .iter()
        .map(|k| k.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = header
            .iter()
            .map(|k| row.get(*k).map(csv_cell).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit(report: &Report, global: &GlobalArgs, command: &Command) -> io::Result<()> {
    let text = match global.format {
        Format::Json => render_json(report, global, command),
        Format::Csv => render_csv(report),
    };
    match &global.out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
