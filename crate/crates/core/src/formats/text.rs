use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mining::{Cut, TripletRecord};

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines that are not `#` comments, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses `cut_id,start_frame,end_frame` lines (inclusive, zero-based).
pub fn parse_cuts(text: &str, path: &Path) -> Result<Vec<Cut>> {
    content_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [id, start, end] = fields[..] else {
                return Err(Error::format(
                    path,
                    format!("line {n}: expected 3 fields, got {}", fields.len()),
                ));
            };
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| Error::format(path, format!("line {n}: {s:?}: {e}")))
            };
            Ok(Cut {
                id: num(id)?,
                start: num(start)? as usize,
                end: num(end)? as usize,
            })
        })
        .collect()
}

pub fn read_cuts(path: impl AsRef<Path>) -> Result<Vec<Cut>> {
    let path = path.as_ref();
    parse_cuts(&read_text(path)?, path)
}

/// Parses `sample_id,tag[,tag...]` lines into a map; repeated ids accumulate.
pub fn parse_tags(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let mut fields = line.split(',').map(str::trim);
        let id = fields.next().unwrap_or_default();
        if id.is_empty() {
            return Err(Error::format(path, format!("line {n}: missing sample id")));
        }
        let entry = out.entry(id.to_string()).or_default();
        for tag in fields.filter(|t| !t.is_empty()) {
            if !entry.iter().any(|t| t == tag) {
                entry.push(tag.to_string());
            }
        }
    }
    Ok(out)
}

pub fn read_tags(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<String>>> {
    let path = path.as_ref();
    parse_tags(&read_text(path)?, path)
}

/// One JSON object per record, newline-terminated.
pub fn manifest_to_string(records: &[TripletRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(records: &[TripletRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, manifest_to_string(records)).map_err(|e| Error::io(path, e))
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<TripletRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<TripletRecord>> {
    let path = path.as_ref();
    parse_manifest(&read_text(path)?, path)
}
