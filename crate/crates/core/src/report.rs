//! Key/value text reports shared by every stage.
//!
//! A report is a title line, `key = value` lines and optional named blocks:
//!
//! ```text
//! # evaluation
//! macro_f1 = 0.537792
//!
//! [confusion]
//! ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvReport {
    title: String,
    entries: Vec<(String, String)>,
    blocks: Vec<(String, String)>,
}

impl KvReport {
    pub fn new(title: impl Into<String>) -> Self {
        KvReport {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    /// Fixed six-decimal formatting keeps reports byte-stable across runs.
    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn block(&mut self, name: impl Into<String>, body: impl Into<String>) -> &mut Self {
        self.blocks.push((name.into(), body.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for (name, body) in &self.blocks {
            out.push_str(&format!("\n[{name}]\n{body}"));
            if !body.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// Parses the `key = value` lines of a rendered report, ignoring blocks.
pub fn parse_kv(text: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        if line.starts_with('[') {
            break;
        }
        if let Some((k, v)) = line.split_once(" = ") {
            out.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_then_parse() {
        let mut r = KvReport::new("demo");
        r.push("n", 3).push_f64("f1", 0.5).block("matrix", "1 2\n3 4");
        let text = r.render();
        assert!(text.starts_with("# demo\n"));
        let kv = parse_kv(&text);
        assert_eq!(kv["n"], "3");
        assert_eq!(kv["f1"], "0.500000");
        assert!(text.contains("[matrix]\n1 2\n3 4\n"));
    }
}
