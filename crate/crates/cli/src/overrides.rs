//! `--set key.path=value` overrides applied to a TOML document before it is
//! deserialized.

use anyhow::{anyhow, bail, Context, Result};
use toml::{Table, Value};

/// Parses the right-hand side as a TOML value, falling back to a bare string
/// so `--set output_dir=out` works without quoting.
fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

pub fn apply(doc: &mut Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override `{assignment}` has an empty key segment");
    }
    let mut cur = doc;
    for k in &keys[..keys.len() - 1] {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .with_context(|| format!("override `{assignment}`: `{k}` is not a table"))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn apply_all(doc: &mut Table, assignments: &[String]) -> Result<()> {
    for a in assignments {
        apply(doc, a)?;
    }
    Ok(())
}
