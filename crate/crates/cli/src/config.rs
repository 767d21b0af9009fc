//! Flat `key = value` config files, merged into the argument list.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Turns config lines into flags. `#` starts a comment; `true` makes a bare
/// switch and `false` drops it.
pub fn flags_from_text(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value, got {raw:?}", i + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') || key == "config" {
            bail!("line {}: bad key {key:?}", i + 1);
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => out.push(format!("--{key}={value}")),
        }
    }
    Ok(out)
}

/// Splices the flags of any `--config FILE` in front of the command-line
/// flags, right after the subcommand, so later flags win.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().context("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let flags = flags_from_text(&text).with_context(|| format!("in config {path}"))?;
    // program name and subcommand first
    let split = rest.len().min(2);
    let mut merged: Vec<String> = rest[..split].to_vec();
    merged.extend(flags);
    merged.extend(rest[split..].iter().cloned());
    Ok(merged)
}
