//! `--config FILE`: line-based `key=value` settings that override flags.
//!
//! Each entry becomes `--key value` appended after the command line; every
//! subcommand lets a later occurrence of a flag replace an earlier one.

use std::fs;

use crate::{cfg_err, Failure};

/// Returns `argv` with the settings of any `--config FILE` appended.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(it.next().ok_or_else(|| cfg_err("--config needs a file"))?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    rest.extend(parse_config(&text)?);
    Ok(rest)
}

/// Flag tokens for the entries of a config file.
pub fn parse_config(text: &str) -> Result<Vec<String>, Failure> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("config line {}: expected key=value, got {raw:?}", i + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(cfg_err(format!("config line {}: bad key {key:?}", i + 1)));
        }
        if key == "config" {
            return Err(cfg_err("config files cannot include other config files"));
        }
        out.push(format!("--{key}"));
        out.push(value.trim().to_string());
    }
    Ok(out)
}
