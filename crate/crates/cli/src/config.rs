//! Config files and their merge with the command line.
//!
//! A config file is either a JSON object or `key = value` lines (`#` starts a
//! comment). Keys are long flag names; `_` and `-` are interchangeable. Values
//! from the file are placed right after the subcommand, so any flag given on
//! the command line wins.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Options of the top-level command that take a value.
const GLOBAL_VALUED: &[&str] = &["--threads", "--out", "--format", "--config"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let map: serde_json::Map<String, Value> = serde_json::from_str(trimmed).context("config is not a JSON object")?;
        let mut out = Vec::new();
        for (k, v) in map {
            let v = match v {
                Value::Null => continue,
                Value::Bool(b) => b.to_string(),
                Value::Number(n) => n.to_string(),
                Value::String(s) => s,
                other => bail!("config key {k:?}: expected a scalar, found {other}"),
            };
            out.push((k, v));
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", i + 1);
        };
        out.push((k.trim().to_string(), v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

fn flag(key: &str) -> String {
    format!("--{}", key.trim_start_matches('-').replace('_', "-"))
}

/// Position of the subcommand token in `args` (program name excluded).
fn subcommand_index(args: &[String], subcommands: &[&str]) -> Option<usize> {
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if GLOBAL_VALUED.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return subcommands.contains(&a.as_str()).then_some(i);
        }
        i += 1;
    }
    None
}

/// Removes `--config PATH` from `argv` and splices the file's settings in
/// front of the user's own flags.
pub fn expand_args(argv: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>> {
    let mut iter = argv.into_iter();
    let program = iter.next().unwrap_or_else(|| "majorantlab".into());
    let mut rest = Vec::new();
    let mut config = None;
    while let Some(a) = iter.next() {
        if a == "--config" {
            config = Some(iter.next().context("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let entries = parse_config(&text).with_context(|| format!("in config {path}"))?;

    let mut command = None;
    let mut file_args = Vec::new();
    for (k, v) in entries {
        if k == "command" {
            command = Some(v);
            continue;
        }
        match v.as_str() {
            "true" => file_args.push(flag(&k)),
            "false" => {}
            _ => {
                file_args.push(flag(&k));
                file_args.push(v);
            }
        }
    }
    let (before, sub, after) = match subcommand_index(&rest, subcommands) {
        Some(i) => (rest[..i].to_vec(), rest[i].clone(), rest[i + 1..].to_vec()),
        None => match command {
            Some(c) => (rest, c, Vec::new()),
            None => bail!("no subcommand given on the command line or in {path}"),
        },
    };
    let mut out = vec![program, sub];
    out.extend(file_args);
    out.extend(before);
    out.extend(after);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn key_value_and_json_agree() {
        let kv = parse_config("p = 4\n# comment\nmodel = bernoulli  # trailing\n").unwrap();
        let js = parse_config(r#"{"p": 4, "model": "bernoulli", "seed": null}"#).unwrap();
        let mut a = kv.clone();
        let mut b = js.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn file_values_come_first() {
        let dir = std::env::temp_dir().join(format!("majorantlab-config-{}", std::process::id()));
        std::fs::write(&dir, "command = norm\np = 3\nfast = true\nslow = false\n").unwrap();
        let argv = s(&["bin", "--threads", "2", "--config", dir.to_str().unwrap(), "norm", "--p", "4"]);
        let out = expand_args(argv, &["norm"]).unwrap();
        assert_eq!(out, s(&["bin", "norm", "--p", "3", "--fast", "--threads", "2", "--p", "4"]));
        let out = expand_args(s(&["bin", "--config", dir.to_str().unwrap()]), &["norm"]).unwrap();
        assert_eq!(out[1], "norm");
        std::fs::remove_file(dir).unwrap();
    }
}
