//! Optional TOML config file with the same keys as the flags.
//!
//! `radius = 5` or `dim_cap = 50000` at top level; keys are appended as
//! `--radius 5` / `--dim-cap 50000` when the flag is absent from the command
//! line. Arrays become comma lists and `true` booleans bare flags. Unknown
//! keys surface as ordinary clap errors.

use std::fs;

use crate::CliError;

pub fn merge_config(args: &[String]) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = Some(args.get(i + 1).ok_or_else(|| CliError::Usage("--config needs a value".into()))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args.to_vec());
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("--config {path}: {e}")))?;
    let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("--config {path}: {e}")))?;
    let mut out = args.to_vec();
    for (key, value) in &table {
        let flag = format!("--{}", key.replace('_', "-"));
        let present = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        match value {
            toml::Value::Boolean(true) => out.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                out.push(flag);
                out.push(parts.join(","));
            }
            other => {
                out.push(flag);
                out.push(scalar(other)?);
            }
        }
    }
    Ok(out)
}

fn scalar(v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        other => Err(CliError::Usage(format!("unsupported config value {other}"))),
    }
}
