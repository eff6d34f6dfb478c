//! Flat `key=value` config files whose keys mirror the long flag names.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

/// Turns a config file into flag tokens, e.g. `T = 100` into `-T 100` and
/// `problem=quartic1d` into `--problem quartic1d`. Blank lines and lines
/// starting with `#` are skipped.
pub fn config_tokens(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got {raw:?}", n + 1)))?;
        let key = key.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("line {}: invalid key {key:?}", n + 1)));
        }
        let flag = if key.chars().count() == 1 {
            format!("-{key}")
        } else {
            format!("--{key}")
        };
        out.push(flag.into());
        out.push(value.trim().into());
    }
    Ok(out)
}

/// `argv` with the tokens of the `--config` file, if any, inserted right after
/// the subcommand so that later command-line flags override them.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut iter = argv.iter().enumerate().skip(2);
    while let Some((_, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(|(_, v)| v.clone());
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(v.into());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let tokens = config_tokens(&text)?;
    let mut out = argv[..2].to_vec();
    out.extend(tokens);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}
