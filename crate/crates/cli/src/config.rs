//! `--config` support: `key = value` lines become flags unless the flag was
//! given on the command line.
//!
//! `#` starts a comment. `z` and `w` take comma-separated lists. A value of
//! `true` turns on a switch such as `machine`; `false` leaves it off.

use std::ffi::OsString;
use std::fs;

const LIST_KEYS: [&str; 2] = ["z", "w"];

fn config_path(argv: &[OsString]) -> Result<Option<OsString>, String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| "--config needs a path".to_string());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

fn has_flag(argv: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let eq = format!("--{key}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&eq)
    })
}

/// Parse config text into `(key, value)` pairs in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Append the config file's flags to `argv`; command-line flags win.
pub fn apply(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "config" || has_flag(&argv, &key) {
            continue;
        }
        let flag = OsString::from(format!("--{key}"));
        match value.as_str() {
            "true" => extra.push(flag),
            "false" => {}
            _ if LIST_KEYS.contains(&key.as_str()) => {
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    extra.push(flag.clone());
                    extra.push(item.into());
                }
            }
            _ => {
                extra.push(flag);
                extra.push(value.into());
            }
        }
    }
    argv.extend(extra);
    Ok(argv)
}
