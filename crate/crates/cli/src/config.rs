//! Parameter resolution: config file first, then flags on top.
//!
//! A config is either an INI file (keys in the general section, optionally
//! overridden by a section named after the command) or a previous output
//! file, whose embedded manifest is replayed.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{CliError, CliResult};
use crate::output::{MANIFEST_MARKER, META_KEYS};

pub const COMMON_KEYS: &[&str] = &[
    "n", "chi-t", "c", "sigma2", "x", "j", "dt", "engine", "n-traj", "seed", "threads", "out", "format",
    "budget",
];

pub fn command_keys(command: &str) -> &'static [&'static str] {
    match command {
        "pdf" => &["c-min", "c-max", "c-step"],
        "husimi" => &["stage", "n-theta", "n-phi"],
        "sweep" => &["protocol", "axis", "values", "from", "to", "step"],
        _ => &[],
    }
}

/// Effective key/value parameters for one command.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    command: String,
    values: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn resolve(
        command: &str,
        config: Option<&Path>,
        flags: Vec<(&'static str, Option<String>)>,
    ) -> CliResult<Self> {
        let mut values = match config {
            Some(path) => load_config(path, command)?,
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        let known: Vec<&str> = COMMON_KEYS.iter().chain(command_keys(command)).copied().collect();
        for k in values.keys() {
            if !known.contains(&k.as_str()) {
                return Err(CliError::usage(format!("unknown parameter `{k}` for {command}")));
            }
        }
        Ok(Self {
            command: command.to_string(),
            values,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("invalid value `{v}` for --{key}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::usage(format!("missing required --{key}")))
    }

    pub fn list(&self, key: &str) -> CliResult<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("invalid value `{s}` in --{key}")))
                })
                .collect(),
        }
    }

    /// At most one value of a list-capable key.
    pub fn single(&self, key: &str) -> CliResult<Option<f64>> {
        let v = self.list(key)?;
        match v.len() {
            0 => Ok(None),
            1 => Ok(Some(v[0])),
            _ => Err(CliError::usage(format!(
                "--{key} takes a single value for {}",
                self.command
            ))),
        }
    }
}

fn load_config(path: &Path, command: &str) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return from_json_manifest(trimmed, command);
    }
    if trimmed.starts_with(MANIFEST_MARKER) {
        return from_csv_manifest(trimmed, command);
    }
    let ini = Ini::load_from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for section in [None, Some(command)] {
        if let Some(props) = ini.section(section) {
            for (k, v) in props.iter() {
                out.insert(normalize_key(k), v.trim().to_string());
            }
        }
    }
    Ok(out)
}

fn check_command(found: Option<&str>, command: &str) -> CliResult<()> {
    match found {
        Some(c) if c != command => Err(CliError::usage(format!(
            "manifest was written by `{c}`, not `{command}`"
        ))),
        _ => Ok(()),
    }
}

fn from_csv_manifest(text: &str, command: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut found = None;
    for line in text.lines().skip(1) {
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        let Some((k, v)) = body.split_once('=') else {
            continue;
        };
        let (k, v) = (normalize_key(k), v.trim().to_string());
        if k == "command" {
            found = Some(v);
        } else if !META_KEYS.contains(&k.as_str()) {
            out.insert(k, v);
        }
    }
    check_command(found.as_deref(), command)?;
    Ok(out)
}

fn from_json_manifest(text: &str, command: &str) -> CliResult<BTreeMap<String, String>> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("cannot parse manifest: {e}")))?;
    let manifest = doc
        .get("manifest")
        .ok_or_else(|| CliError::usage("JSON config has no `manifest` object"))?;
    check_command(manifest.get("command").and_then(|v| v.as_str()), command)?;
    let mut out = BTreeMap::new();
    if let Some(params) = manifest.get("params").and_then(|p| p.as_object()) {
        for (k, v) in params {
            let v = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.insert(normalize_key(k), v);
        }
    }
    Ok(out)
}
