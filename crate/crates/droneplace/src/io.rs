//! JSON files and the input digest that binds run records to their inputs.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use droneplace_core::model::{validate_config, validate_scenario};
use droneplace_core::{Scenario, SystemConfig};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let s: Scenario = read_json(path)?;
    let v = validate_scenario(&s);
    if !v.is_empty() {
        anyhow::bail!("invalid scenario {}: {}", path.display(), join(&v));
    }
    Ok(s)
}

/// Load and validate a config file; `None` gives the urban defaults.
pub fn load_config(path: Option<&Path>) -> Result<SystemConfig> {
    let c = match path {
        Some(p) => read_json(p)?,
        None => SystemConfig::urban_default(),
    };
    let v = validate_config(&c);
    if !v.is_empty() {
        anyhow::bail!("invalid config: {}", join(&v));
    }
    Ok(c)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// SHA-256 (hex) over the canonical JSON of every value in `parts`.
pub fn digest(parts: &[&serde_json::Value]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(serde_json::to_vec(p).expect("JSON values always serialize"));
        h.update([0u8]);
    }
    format!("{:x}", h.finalize())
}
