//! Config loading: TOML with named includes, profile overlays, environment
//! variable overrides, and a content hash that is stable under key
//! reordering.
//!
//! Merge order (later wins): built-in defaults < profile < included
//! fragments < the config file itself < `RALLYSIM_*` environment variables.

use anyhow::{anyhow, bail, Context, Result};
use rallysim_core::env::EnvConfig;
use rallysim_core::trainer::TrainerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use toml::Value;

/// Environment variable override prefix, e.g.
/// `RALLYSIM_TRAINER__NUM_DIRECTIONS=64`.
pub const ENV_PREFIX: &str = "RALLYSIM_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub trainer: TrainerConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate().map_err(|e| anyhow!("env config: {e}"))?;
        self.trainer.validate().map_err(|e| anyhow!("trainer config: {e}"))?;
        Ok(())
    }

    /// Content hash of the canonical (struct-ordered) serialization; input
    /// key order cannot affect it.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex::encode(&h.finalize()[..8])
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serialize config")
    }
}

/// Deep-merge `overlay` onto `base` (tables merge recursively, everything
/// else is replaced).
pub fn merge_value(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Built-in fragments addressable as `preset:<name>` in include lists.
pub fn builtin_preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "desk" => include_str!("../../../configs/profiles/desk.toml"),
        "paper" => include_str!("../../../configs/profiles/paper.toml"),
        "reference" => include_str!("../../../configs/reference.toml"),
        _ => return None,
    })
}

fn load_fragment(spec: &str, base_dir: &Path, depth: usize) -> Result<Value> {
    if depth > 8 {
        bail!("include depth exceeded (cycle?)");
    }
    let text;
    let dir;
    if let Some(name) = spec.strip_prefix("preset:") {
        text = builtin_preset(name)
            .ok_or_else(|| anyhow!("unknown preset `{name}`"))?
            .to_string();
        dir = base_dir.to_path_buf();
    } else {
        let path = base_dir.join(spec);
        text = std::fs::read_to_string(&path)
            .with_context(|| format!("read include {}", path.display()))?;
        dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    }
    parse_with_includes(&text, &dir, depth)
}

fn parse_with_includes(text: &str, dir: &Path, depth: usize) -> Result<Value> {
    let mut value: Value = text.parse().context("parse TOML")?;
    let includes: Vec<String> = match value.get("include") {
        Some(Value::Array(list)) => list
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| anyhow!("include entries must be strings"))
            })
            .collect::<Result<_>>()?,
        Some(Value::String(s)) => vec![s.clone()],
        Some(_) => bail!("include must be a string or array of strings"),
        None => Vec::new(),
    };
    if let Value::Table(t) = &mut value {
        t.remove("include");
    }
    let mut merged = Value::Table(Default::default());
    for inc in includes {
        let frag = load_fragment(&inc, dir, depth + 1)?;
        merge_value(&mut merged, &frag);
    }
    merge_value(&mut merged, &value);
    Ok(merged)
}

/// Environment variable overrides: `RALLYSIM_A__B_C=value` sets `a.b_c`.
/// Values parse as TOML scalars, falling back to strings.
fn env_overrides() -> Value {
    let mut root = Value::Table(Default::default());
    let mut vars: Vec<(String, String)> = std::env::vars()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX) && k.len() > ENV_PREFIX.len())
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_lowercase())
            .collect();
        // Values are TOML scalars/arrays; anything unparseable is a string.
        let parsed: Value = format!("v = {raw}")
            .parse::<Value>()
            .ok()
            .and_then(|doc| doc.get("v").cloned())
            .unwrap_or(Value::String(raw.clone()));
        let mut cursor = &mut root;
        let (last, parents) = path.split_last().expect("non-empty path");
        for part in parents {
            let slot = cursor
                .as_table_mut()
                .expect("tables by construction")
                .entry(part.clone())
                .or_insert_with(|| Value::Table(Default::default()));
            if !slot.is_table() {
                *slot = Value::Table(Default::default());
            }
            cursor = slot;
        }
        cursor
            .as_table_mut()
            .expect("tables by construction")
            .insert(last.clone(), parsed.clone());
    }
    root
}

/// Load a run config: defaults, optional profile, optional file, env vars.
pub fn load_run_config(path: Option<&Path>, profile: Option<&str>) -> Result<RunConfig> {
    let mut merged = Value::try_from(RunConfig::default()).context("defaults to TOML")?;
    if let Some(p) = profile {
        let frag = load_fragment(&format!("preset:{p}"), Path::new("."), 0)?;
        merge_value(&mut merged, &frag);
    }
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("read config {}", path.display()))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let file_value = parse_with_includes(&text, &dir, 0)?;
        merge_value(&mut merged, &file_value);
    }
    merge_value(&mut merged, &env_overrides());
    let cfg: RunConfig = merged.try_into().context("config does not match the schema")?;
    cfg.validate()?;
    Ok(cfg)
}

/// Apply a TOML overlay (e.g. a study variant) onto a config.
pub fn apply_overrides(cfg: &RunConfig, overrides: &Value) -> Result<RunConfig> {
    let mut value = Value::try_from(cfg.clone()).context("config to TOML")?;
    merge_value(&mut value, overrides);
    let out: RunConfig = value.try_into().context("overridden config invalid")?;
    out.validate()?;
    Ok(out)
}

pub fn write_config_copy(cfg: &RunConfig, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml_string()?)?;
    Ok(path)
}
