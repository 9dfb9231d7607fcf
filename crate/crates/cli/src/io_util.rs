//! Output plumbing: scenario resolution, deterministic file writing and
//! the metadata sidecar.

use crate::CliError;
use ionlink_core::scenario::Scenario;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const SCENARIO_DIR_ENV: &str = "IONLINK_SCENARIO_DIR";

/// Resolve a scenario by built-in name, explicit path, or file in the
/// directory named by `IONLINK_SCENARIO_DIR`.
pub fn resolve_scenario(spec: &str) -> Result<Scenario, CliError> {
    if let Some(sc) = Scenario::builtin(spec) {
        return Ok(sc);
    }
    let candidate = PathBuf::from(spec);
    let path = if candidate.exists() {
        Some(candidate)
    } else {
        std::env::var(SCENARIO_DIR_ENV)
            .ok()
            .map(|dir| Path::new(&dir).join(format!("{spec}.json")))
            .filter(|p| p.exists())
    };
    let Some(path) = path else {
        return Err(CliError::Config(format!(
            "unknown scenario `{spec}`: not a built-in ({}), not a file, and not found under ${SCENARIO_DIR_ENV}",
            Scenario::builtin_names().join(", ")
        )));
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let sc: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Config(format!(
            "malformed scenario {} at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })?;
    sc.validate()
        .map_err(|e| CliError::Config(format!("invalid scenario {}: {e}", path.display())))?;
    Ok(sc)
}

/// FNV-1a 64-bit hash, hex encoded; used to fingerprint scenario content.
pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

pub fn scenario_hash(sc: &Scenario) -> String {
    let canonical = serde_json::to_string(sc).expect("scenario serializes");
    fnv1a64(canonical.as_bytes())
}

#[derive(Serialize)]
pub struct Sidecar<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub scenario: Option<&'a str>,
    pub scenario_hash: Option<String>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<T>,
}

/// Write `content` to `out` (or stdout when absent). With a file target a
/// `<out>.meta.json` sidecar records the invocation metadata.
pub fn emit<T: Serialize>(
    out: Option<&Path>,
    content: &str,
    sidecar: &Sidecar<'_, T>,
) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            let meta_path = sidecar_path(path);
            let meta = serde_json::to_string_pretty(sidecar)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            std::fs::write(&meta_path, meta + "\n").map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", meta_path.display()))
            })?;
            Ok(())
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}
