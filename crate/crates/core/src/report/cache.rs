//! Report cache file: the serialized report plus `schema_version` and a
//! sha256 `checksum` over the canonical compact JSON of everything else.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use super::{sha256_hex, BenchmarkReport};
use crate::error::{CacheError, Result};

pub const CACHE_SCHEMA_VERSION: u64 = 1;

fn payload_digest(map: &serde_json::Map<String, Value>) -> String {
    // serde_json's map is ordered by key, so this is canonical
    sha256_hex(
        serde_json::to_string(map)
            .expect("json value serializes")
            .as_bytes(),
    )
}

/// The cache file contents for `report`.
pub fn encode(report: &BenchmarkReport) -> String {
    let Value::Object(mut map) = serde_json::to_value(report).expect("report serializes") else {
        unreachable!("a struct serializes to an object")
    };
    map.insert("schema_version".into(), CACHE_SCHEMA_VERSION.into());
    let digest = payload_digest(&map);
    map.insert("checksum".into(), digest.into());
    let mut text = serde_json::to_string_pretty(&map).expect("json value serializes");
    text.push('\n');
    text
}

/// Parses and verifies cache file contents.
pub fn decode(text: &str) -> Result<BenchmarkReport> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CacheError::Checksum(format!("unreadable cache ({e})")))?;
    let Value::Object(mut map) = value else {
        return Err(CacheError::Checksum("cache is not a JSON object".into()).into());
    };
    let found = map
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| CacheError::Checksum("missing schema_version".into()))?;
    if found != CACHE_SCHEMA_VERSION {
        return Err(CacheError::VersionMismatch {
            found,
            expected: CACHE_SCHEMA_VERSION,
        }
        .into());
    }
    let stored = match map.remove("checksum") {
        Some(Value::String(s)) => s,
        _ => return Err(CacheError::Checksum("missing checksum".into()).into()),
    };
    let actual = payload_digest(&map);
    if stored != actual {
        return Err(CacheError::Checksum(format!("stored {stored}, computed {actual}")).into());
    }
    map.remove("schema_version");
    Ok(serde_json::from_value(Value::Object(map))?)
}

/// Writes the cache atomically: a sibling temporary file renamed over
/// `path` once fully written.
pub fn cache_save(report: &BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_owned();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(encode(report).as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cache_load(path: impl AsRef<Path>) -> Result<BenchmarkReport> {
    decode(&fs::read_to_string(path)?)
}
