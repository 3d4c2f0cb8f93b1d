//! JSON documents whose embedded images live in sibling PNG files.
//!
//! Images serialize inline as `{format, png_base64}`. On disk each one is
//! replaced by `{format, file}` where `file` is named after its JSON path,
//! e.g. `chosen_suggestion.image.png`.

use std::path::Path;

use base64::Engine as _;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

const INLINE: &str = "png_base64";
const FILE: &str = "file";

fn b64() -> &'static base64::engine::GeneralPurpose {
    &base64::engine::general_purpose::STANDARD
}

/// File name and PNG bytes of one image stored next to a document.
pub type SiblingFile = (String, Vec<u8>);

/// Splits `value` into JSON bytes and the images it references.
pub fn split_document<T: Serialize>(value: &T) -> Result<(Vec<u8>, Vec<SiblingFile>), String> {
    let mut json = serde_json::to_value(value).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    extract(&mut json, "", &mut files)?;
    let bytes = serde_json::to_vec_pretty(&json).map_err(|e| e.to_string())?;
    Ok((bytes, files))
}

fn child(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn extract(v: &mut Value, path: &str, files: &mut Vec<(String, Vec<u8>)>) -> Result<(), String> {
    match v {
        Value::Object(map) => {
            if map.len() == 2 && map.contains_key("format") {
                if let Some(Value::String(data)) = map.remove(INLINE) {
                    let bytes = b64().decode(data).map_err(|e| e.to_string())?;
                    let name = format!("{path}.png");
                    map.insert(FILE.into(), Value::String(name.clone()));
                    files.push((name, bytes));
                    return Ok(());
                }
            }
            for (k, c) in map.iter_mut() {
                extract(c, &child(path, k), files)?;
            }
        }
        Value::Array(items) => {
            for (i, c) in items.iter_mut().enumerate() {
                extract(c, &child(path, &i.to_string()), files)?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// File names referenced by a stored document.
pub fn referenced_files(json: &Value) -> Vec<String> {
    let mut out = Vec::new();
    fn walk(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Object(map) => {
                if let (Some(Value::String(f)), true) = (map.get(FILE), map.contains_key("format")) {
                    out.push(f.clone());
                }
                map.values().for_each(|c| walk(c, out));
            }
            Value::Array(items) => items.iter().for_each(|c| walk(c, out)),
            _ => {}
        }
    }
    walk(json, &mut out);
    out
}

/// Reads `dir/name` and inlines every referenced image.
pub fn read_document<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, String> {
    let path = dir.join(name);
    let text = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut json: Value = serde_json::from_slice(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    inline(&mut json, dir)?;
    serde_json::from_value(json).map_err(|e| format!("{}: {e}", path.display()))
}

fn inline(v: &mut Value, dir: &Path) -> Result<(), String> {
    match v {
        Value::Object(map) => {
            if map.len() == 2 && map.contains_key("format") {
                if let Some(Value::String(file)) = map.get(FILE).cloned() {
                    if file.contains(['/', '\\']) || file.starts_with('.') {
                        return Err(format!("refusing image path {file:?}"));
                    }
                    let bytes = std::fs::read(dir.join(&file)).map_err(|e| format!("{file}: {e}"))?;
                    map.remove(FILE);
                    map.insert(INLINE.into(), Value::String(b64().encode(bytes)));
                    return Ok(());
                }
            }
            for c in map.values_mut() {
                inline(c, dir)?;
            }
        }
        Value::Array(items) => {
            for c in items {
                inline(c, dir)?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// Writes a document and its images into `dir`, images first, each file
/// replaced atomically.
pub fn write_document<T: Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<()> {
    let (json, files) = split_document(value).map_err(std::io::Error::other)?;
    std::fs::create_dir_all(dir)?;
    for (file, bytes) in files {
        uisuggest_core::fsutil::atomic_write(&dir.join(file), &bytes)?;
    }
    uisuggest_core::fsutil::atomic_write(&dir.join(name), &json)
}
