//! Blinded annotation bundles.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uisuggest_core::fsutil::atomic_write;
use uisuggest_core::geometry::COMPARISON_ASPECT;
use uisuggest_core::{compose_marked_overlay, pad_to_aspect, ScreenImage};

use crate::run::{completed_cells, image_path, load_task_image};
use crate::{BenchError, BenchTask};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const KEY_FILE: &str = "key.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleCandidate {
    pub label: String,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleTask {
    pub task_id: String,
    pub feedback: String,
    pub original: String,
    pub marked: String,
    pub candidates: Vec<BundleCandidate>,
}

/// What annotators see. Carries no variant or provider identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub tasks: Vec<BundleTask>,
}

/// Sealed mapping from labels back to variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleKey {
    pub seed: u64,
    /// task id -> label -> variant label.
    pub tasks: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn label(i: usize) -> String {
    let mut s = String::new();
    let mut i = i;
    loop {
        s.insert(0, (b'A' + (i % 26) as u8) as char);
        if i < 26 {
            return s;
        }
        i = i / 26 - 1;
    }
}

/// Seeded per-task order, independent of which other tasks are bundled.
pub fn label_permutation(seed: u64, task_id: &str, variants: &[String]) -> Vec<String> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(task_id.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let mut order = variants.to_vec();
    order.sort();
    order.shuffle(&mut rng);
    order
}

fn write_png(path: &Path, img: &ScreenImage) -> Result<(), BenchError> {
    atomic_write(path, &img.encode_png()).map_err(BenchError::io(path))
}

/// Writes `manifest.json`, `key.json` and padded images under `bundle_dir`
/// for every task, from the run outputs in `outputs_dir`.
pub fn build_blinded_bundle(
    tasks: &[BenchTask],
    outputs_dir: &Path,
    bundle_dir: &Path,
    seed: u64,
) -> Result<BundleManifest, BenchError> {
    let mut tasks: Vec<&BenchTask> = tasks.iter().collect();
    tasks.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    let mut manifest = BundleManifest { tasks: Vec::new() };
    let mut key = BundleKey {
        seed,
        tasks: BTreeMap::new(),
    };
    for task in tasks {
        let cells = completed_cells(outputs_dir, &task.task_id)?;
        if cells.len() < 2 {
            return Err(BenchError::MissingOutputs(task.task_id.clone()));
        }
        let variants: Vec<String> = cells.iter().map(|c| c.variant.label.clone()).collect();
        let order = label_permutation(seed, &task.task_id, &variants);

        let dir = bundle_dir.join("images").join(&task.task_id);
        let rel = |name: &str| format!("images/{}/{name}", task.task_id);
        let original = load_task_image(task).map_err(BenchError::Invalid)?;
        write_png(&dir.join("original.png"), &pad_to_aspect(&original, COMPARISON_ASPECT))?;
        let marked = compose_marked_overlay(&original, &task.bbox)
            .map_err(|e| BenchError::Invalid(e.to_string()))?;
        write_png(&dir.join("marked.png"), &pad_to_aspect(&marked, COMPARISON_ASPECT))?;

        let mut candidates = Vec::new();
        let mut labels = BTreeMap::new();
        for (i, variant) in order.iter().enumerate() {
            let l = label(i);
            let src = image_path(outputs_dir, &task.task_id, variant);
            let bytes = fs::read(&src).map_err(BenchError::io(&src))?;
            let img = ScreenImage::decode(&bytes).map_err(|e| BenchError::Invalid(e.to_string()))?;
            let name = format!("{l}.png");
            write_png(&dir.join(&name), &pad_to_aspect(&img, COMPARISON_ASPECT))?;
            candidates.push(BundleCandidate {
                label: l.clone(),
                image: rel(&name),
            });
            labels.insert(l, variant.clone());
        }
        key.tasks.insert(task.task_id.clone(), labels);
        manifest.tasks.push(BundleTask {
            task_id: task.task_id.clone(),
            feedback: task.feedback.clone(),
            original: rel("original.png"),
            marked: rel("marked.png"),
            candidates,
        });
    }
    crate::io::write_json(&bundle_dir.join(KEY_FILE), &key)?;
    crate::io::write_json(&bundle_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(label(0), "A");
        assert_eq!(label(3), "D");
        assert_eq!(label(25), "Z");
        assert_eq!(label(26), "AA");
    }

    #[test]
    fn permutation_is_seeded_and_per_task() {
        let v: Vec<String> = ["w", "x", "y", "z"].map(String::from).to_vec();
        assert_eq!(label_permutation(1, "t1", &v), label_permutation(1, "t1", &v));
        let mut rev = v.clone();
        rev.reverse();
        assert_eq!(label_permutation(1, "t1", &v), label_permutation(1, "t1", &rev));
        let distinct: std::collections::HashSet<_> =
            (0..50).map(|i| label_permutation(1, &format!("t{i}"), &v)).collect();
        assert!(distinct.len() > 10);
    }
}
