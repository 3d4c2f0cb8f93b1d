//! Resumable execution of the task x variant matrix.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::OnceCell;
use uisuggest_core::fsutil::atomic_write;
use uisuggest_core::{Modification, Provenance, ScreenImage, SuggestionId};
use uisuggest_pipeline::{
    no_progress, realize_specs, suggest_specs, GenerationConfig, GenerationInput, MaskPolicy,
    SpecOutcome,
};
use uisuggest_providers::ProviderRegistry;

use crate::io::{read_json, write_json};
use crate::{BenchError, BenchTask, PlannedTask, RunVariant};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    /// Cells in flight at once.
    pub workers: usize,
    /// Chat provider, temperature, parse retries and edit params; `n`,
    /// mask policy and ablation are set per cell.
    pub generation: GenerationConfig,
}

/// What is stored next to each output image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub task_id: String,
    pub variant: RunVariant,
    pub suggestion_id: SuggestionId,
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Modification>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub task_id: String,
    pub variant: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub executed: usize,
    pub cached: usize,
    pub failed: Vec<CellError>,
}

pub fn image_path(out_dir: &Path, task_id: &str, variant: &str) -> PathBuf {
    out_dir.join(task_id).join(format!("{variant}.png"))
}

pub fn record_path(out_dir: &Path, task_id: &str, variant: &str) -> PathBuf {
    out_dir.join(task_id).join(format!("{variant}.provenance.json"))
}

pub fn sg_path(out_dir: &Path, task_id: &str) -> PathBuf {
    out_dir.join(task_id).join("sg.json")
}

pub const ERROR_LEDGER: &str = "errors.json";

/// Completed cells for `task_id`, read from their provenance files.
pub fn completed_cells(out_dir: &Path, task_id: &str) -> Result<Vec<CellRecord>, BenchError> {
    let dir = out_dir.join(task_id);
    let Ok(entries) = fs::read_dir(&dir) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for e in entries {
        let p = e.map_err(BenchError::io(&dir))?.path();
        if p.to_string_lossy().ends_with(".provenance.json") {
            out.push(read_json::<CellRecord>(&p)?);
        }
    }
    out.sort_by(|a, b| a.variant.label.cmp(&b.variant.label));
    Ok(out)
}

pub fn load_task_image(task: &BenchTask) -> Result<ScreenImage, String> {
    let bytes = fs::read(&task.image).map_err(|e| format!("{}: {e}", task.image.display()))?;
    ScreenImage::decode(&bytes).map_err(|e| format!("{}: {e}", task.image.display()))
}

/// Lazily shared per-task inputs.
#[derive(Default)]
struct TaskState {
    image: OnceCell<Result<ScreenImage, String>>,
    sg: OnceCell<Result<SpecOutcome, String>>,
}

async fn shared_spec(
    state: &TaskState,
    task: &BenchTask,
    image: &ScreenImage,
    registry: &ProviderRegistry,
    config: &RunConfig,
) -> Result<SpecOutcome, String> {
    state
        .sg
        .get_or_init(|| async {
            let path = sg_path(&config.out_dir, &task.task_id);
            if path.exists() {
                return read_json::<SpecOutcome>(&path).map_err(|e| e.to_string());
            }
            let chat = registry
                .chat(&config.generation.chat_provider)
                .map_err(|e| e.to_string())?;
            let spec = suggest_specs(chat.as_ref(), image, &task.feedback, 1, &config.generation)
                .await
                .map_err(|e| e.to_string())?;
            write_json(&path, &spec).map_err(|e| e.to_string())?;
            Ok(spec)
        })
        .await
        .clone()
}

async fn run_cell(
    state: &TaskState,
    task: &BenchTask,
    variant: &RunVariant,
    registry: &ProviderRegistry,
    config: &RunConfig,
) -> Result<(), String> {
    let image = state
        .image
        .get_or_init(|| async { load_task_image(task) })
        .await
        .clone()?;
    let spec = if variant.use_sg {
        Some(shared_spec(state, task, &image, registry, config).await?)
    } else {
        None
    };
    let gen = GenerationConfig {
        n: 1,
        mask_policy: if variant.use_mask { MaskPolicy::Always } else { MaskPolicy::Never },
        ablation_no_sg: !variant.use_sg,
        edit_provider: variant.edit_provider.clone(),
        ..config.generation.clone()
    };
    let edit = registry.edit(&variant.edit_provider).map_err(|e| e.to_string())?;
    let input = GenerationInput {
        screenshot: &image,
        feedback: &task.feedback,
        mark: Some(&task.bbox),
        parent: None,
    };
    let mut out = realize_specs(edit.as_ref(), input, spec.as_ref(), &gen, &no_progress)
        .await
        .map_err(|e| e.to_string())?;
    let s = out.remove(0);

    let img_path = image_path(&config.out_dir, &task.task_id, &variant.label);
    atomic_write(&img_path, &s.image.encode_png()).map_err(|e| e.to_string())?;
    // The provenance file marks the cell complete, so it is written last.
    let record = CellRecord {
        task_id: task.task_id.clone(),
        variant: variant.clone(),
        suggestion_id: s.id,
        image: format!("{}.png", variant.label),
        spec: s.spec,
        provenance: s.provenance,
    };
    write_json(&record_path(&config.out_dir, &task.task_id, &variant.label), &record)
        .map_err(|e| e.to_string())
}

/// Generates every missing (task, variant) cell. Cells with a provenance
/// file are skipped; failed cells are reported and left missing so a rerun
/// retries them. Tasks share one suggestion-generation answer across their
/// variants, cached in `sg.json`.
pub async fn run_matrix(
    plan: &[PlannedTask],
    registry: &ProviderRegistry,
    config: &RunConfig,
) -> Result<RunReport, BenchError> {
    fs::create_dir_all(&config.out_dir).map_err(BenchError::io(&config.out_dir))?;
    let states: HashMap<&str, TaskState> = plan
        .iter()
        .map(|p| (p.task.task_id.as_str(), TaskState::default()))
        .collect();

    let mut report = RunReport::default();
    let mut pending = Vec::new();
    for p in plan {
        for v in &p.variants {
            if record_path(&config.out_dir, &p.task.task_id, &v.label).exists() {
                report.cached += 1;
            } else {
                pending.push((&p.task, v));
            }
        }
    }

    let results: Vec<_> = stream::iter(pending)
        .map(|(task, variant)| {
            let state = &states[task.task_id.as_str()];
            async move {
                let r = run_cell(state, task, variant, registry, config).await;
                if let Err(e) = &r {
                    tracing::warn!(task = %task.task_id, variant = %variant.label, error = %e, "cell failed");
                }
                (task, variant, r)
            }
        })
        .buffer_unordered(config.workers.max(1))
        .collect()
        .await;

    for (task, variant, r) in results {
        match r {
            Ok(()) => report.executed += 1,
            Err(error) => report.failed.push(CellError {
                task_id: task.task_id.clone(),
                variant: variant.label.clone(),
                error,
            }),
        }
    }
    report.failed.sort_by(|a, b| (&a.task_id, &a.variant).cmp(&(&b.task_id, &b.variant)));
    write_json(&config.out_dir.join(ERROR_LEDGER), &report.failed)?;
    Ok(report)
}
