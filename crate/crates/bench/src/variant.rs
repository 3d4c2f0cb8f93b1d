use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uisuggest_providers::ProviderProfiles;

use crate::{BenchError, BenchTask};

/// One generation condition of the run matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunVariant {
    pub label: String,
    pub edit_provider: String,
    pub use_mask: bool,
    pub use_sg: bool,
}

impl RunVariant {
    pub fn new(edit_provider: &str, use_mask: bool, use_sg: bool) -> Self {
        let mut label = edit_provider.to_string();
        if use_mask {
            label.push_str("-mask");
        }
        if !use_sg {
            label.push_str("-no-sg");
        }
        Self {
            label,
            edit_provider: edit_provider.to_string(),
            use_mask,
            use_sg,
        }
    }

    /// The edit provider must exist and, for masked variants, accept masks.
    pub fn validate(&self, profiles: &ProviderProfiles) -> Result<(), BenchError> {
        let p = profiles
            .edit(&self.edit_provider)
            .ok_or_else(|| BenchError::UnknownVariant(self.edit_provider.clone()))?;
        if self.use_mask && !p.supports_mask {
            return Err(BenchError::Invalid(format!(
                "variant {} masks but {} does not accept masks",
                self.label, self.edit_provider
            )));
        }
        if self.label.is_empty() || self.label.contains(['/', '\\']) || self.label.starts_with('.') {
            return Err(BenchError::Invalid(format!("unusable variant label {:?}", self.label)));
        }
        Ok(())
    }
}

/// Parses `provider[+mask][+no-sg]` items separated by commas.
pub fn parse_variants(spec: &str) -> Result<Vec<RunVariant>, BenchError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let mut parts = item.split('+');
            let provider = parts.next().unwrap_or_default();
            let (mut mask, mut sg) = (false, true);
            for flag in parts {
                match flag {
                    "mask" => mask = true,
                    "no-sg" => sg = false,
                    other => return Err(BenchError::UnknownVariant(format!("{item} ({other})"))),
                }
            }
            Ok(RunVariant::new(provider, mask, sg))
        })
        .collect()
}

/// A task with the variants to generate for it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedTask {
    pub task: BenchTask,
    pub variants: Vec<RunVariant>,
}

/// The three evaluations of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Four edit models, unmasked, with suggestion generation.
    ModelEval,
    /// The mask-capable model with and without its mask.
    MaskEval,
    /// With and without suggestion generation: the first half of the tasks
    /// unmasked, the second half masked.
    Ablation,
}

impl Preset {
    pub fn plan(self, tasks: &[BenchTask]) -> Vec<PlannedTask> {
        let mut tasks = tasks.to_vec();
        tasks.sort_by(|a, b| a.task_id.cmp(&b.task_id));
        let half = tasks.len().div_ceil(2);
        tasks
            .into_iter()
            .enumerate()
            .map(|(i, task)| {
                let variants = match self {
                    Preset::ModelEval => ["gpt-image-1", "flux-kontext-max", "gemini-2.0-flash", "bagel"]
                        .into_iter()
                        .map(|p| RunVariant::new(p, false, true))
                        .collect(),
                    Preset::MaskEval => vec![
                        RunVariant::new("gpt-image-1", true, true),
                        RunVariant::new("gpt-image-1", false, true),
                    ],
                    Preset::Ablation => {
                        let mask = i >= half;
                        vec![
                            RunVariant::new("gpt-image-1", mask, true),
                            RunVariant::new("gpt-image-1", mask, false),
                        ]
                    }
                };
                PlannedTask { task, variants }
            })
            .collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::ModelEval => "model-eval",
            Preset::MaskEval => "mask-eval",
            Preset::Ablation => "ablation",
        })
    }
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        [Preset::ModelEval, Preset::MaskEval, Preset::Ablation]
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| BenchError::UnknownVariant(s.to_string()))
    }
}
