use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uisuggest_core::{RegionMark, Stratum};

use crate::BenchError;

/// The evaluation a task is reserved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    ModelEval,
    MaskEval,
    AblationEval,
}

impl Split {
    /// In the order split sizes are given.
    pub const ALL: [Split; 3] = [Split::ModelEval, Split::MaskEval, Split::AblationEval];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::ModelEval => "model-eval",
            Split::MaskEval => "mask-eval",
            Split::AblationEval => "ablation",
        })
    }
}

impl FromStr for Split {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Split::ALL
            .into_iter()
            .find(|sp| sp.to_string() == s)
            .ok_or_else(|| BenchError::UnknownVariant(s.to_string()))
    }
}

/// One benchmark input: a screenshot, the complaint about it and the region
/// it concerns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTask {
    pub task_id: String,
    pub screenshot_id: String,
    pub image: PathBuf,
    pub feedback: String,
    pub bbox: RegionMark,
    pub stratum: Stratum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}
