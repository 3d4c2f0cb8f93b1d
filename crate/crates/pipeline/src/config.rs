use serde::{Deserialize, Serialize};
use uisuggest_providers::EditParams;

use crate::{GenerationError, MaskPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub n: u32,
    pub mask_policy: MaskPolicy,
    pub mask_auto_threshold: f64,
    /// Skip suggestion generation and edit straight from the feedback.
    pub ablation_no_sg: bool,
    pub chat_provider: String,
    pub edit_provider: String,
    /// Extra chat attempts when the answer cannot be parsed.
    pub parse_retries: u32,
    pub temperature: f64,
    /// Per-call overrides on top of the edit profile's params.
    pub edit_params: EditParams,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            n: 3,
            mask_policy: MaskPolicy::Auto,
            mask_auto_threshold: 0.20,
            ablation_no_sg: false,
            chat_provider: "gpt-4o".into(),
            edit_provider: "gpt-image-1".into(),
            parse_retries: 2,
            temperature: 1.0,
            edit_params: EditParams::new(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.n == 0 {
            return Err(GenerationError::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.mask_auto_threshold > 0.0 && self.mask_auto_threshold <= 1.0) {
            return Err(GenerationError::InvalidConfig(format!(
                "mask_auto_threshold {} is outside (0, 1]",
                self.mask_auto_threshold
            )));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(GenerationError::InvalidConfig(format!(
                "temperature {} is invalid",
                self.temperature
            )));
        }
        Ok(())
    }
}
