use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uisuggest_pipeline::GenerationConfig;
use uisuggest_providers::{builtin_profiles, ProviderProfiles};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub max_upload_bytes: usize,
    pub max_comment_chars: usize,
    /// Generation jobs running at once.
    pub workers: usize,
    /// Abandoned-session snapshots older than this are pruned at startup.
    pub retention_days: u32,
    /// Blinded annotation bundle served under `/bundle`.
    pub bundle_dir: Option<PathBuf>,
    pub generation: GenerationConfig,
    /// Merged over the built-in profiles by name.
    pub providers: ProviderProfiles,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            max_upload_bytes: 20 * 1024 * 1024,
            max_comment_chars: 2000,
            workers: 4,
            retention_days: 90,
            bundle_dir: None,
            generation: GenerationConfig::default(),
            providers: ProviderProfiles::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        let config: Self = toml::from_str(text).map_err(|e| ServiceError::Internal(format!("config: {e}")))?;
        config
            .generation
            .validate()
            .map_err(|e| ServiceError::Internal(format!("config: {e}")))?;
        Ok(config)
    }

    /// Reads a TOML config file; relative directories resolve against the
    /// file's location.
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Internal(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.data_dir.is_relative() {
            config.data_dir = base.join(&config.data_dir);
        }
        if let Some(b) = config.bundle_dir.as_mut().filter(|b| b.is_relative()) {
            *b = base.join(&*b);
        }
        Ok(config)
    }

    pub fn profiles(&self) -> ProviderProfiles {
        let mut p = builtin_profiles();
        p.merge(self.providers.clone());
        p
    }
}
