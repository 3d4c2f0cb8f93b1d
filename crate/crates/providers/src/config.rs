use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{ProviderError, RetryPolicy};

/// Wire protocol spoken by a provider endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    /// `POST {endpoint}/chat/completions` with an inline image part.
    OpenaiChat,
    /// `POST {endpoint}/images/edits`, multipart, optional alpha mask.
    OpenaiImageEdit,
    /// `POST {endpoint}/models/{model}:generateContent`.
    Gemini,
    /// `POST {endpoint}/models/{owner}/{name}/predictions`.
    Replicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub kind: ProviderKind,
    pub endpoint: String,
    /// Environment variable holding the credential. Read at call time.
    pub credential_env_var: String,
    pub model_id: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default)]
    pub rate_limit_per_minute: u32,
    #[serde(default)]
    pub supports_mask: bool,
}

fn default_timeout() -> u64 {
    120
}

impl ProviderConfig {
    pub fn credential(&self) -> Result<String, ProviderError> {
        match std::env::var(&self.credential_env_var) {
            Ok(v) if !v.trim().is_empty() => Ok(v),
            _ => Err(ProviderError::AuthFailure(format!(
                "environment variable {} is not set",
                self.credential_env_var
            ))),
        }
    }
}

/// Chat and edit provider profiles, as found in a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfiles {
    #[serde(default)]
    pub chat: Vec<ProviderConfig>,
    #[serde(default)]
    pub edit: Vec<ProviderConfig>,
}

impl ProviderProfiles {
    pub fn chat(&self, name: &str) -> Option<&ProviderConfig> {
        self.chat.iter().find(|c| c.name == name)
    }

    pub fn edit(&self, name: &str) -> Option<&ProviderConfig> {
        self.edit.iter().find(|c| c.name == name)
    }

    /// Profiles in `other` replace same-named ones here; new ones are added.
    pub fn merge(&mut self, other: ProviderProfiles) {
        fn merge_list(into: &mut Vec<ProviderConfig>, from: Vec<ProviderConfig>) {
            for p in from {
                match into.iter_mut().find(|q| q.name == p.name) {
                    Some(slot) => *slot = p,
                    None => into.push(p),
                }
            }
        }
        merge_list(&mut self.chat, other.chat);
        merge_list(&mut self.edit, other.edit);
    }
}

const BUILTIN_PROFILES: &str = include_str!("../profiles.toml");

/// The shipped profiles: one chat model and four image-edit models.
pub fn builtin_profiles() -> ProviderProfiles {
    toml::from_str(BUILTIN_PROFILES).expect("built-in provider profiles are valid TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles_parse() {
        let p = builtin_profiles();
        assert_eq!(p.chat.len(), 1);
        let names: Vec<_> = p.edit.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(
            names,
            ["gpt-image-1", "flux-kontext-max", "gemini-2.0-flash", "bagel"]
        );
        let masked: Vec<_> = p
            .edit
            .iter()
            .filter(|e| e.supports_mask)
            .map(|e| e.name.as_str())
            .collect();
        assert_eq!(masked, ["gpt-image-1"]);
        assert_eq!(p.edit("gpt-image-1").unwrap().params["quality"], "high");
        assert_eq!(
            p.edit("flux-kontext-max").unwrap().params["aspect_ratio"],
            "match_input_image"
        );
        assert_eq!(p.edit("bagel").unwrap().params["enable_thinking"], true);
    }

    #[test]
    fn serialized_profiles_carry_no_secret() {
        std::env::set_var("UISUGGEST_TEST_SECRET", "sk-very-secret");
        let mut p = builtin_profiles();
        p.chat[0].credential_env_var = "UISUGGEST_TEST_SECRET".into();
        assert_eq!(p.chat[0].credential().unwrap(), "sk-very-secret");
        let json = serde_json::to_string(&p).unwrap();
        let toml = toml::to_string(&p).unwrap();
        assert!(!json.contains("sk-very-secret"));
        assert!(!toml.contains("sk-very-secret"));
    }

    #[test]
    fn missing_credential_is_auth_failure() {
        let mut p = builtin_profiles().chat.remove(0);
        p.credential_env_var = "UISUGGEST_DEFINITELY_UNSET".into();
        assert!(matches!(p.credential(), Err(ProviderError::AuthFailure(_))));
    }

    #[test]
    fn merge_replaces_by_name() {
        let mut base = builtin_profiles();
        let mut over = ProviderProfiles::default();
        let mut flux = base.edit("flux-kontext-max").unwrap().clone();
        flux.rate_limit_per_minute = 1;
        over.edit.push(flux);
        base.merge(over);
        assert_eq!(base.edit.len(), 4);
        assert_eq!(base.edit("flux-kontext-max").unwrap().rate_limit_per_minute, 1);
    }
}
