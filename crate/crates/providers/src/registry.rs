use std::collections::BTreeMap;
use std::sync::Arc;

use crate::http::{HttpChatProvider, HttpEditProvider};
use crate::mock::{CallCounter, MockChatProvider, MockEditProvider};
use crate::{ChatVisionProvider, ImageEditProvider, ProviderError, ProviderProfiles};

/// Named providers available to the pipeline.
#[derive(Clone, Default)]
pub struct ProviderRegistry {
    chat: BTreeMap<String, Arc<dyn ChatVisionProvider>>,
    edit: BTreeMap<String, Arc<dyn ImageEditProvider>>,
}

impl ProviderRegistry {
    /// Real HTTP providers for every profile. Credentials are only read when
    /// a provider is called.
    pub fn from_profiles(profiles: &ProviderProfiles) -> Result<Self, ProviderError> {
        let mut reg = Self::default();
        for c in &profiles.chat {
            reg.insert_chat(Arc::new(HttpChatProvider::new(c.clone())?));
        }
        for e in &profiles.edit {
            reg.insert_edit(Arc::new(HttpEditProvider::new(e.clone())?));
        }
        Ok(reg)
    }

    /// Deterministic mocks under the same names and mask capabilities as
    /// `profiles`. Calls are counted into `chat_calls` and `edit_calls`.
    pub fn mock(
        seed: u64,
        profiles: &ProviderProfiles,
        chat_calls: CallCounter,
        edit_calls: CallCounter,
    ) -> Self {
        let mut reg = Self::default();
        for c in &profiles.chat {
            reg.insert_chat(Arc::new(
                MockChatProvider::new(&c.name, seed).with_counter(chat_calls.clone()),
            ));
        }
        for e in &profiles.edit {
            reg.insert_edit(Arc::new(
                MockEditProvider::new(&e.name, seed, e.supports_mask)
                    .with_counter(edit_calls.clone()),
            ));
        }
        reg
    }

    pub fn insert_chat(&mut self, provider: Arc<dyn ChatVisionProvider>) {
        self.chat.insert(provider.name().to_string(), provider);
    }

    pub fn insert_edit(&mut self, provider: Arc<dyn ImageEditProvider>) {
        self.edit.insert(provider.name().to_string(), provider);
    }

    pub fn chat(&self, name: &str) -> Result<Arc<dyn ChatVisionProvider>, ProviderError> {
        self.chat
            .get(name)
            .cloned()
            .ok_or_else(|| ProviderError::UnknownProvider(name.to_string()))
    }

    pub fn edit(&self, name: &str) -> Result<Arc<dyn ImageEditProvider>, ProviderError> {
        self.edit
            .get(name)
            .cloned()
            .ok_or_else(|| ProviderError::UnknownProvider(name.to_string()))
    }

    pub fn chat_names(&self) -> impl Iterator<Item = &str> {
        self.chat.keys().map(String::as_str)
    }

    pub fn edit_names(&self) -> impl Iterator<Item = &str> {
        self.edit.keys().map(String::as_str)
    }
}
