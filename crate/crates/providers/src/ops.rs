use uisuggest_core::{MaskImage, ScreenImage};

use crate::{
    ChatParams, ChatVisionProvider, Completion, EditParams, ImageEditProvider, ProviderError,
};

/// Validates the request, then asks `provider` for a completion.
pub async fn chat_complete(
    provider: &dyn ChatVisionProvider,
    prompt: &str,
    image: &ScreenImage,
    params: &ChatParams,
) -> Result<Completion<String>, ProviderError> {
    if prompt.trim().is_empty() {
        return Err(ProviderError::InvalidRequest("prompt is empty".into()));
    }
    provider.complete(prompt, image, params).await
}

/// Validates mask capability and dimensions, then asks `provider` for an
/// edited image.
pub async fn image_edit(
    provider: &dyn ImageEditProvider,
    prompt: &str,
    image: &ScreenImage,
    mask: Option<&MaskImage>,
    params: &EditParams,
) -> Result<Completion<ScreenImage>, ProviderError> {
    if prompt.trim().is_empty() {
        return Err(ProviderError::InvalidRequest("prompt is empty".into()));
    }
    if let Some(mask) = mask {
        if !provider.supports_mask() {
            return Err(ProviderError::MaskUnsupported(provider.name().to_string()));
        }
        if mask.dims() != image.dims() {
            return Err(ProviderError::MaskDimsMismatch {
                mask: mask.dims(),
                image: image.dims(),
            });
        }
    }
    provider.edit(prompt, image, mask, params).await
}
