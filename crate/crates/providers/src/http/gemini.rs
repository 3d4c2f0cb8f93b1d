use serde_json::{json, Value};
use uisuggest_core::ScreenImage;

use super::{decode_base64_image, png_base64, send_json, Transport};
use crate::{EditParams, ProviderError};

pub(super) async fn image_edit(
    t: &Transport,
    credential: String,
    prompt: &str,
    image: &ScreenImage,
    params: &EditParams,
) -> Result<ScreenImage, ProviderError> {
    let mut generation_config = json!({ "responseModalities": ["TEXT", "IMAGE"] });
    for (k, v) in params {
        generation_config[k] = v.clone();
    }
    let body = json!({
        "contents": [{
            "role": "user",
            "parts": [
                { "text": prompt },
                { "inline_data": { "mime_type": "image/png", "data": png_base64(image) } },
            ],
        }],
        "generationConfig": generation_config,
    });
    let v = send_json(
        t.client
            .post(t.url(&format!("models/{}:generateContent", t.config.model_id)))
            .header("x-goog-api-key", credential)
            .json(&body),
    )
    .await?;
    let parts = v
        .pointer("/candidates/0/content/parts")
        .and_then(Value::as_array)
        .ok_or_else(|| ProviderError::BadResponse("no candidate parts in response".into()))?;
    let data = parts
        .iter()
        .find_map(|p| {
            p.get("inlineData")
                .or_else(|| p.get("inline_data"))
                .and_then(|d| d.get("data"))
                .and_then(Value::as_str)
        })
        .ok_or_else(|| ProviderError::BadResponse("response contains no image part".into()))?;
    decode_base64_image(data)
}
