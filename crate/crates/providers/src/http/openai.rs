use reqwest::multipart::{Form, Part};
use serde_json::{json, Value};
use uisuggest_core::{MaskImage, ScreenImage};

use super::{alpha_mask_png, decode_base64_image, png_data_url, send_json, Transport};
use crate::{ChatParams, EditParams, ProviderError};

pub(super) async fn chat(
    t: &Transport,
    credential: String,
    prompt: &str,
    image: &ScreenImage,
    params: &ChatParams,
) -> Result<String, ProviderError> {
    let body = json!({
        "model": t.config.model_id,
        "temperature": params.temperature,
        "messages": [{
            "role": "user",
            "content": [
                { "type": "text", "text": prompt },
                { "type": "image_url", "image_url": { "url": png_data_url(image) } },
            ],
        }],
    });
    let v = send_json(
        t.client
            .post(t.url("chat/completions"))
            .bearer_auth(credential)
            .json(&body),
    )
    .await?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ProviderError::BadResponse("no message content in chat response".into()))
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub(super) async fn image_edit(
    t: &Transport,
    credential: String,
    prompt: &str,
    image: &ScreenImage,
    mask: Option<&MaskImage>,
    params: &EditParams,
) -> Result<ScreenImage, ProviderError> {
    let png = |bytes: Vec<u8>, name: &'static str| {
        Part::bytes(bytes)
            .file_name(name)
            .mime_str("image/png")
            .expect("static mime type")
    };
    let mut form = Form::new()
        .text("model", t.config.model_id.clone())
        .text("prompt", prompt.to_string())
        .text("n", "1")
        .part("image", png(image.encode_png(), "image.png"));
    if let Some(mask) = mask {
        form = form.part("mask", png(alpha_mask_png(mask), "mask.png"));
    }
    for (k, v) in params {
        form = form.text(k.clone(), text_value(v));
    }
    let v = send_json(
        t.client
            .post(t.url("images/edits"))
            .bearer_auth(credential)
            .multipart(form),
    )
    .await?;
    let b64 = v
        .pointer("/data/0/b64_json")
        .and_then(Value::as_str)
        .ok_or_else(|| ProviderError::BadResponse("no image in edit response".into()))?;
    decode_base64_image(b64)
}
