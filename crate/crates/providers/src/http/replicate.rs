use std::time::Duration;

use serde_json::{json, Value};
use uisuggest_core::ScreenImage;

use super::{map_reqwest, map_status, png_data_url, send_json, Transport};
use crate::{EditParams, ProviderError};

const POLL_INTERVAL: Duration = Duration::from_secs(2);

pub(super) async fn image_edit(
    t: &Transport,
    credential: String,
    prompt: &str,
    image: &ScreenImage,
    params: &EditParams,
) -> Result<ScreenImage, ProviderError> {
    let mut input = json!({
        "prompt": prompt,
        // flux-kontext names the field `input_image`, bagel names it `image`.
        "input_image": png_data_url(image),
        "image": png_data_url(image),
    });
    for (k, v) in params {
        input[k] = v.clone();
    }
    let mut prediction = send_json(
        t.client
            .post(t.url(&format!("models/{}/predictions", t.config.model_id)))
            .bearer_auth(&credential)
            .header("Prefer", "wait")
            .json(&json!({ "input": input })),
    )
    .await?;

    let deadline = tokio::time::Instant::now() + Duration::from_secs(t.config.timeout_secs);
    loop {
        match prediction.get("status").and_then(Value::as_str) {
            Some("succeeded") => break,
            Some("failed") | Some("canceled") => {
                let err = prediction.get("error").map(Value::to_string).unwrap_or_default();
                return Err(ProviderError::BadResponse(format!("prediction failed: {err}")));
            }
            _ => {}
        }
        if tokio::time::Instant::now() >= deadline {
            return Err(ProviderError::Timeout);
        }
        let poll = prediction
            .pointer("/urls/get")
            .and_then(Value::as_str)
            .ok_or_else(|| ProviderError::BadResponse("prediction has no poll url".into()))?
            .to_string();
        tokio::time::sleep(POLL_INTERVAL).await;
        prediction = send_json(t.client.get(poll).bearer_auth(&credential)).await?;
    }

    let output = prediction.get("output");
    let url = output
        .and_then(Value::as_str)
        .or_else(|| output.and_then(|o| o.get(0)).and_then(Value::as_str))
        .ok_or_else(|| ProviderError::BadResponse("prediction has no output url".into()))?;
    if url.starts_with("data:") {
        return super::decode_base64_image(url);
    }
    let resp = t.client.get(url).send().await.map_err(map_reqwest)?;
    let status = resp.status();
    if !status.is_success() {
        let headers = resp.headers().clone();
        return Err(map_status(status, &headers, ""));
    }
    let bytes = resp.bytes().await.map_err(map_reqwest)?;
    ScreenImage::decode(&bytes).map_err(|e| ProviderError::BadResponse(e.to_string()))
}
