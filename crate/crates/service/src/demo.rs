//! Scripted end-to-end run against mock providers over real HTTP.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uisuggest_core::{EncodedFormat, PixelLayout, RegionMark, ReportId, ScreenImage};
use uisuggest_providers::mock::CallCounter;
use uisuggest_providers::{builtin_profiles, ProviderRegistry};

use crate::clock::{SeededIds, SteppingClock};
use crate::store::FaultPlan;
use crate::{http, Service, ServiceConfig, ServiceError};

pub const DEMO_FEEDBACK: &str = "The checkout button text is too small and hard to read.";
pub const DEMO_COMMENT: &str = "Option 1 matches what I had in mind.";
const POLL_LIMIT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub seed: u64,
    pub ablation: bool,
    /// Service data directory; created if missing.
    pub data_dir: PathBuf,
    /// Where the finished report is exported.
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoOutcome {
    pub report_id: ReportId,
    pub report_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub chat_calls: usize,
    pub edit_calls: usize,
    pub elapsed_ms: u64,
}

/// A fixed 180x320 mock-up: header bar, content cards and a button row.
pub fn demo_screenshot() -> ScreenImage {
    let (w, h) = (180u32, 320u32);
    let mut px = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            let c = if y < 36 {
                [40, 70, 160]
            } else if (232..260).contains(&y) && (24..156).contains(&x) {
                [230, 120, 30]
            } else if ((56..110).contains(&y) || (124..178).contains(&y)) && (12..168).contains(&x) {
                [236, 236, 240]
            } else {
                let g = 250 - (y / 16) as u8;
                [g, g, g]
            };
            px.extend_from_slice(&c);
        }
    }
    ScreenImage::new(w, h, PixelLayout::Rgb, EncodedFormat::Png, px).expect("fixed dimensions")
}

pub fn demo_mark() -> RegionMark {
    RegionMark::new(0.1, 0.7, 0.8, 0.12).expect("valid mark")
}

fn api_err(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(format!("demo: {e}"))
}

async fn expect_json(resp: reqwest::Response, want: u16) -> Result<Value, ServiceError> {
    let status = resp.status().as_u16();
    let body: Value = resp.json().await.map_err(api_err)?;
    if status != want {
        return Err(api_err(format!("expected HTTP {want}, got {status}: {body}")));
    }
    Ok(body)
}

pub async fn run_demo(opts: &DemoOptions) -> Result<DemoOutcome, ServiceError> {
    run_demo_with(opts, FaultPlan::default()).await
}

pub async fn run_demo_with(opts: &DemoOptions, fault: FaultPlan) -> Result<DemoOutcome, ServiceError> {
    let started = Instant::now();
    let mut config = ServiceConfig {
        data_dir: opts.data_dir.clone(),
        workers: 1,
        ..ServiceConfig::default()
    };
    config.generation.ablation_no_sg = opts.ablation;
    let chat = CallCounter::default();
    let edit = CallCounter::default();
    let registry = ProviderRegistry::mock(opts.seed, &builtin_profiles(), chat.clone(), edit.clone());
    let clock = Arc::new(SteppingClock::new(
        Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).single().expect("valid date"),
        chrono::Duration::seconds(1),
    ));
    let svc = Service::open(config, registry, clock, Arc::new(SeededIds::new(opts.seed)), fault).await?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(api_err)?;
    let base = format!("http://{}/api/v1", listener.local_addr().map_err(api_err)?);
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(http::serve(listener, svc.clone(), async {
        let _ = stop_rx.await;
    }));

    let result = script(&base, &svc, opts).await;
    let _ = stop_tx.send(());
    let _ = server.await;
    let (report_id, files) = result?;
    Ok(DemoOutcome {
        report_id,
        report_dir: opts.out_dir.clone(),
        files,
        chat_calls: chat.get(),
        edit_calls: edit.get(),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

async fn script(base: &str, svc: &Service, opts: &DemoOptions) -> Result<(ReportId, Vec<PathBuf>), ServiceError> {
    let client = reqwest::Client::new();
    let created = expect_json(
        client
            .post(format!("{base}/sessions?app_tag=demo"))
            .header("content-type", "image/png")
            .body(demo_screenshot().encode_png())
            .send()
            .await
            .map_err(api_err)?,
        201,
    )
    .await?;
    let id = created["id"].as_str().ok_or_else(|| api_err("no session id"))?.to_string();

    expect_json(
        client
            .post(format!("{base}/sessions/{id}/feedback"))
            .json(&json!({"issue_text": DEMO_FEEDBACK, "mark": demo_mark()}))
            .send()
            .await
            .map_err(api_err)?,
        202,
    )
    .await?;

    let deadline = Instant::now() + POLL_LIMIT;
    loop {
        let s = expect_json(client.get(format!("{base}/sessions/{id}")).send().await.map_err(api_err)?, 200).await?;
        match s["job"]["phase"].as_str() {
            Some("Done") => break,
            Some("Failed") => return Err(api_err(format!("generation failed: {}", s["job"]["error"]))),
            _ if Instant::now() > deadline => return Err(api_err("generation timed out")),
            _ => tokio::time::sleep(Duration::from_millis(10)).await,
        }
    }

    let report = expect_json(
        client
            .post(format!("{base}/sessions/{id}/report"))
            .json(&json!({"choice": 1, "comment": DEMO_COMMENT}))
            .send()
            .await
            .map_err(api_err)?,
        201,
    )
    .await?;
    let report_id = ReportId(
        report["report_id"]
            .as_str()
            .ok_or_else(|| api_err("no report id"))?
            .to_string(),
    );
    let files = export(svc, &report_id, &opts.out_dir)?;
    Ok((report_id, files))
}

fn export(svc: &Service, id: &ReportId, out: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    svc.reports().export(id, out)
}
