mod support;

use std::io::Cursor;

use serde_json::{json, Value};
use support::{config, Harness};
use uisuggest_service::demo::demo_screenshot;
use uisuggest_service::{ReportStore, ServiceConfig};

fn mark() -> Value {
    json!({"x": 0.1, "y": 0.7, "w": 0.8, "h": 0.12})
}

#[tokio::test]
async fn session_creation_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(ServiceConfig {
        max_upload_bytes: 64 * 1024,
        ..config(dir.path())
    })
    .await;

    let (s, v) = h.get(&format!("/sessions/{}", h.create("shop").await)).await;
    assert_eq!(s, 200);
    assert_eq!(v["state"], "Draft");
    assert_eq!(v["app_tag"], "shop");
    assert_eq!((v["width"].as_u64(), v["height"].as_u64()), (Some(180), Some(320)));
    assert!(v.get("job").is_none());

    let send = |ct: &'static str, body: Vec<u8>| {
        let c = h.client.clone();
        let url = h.url("/sessions");
        async move {
            let r = c.post(url).header("content-type", ct).body(body).send().await.unwrap();
            let status = r.status().as_u16();
            (status, r.json::<Value>().await.unwrap())
        }
    };

    let mut jpeg = Cursor::new(Vec::new());
    demo_screenshot().to_dynamic().write_to(&mut jpeg, image::ImageFormat::Jpeg).unwrap();
    assert_eq!(send("image/jpeg", jpeg.into_inner()).await.0, 201);

    let (s, v) = send("text/plain", b"hello".to_vec()).await;
    assert_eq!((s, v["error"].as_str()), (415, Some("unsupported_media_type")));
    assert_eq!(send("image/png", b"not an image".to_vec()).await.0, 415);

    let (s, v) = send("image/png", vec![0u8; 100 * 1024]).await;
    assert_eq!((s, v["error"].as_str()), (413, Some("payload_too_large")));

    assert_eq!(h.get("/sessions/s-missing").await.0, 404);
    assert_eq!(h.get("/nowhere").await.0, 404);
    h.shutdown().await;
}

#[tokio::test]
async fn feedback_status_codes_and_generation() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.create("a").await;

    let (s, _) = h.post("/sessions/s-none/feedback", json!({"issue_text": "x"})).await;
    assert_eq!(s, 404);
    let (s, _) = h.post(&format!("/sessions/{id}/feedback"), json!({"issue_text": "  "})).await;
    assert_eq!(s, 422);
    let (s, _) = h.post(&format!("/sessions/{id}/feedback"), json!({"text": "wrong field"})).await;
    assert_eq!(s, 422);
    let bad_mark = json!({"issue_text": "x", "mark": {"x": 0.9, "y": 0.0, "w": 0.5, "h": 0.5}});
    assert_eq!(h.post(&format!("/sessions/{id}/feedback"), bad_mark).await.0, 422);
    let r = h
        .client
        .post(h.url(&format!("/sessions/{id}/feedback")))
        .body(r#"{"issue_text":"x"}"#)
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 415);
    // Rejected requests leave the session untouched.
    assert_eq!(h.get(&format!("/sessions/{id}")).await.1["state"], "Draft");

    let (s, job) = h
        .post(&format!("/sessions/{id}/feedback"), json!({"issue_text": "Text is too small", "mark": mark()}))
        .await;
    assert_eq!(s, 202);
    assert_eq!(job["session_id"], id.as_str());
    assert!(["Queued", "SuggestingSpecs", "EditingImages"].contains(&job["phase"].as_str().unwrap()));

    let (s, v) = h.post(&format!("/sessions/{id}/feedback"), json!({"issue_text": "again"})).await;
    assert_eq!((s, v["error"].as_str()), (409, Some("conflict")));

    let v = h.wait_job(&id).await;
    assert_eq!(v["state"], "Review");
    assert_eq!(v["job"]["phase"], "Done");
    assert_eq!(v["job"]["progress"], json!({"completed": 3, "total": 3}));
    assert_eq!((h.chat.get(), h.edit.get()), (1, 3));

    let (s, sg) = h.get(&format!("/sessions/{id}/suggestions")).await;
    assert_eq!(s, 200);
    let list = sg["suggestions"].as_array().unwrap();
    assert_eq!(list.len(), 3);
    for (i, item) in list.iter().enumerate() {
        assert_eq!(item["index"], i + 1);
        assert_eq!(item["modification_index"], i + 1);
        assert_eq!(item["mask_used"], true);
        assert!(item["title"].as_str().unwrap().len() > 3);
        assert!(item.get("parent_index").is_none());
        let url = item["image_url"].as_str().unwrap();
        let img = h.client.get(h.url(url.trim_start_matches("/api/v1"))).send().await.unwrap();
        assert_eq!(img.status().as_u16(), 200);
        assert_eq!(img.headers()["content-type"], "image/png");
        let decoded = image::load_from_memory(&img.bytes().await.unwrap()).unwrap();
        assert_eq!((decoded.width(), decoded.height()), (180, 320));
    }
    h.shutdown().await;
}

#[tokio::test]
async fn concurrent_feedback_has_exactly_one_winner() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.create("a").await;
    let calls = (0..8).map(|i| {
        let c = h.client.clone();
        let url = h.url(&format!("/sessions/{id}/feedback"));
        async move {
            c.post(url)
                .json(&json!({"issue_text": format!("issue {i}")}))
                .send()
                .await
                .unwrap()
                .status()
                .as_u16()
        }
    });
    let mut codes = futures_join(calls).await;
    codes.sort();
    assert_eq!(codes, [202, 409, 409, 409, 409, 409, 409, 409]);
    h.wait_job(&id).await;
    assert_eq!(h.chat.get(), 1);
    h.shutdown().await;
}

async fn futures_join<F: std::future::Future<Output = u16> + Send + 'static>(
    futs: impl Iterator<Item = F>,
) -> Vec<u16> {
    let handles: Vec<_> = futs.map(tokio::spawn).collect();
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

#[tokio::test]
async fn refinement_appends_a_child_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.reviewed("a", Some(mark())).await;

    let (s, _) = h
        .post(&format!("/sessions/{id}/refine"), json!({"suggestion_index": 9, "edit_text": "bigger"}))
        .await;
    assert_eq!(s, 422);
    let (s, job) = h
        .post(&format!("/sessions/{id}/refine"), json!({"suggestion_index": 2, "edit_text": "Make it even bigger"}))
        .await;
    assert_eq!(s, 202);
    assert_eq!(job["progress"]["total"], 1);
    let v = h.wait_job(&id).await;
    assert_eq!(v["state"], "Review");
    assert_eq!(v["suggestion_count"], 4);

    let (_, sg) = h.get(&format!("/sessions/{id}/suggestions")).await;
    let list = sg["suggestions"].as_array().unwrap();
    assert_eq!(list.len(), 4);
    assert_eq!(list[3]["index"], 4);
    assert_eq!(list[3]["parent_index"], 2);
    assert_eq!(list[3]["mask_used"], false);
    // Earlier suggestions keep their images.
    let (_, again) = h.get(&format!("/sessions/{id}/suggestions")).await;
    assert_eq!(again["suggestions"][0]["image_url"], list[0]["image_url"]);
    // The refinement is a one-suggestion round of its own.
    assert_eq!((h.chat.get(), h.edit.get()), (2, 4));
    h.shutdown().await;
}

#[tokio::test]
async fn report_submission_contract() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;

    let draft = h.create("a").await;
    let (s, _) = h.post(&format!("/sessions/{draft}/report"), json!({"choice": 1})).await;
    assert_eq!(s, 409);
    assert_eq!(h.post("/sessions/s-none/report", json!({"choice": 1})).await.0, 404);

    let marked = h.reviewed("shop", Some(mark())).await;
    let path = format!("/sessions/{marked}/report");
    assert_eq!(h.post(&path, json!({"choice": 1, "comment": "x".repeat(2001)})).await.0, 422);
    assert_eq!(h.post(&path, json!({"choice": "nope"})).await.0, 422);
    assert_eq!(h.post(&path, json!({"choice": 0})).await.0, 422);
    assert_eq!(h.post(&path, json!({"choice": 4})).await.0, 422);
    let (s, out) = h.post(&path, json!({"choice": 2, "comment": "  "})).await;
    assert_eq!(s, 201, "{out}");
    assert_eq!(out["state"], "Submitted");
    assert_eq!(h.post(&path, json!({"choice": 1})).await.0, 409);
    let rid = out["report_id"].as_str().unwrap();

    let (s, r) = h.get(&format!("/reports/{rid}")).await;
    assert_eq!(s, 200);
    assert!(r.get("comment").is_none());
    assert_eq!(r["chosen"]["index"], 2);
    assert_eq!(r["app_tag"], "shop");
    assert!(r["marked_url"].is_string());
    assert_eq!(r["mark"], mark());
    for key in ["original_url", "marked_url"] {
        let url = r[key].as_str().unwrap().trim_start_matches("/api/v1").to_string();
        assert_eq!(h.client.get(h.url(&url)).send().await.unwrap().status().as_u16(), 200);
    }

    let plain = h.reviewed("shop", None).await;
    let (s, out) = h
        .post(&format!("/sessions/{plain}/report"), json!({"choice": 1, "comment": "Looks right"}))
        .await;
    assert_eq!(s, 201);
    let (_, r) = h.get(&format!("/reports/{}", out["report_id"].as_str().unwrap())).await;
    assert!(r.get("marked_url").is_none());
    assert!(r.get("mark").is_none());
    assert_eq!(r["comment"], "Looks right");

    assert_eq!(h.get("/reports/r-unknown").await.0, 404);
    h.shutdown().await;
}

#[tokio::test]
async fn concurrent_reports_have_exactly_one_winner() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.reviewed("a", None).await;
    let calls = (1..=3).map(|i| {
        let c = h.client.clone();
        let url = h.url(&format!("/sessions/{id}/report"));
        async move {
            c.post(url).json(&json!({"choice": i})).send().await.unwrap().status().as_u16()
        }
    });
    let mut codes = futures_join(calls).await;
    codes.sort();
    assert_eq!(codes, [201, 409, 409]);
    assert_eq!(h.svc.reports().index_snapshot().len(), 1);
    h.shutdown().await;
}

#[tokio::test]
async fn reject_all_abandons_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.reviewed("a", None).await;
    let (s, out) = h.post(&format!("/sessions/{id}/report"), json!({"choice": "reject_all"})).await;
    assert_eq!(s, 200);
    assert_eq!(out["state"], "Abandoned");
    assert!(out.get("report_id").is_none());
    assert_eq!(h.get(&format!("/sessions/{id}")).await.1["state"], "Abandoned");
    assert_eq!(h.post(&format!("/sessions/{id}/report"), json!({"choice": 1})).await.0, 409);

    let log = std::fs::read_to_string(dir.path().join("abandoned.jsonl")).unwrap();
    let line: Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(line["session_id"], id.as_str());
    assert_eq!(line["suggestions"], 3);
    assert!(dir.path().join("abandoned").join(&id).join("session.json").exists());
    assert!(h.svc.reports().index_snapshot().is_empty());
    h.shutdown().await;
}

#[tokio::test]
async fn report_listing_order_filters_and_pages() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let mut ids = Vec::new();
    for tag in ["shop", "news", "shop"] {
        let s = h.reviewed(tag, None).await;
        let (_, out) = h.post(&format!("/sessions/{s}/report"), json!({"choice": 1})).await;
        ids.push(out["report_id"].as_str().unwrap().to_string());
    }
    let (s, v) = h.get("/reports").await;
    assert_eq!(s, 200);
    assert_eq!(v["total"], 3);
    let got: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(got, [ids[2].as_str(), ids[1].as_str(), ids[0].as_str()]);
    let first = &v["reports"][0];
    assert_eq!(first["issue_excerpt"], "The buttons are too small");
    assert!(first["thumbnail_url"].as_str().unwrap().starts_with("/api/v1/blobs/"));

    let (_, v) = h.get("/reports?app_tag=shop").await;
    assert_eq!(v["total"], 2);
    let (_, v) = h.get("/reports?limit=1&offset=1").await;
    assert_eq!(v["total"], 3);
    assert_eq!(v["reports"].as_array().unwrap().len(), 1);
    assert_eq!(v["reports"][0]["id"], ids[1].as_str());

    let since = v["reports"][0]["submitted_at"].as_str().unwrap().to_string();
    let (_, v) = h.get(&format!("/reports?since={}", since.replace('+', "%2B"))).await;
    assert_eq!(v["total"], 2);
    assert_eq!(h.get("/reports?since=yesterday").await.0, 422);
    h.shutdown().await;
}

#[tokio::test]
async fn blobs_are_cacheable_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let id = h.create("a").await;
    let (_, v) = h.get(&format!("/sessions/{id}")).await;
    let url = h.url(v["screenshot_url"].as_str().unwrap().trim_start_matches("/api/v1"));
    let r = h.client.get(&url).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 200);
    let etag = r.headers()["etag"].clone();
    assert!(r.headers()["cache-control"].to_str().unwrap().contains("immutable"));
    let body = r.bytes().await.unwrap();
    assert_eq!(
        uisuggest_service::blob_hash(&body),
        etag.to_str().unwrap().trim_matches('"')
    );
    let r = h.client.get(&url).header("if-none-match", etag).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 304);
    assert_eq!(h.get(&format!("/blobs/{}", "0".repeat(64))).await.0, 404);
    assert_eq!(h.get("/blobs/..%2Fsessions").await.0, 404);
    assert_eq!(h.get(&format!("/blobs/{}", "A".repeat(64))).await.0, 404);
    h.shutdown().await;
}

#[tokio::test]
async fn bundle_route_serves_manifest_and_images_only() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    std::fs::create_dir_all(bundle.join("images/t001")).unwrap();
    std::fs::write(bundle.join("manifest.json"), br#"{"tasks":[]}"#).unwrap();
    std::fs::write(bundle.join("key.json"), br#"{"secret":true}"#).unwrap();
    std::fs::write(bundle.join("images/t001/A.png"), demo_screenshot().encode_png()).unwrap();

    let h = Harness::start(ServiceConfig {
        bundle_dir: Some(bundle),
        ..config(&dir.path().join("data"))
    })
    .await;
    let (s, v) = h.get("/bundle/manifest.json").await;
    assert_eq!((s, v), (200, json!({"tasks": []})));
    let r = h.client.get(h.url("/bundle/images/t001/A.png")).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 200);
    assert_eq!(r.headers()["content-type"], "image/png");
    for path in [
        "/bundle/key.json",
        "/bundle/images/t001/B.png",
        "/bundle/images/t001/..%2F..%2Fkey.json",
        "/bundle/images/..%2F/key.json",
        "/bundle/images/t001/.hidden.png",
    ] {
        let r = h.client.get(h.url(path)).send().await.unwrap();
        assert_eq!(r.status().as_u16(), 404, "{path}");
        assert!(!r.text().await.unwrap().contains("secret"));
    }
    h.shutdown().await;

    let other = tempfile::tempdir().unwrap();
    let h = Harness::start(config(other.path())).await;
    assert_eq!(h.get("/bundle/manifest.json").await.0, 404);
    h.shutdown().await;
}

#[tokio::test]
async fn restart_reloads_sessions_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::start(config(dir.path())).await;
    let submitted = h.reviewed("a", Some(mark())).await;
    let (_, out) = h.post(&format!("/sessions/{submitted}/report"), json!({"choice": 3, "comment": "ok"})).await;
    let rid = out["report_id"].as_str().unwrap().to_string();
    let reviewing = h.reviewed("b", None).await;
    let (_, before) = h.get(&format!("/reports/{rid}")).await;
    let (_, list_before) = h.get("/reports").await;
    let (_, sugg_before) = h.get(&format!("/sessions/{reviewing}/suggestions")).await;
    h.shutdown().await;

    let h = Harness::start(config(dir.path())).await;
    assert_eq!(h.get(&format!("/reports/{rid}")).await.1, before);
    assert_eq!(h.get("/reports").await.1, list_before);
    assert_eq!(h.get(&format!("/sessions/{submitted}")).await.1["state"], "Submitted");
    assert_eq!(h.get(&format!("/sessions/{reviewing}/suggestions")).await.1, sugg_before);
    let (s, _) = h.post(&format!("/sessions/{reviewing}/report"), json!({"choice": 1})).await;
    assert_eq!(s, 201);

    let scanned = ReportStore::scan(&dir.path().join("reports")).unwrap();
    let mut indexed = h.svc.reports().index_snapshot();
    let mut scanned_sorted = scanned.clone();
    indexed.sort_by(|a, b| a.id.cmp(&b.id));
    scanned_sorted.sort_by(|a, b| a.id.cmp(&b.id));
    assert_eq!(indexed, scanned_sorted);
    h.shutdown().await;
}

#[tokio::test]
async fn failed_generation_returns_to_draft() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.generation.edit_provider = "no-such-editor".into();
    let h = Harness::start(cfg).await;
    let id = h.create("a").await;
    let (s, _) = h.post(&format!("/sessions/{id}/feedback"), json!({"issue_text": "x"})).await;
    assert_eq!(s, 202);
    let v = h.wait_job(&id).await;
    assert_eq!(v["state"], "Draft");
    assert_eq!(v["job"]["phase"], "Failed");
    assert!(v["job"]["error"].as_str().unwrap().contains("no-such-editor"));
    // The user can try again.
    let (s, _) = h.post(&format!("/sessions/{id}/feedback"), json!({"issue_text": "x"})).await;
    assert_eq!(s, 202);
    h.shutdown().await;
}
