#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use serde_json::{json, Value};
use tokio::task::JoinHandle;
use uisuggest_providers::mock::CallCounter;
use uisuggest_providers::{builtin_profiles, ProviderRegistry};
use uisuggest_service::demo::demo_screenshot;
use uisuggest_service::{http, FaultPlan, SeededIds, Service, ServiceConfig, SteppingClock};

pub struct Harness {
    pub svc: Arc<Service>,
    pub base: String,
    pub client: reqwest::Client,
    pub chat: CallCounter,
    pub edit: CallCounter,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    server: Option<JoinHandle<std::io::Result<()>>>,
}

pub fn config(dir: &Path) -> ServiceConfig {
    ServiceConfig {
        data_dir: dir.to_path_buf(),
        ..ServiceConfig::default()
    }
}

impl Harness {
    pub async fn start(config: ServiceConfig) -> Self {
        Self::start_with(config, |r| r).await
    }

    pub async fn start_with(
        config: ServiceConfig,
        tweak: impl FnOnce(ProviderRegistry) -> ProviderRegistry,
    ) -> Self {
        let chat = CallCounter::default();
        let edit = CallCounter::default();
        let registry = tweak(ProviderRegistry::mock(7, &builtin_profiles(), chat.clone(), edit.clone()));
        let clock = Arc::new(SteppingClock::new(
            Utc.with_ymd_and_hms(2025, 3, 1, 12, 0, 0).unwrap(),
            chrono::Duration::seconds(1),
        ));
        let svc = Service::open(config, registry, clock, Arc::new(SeededIds::new(11)), FaultPlan::default())
            .await
            .unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}/api/v1", listener.local_addr().unwrap());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let server = tokio::spawn(http::serve(listener, svc.clone(), async {
            let _ = rx.await;
        }));
        Self {
            svc,
            base,
            client: reqwest::Client::new(),
            chat,
            edit,
            stop: Some(tx),
            server: Some(server),
        }
    }

    pub async fn shutdown(mut self) {
        let _ = self.stop.take().unwrap().send(());
        self.server.take().unwrap().await.unwrap().unwrap();
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.client.post(self.url(path)).json(&body).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn create(&self, app_tag: &str) -> String {
        let r = self
            .client
            .post(self.url(&format!("/sessions?app_tag={app_tag}")))
            .header("content-type", "image/png")
            .body(demo_screenshot().encode_png())
            .send()
            .await
            .unwrap();
        assert_eq!(r.status().as_u16(), 201);
        let v: Value = r.json().await.unwrap();
        v["id"].as_str().unwrap().to_string()
    }

    /// Polls until the job leaves the running phases.
    pub async fn wait_job(&self, id: &str) -> Value {
        for _ in 0..2000 {
            let (s, v) = self.get(&format!("/sessions/{id}")).await;
            assert_eq!(s, 200);
            match v["job"]["phase"].as_str() {
                Some("Done") | Some("Failed") | None => return v,
                _ => tokio::time::sleep(std::time::Duration::from_millis(5)).await,
            }
        }
        panic!("job for {id} never finished");
    }

    /// A session in Review with three suggestions.
    pub async fn reviewed(&self, app_tag: &str, mark: Option<Value>) -> String {
        let id = self.create(app_tag).await;
        let mut body = json!({"issue_text": "The buttons are too small"});
        if let Some(m) = mark {
            body["mark"] = m;
        }
        let (s, _) = self.post(&format!("/sessions/{id}/feedback"), body).await;
        assert_eq!(s, 202);
        let v = self.wait_job(&id).await;
        assert_eq!(v["state"], "Review", "{v}");
        id
    }
}
