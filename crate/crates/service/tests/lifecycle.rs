use std::sync::Arc;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use uisuggest_core::{FeedbackSession, ScreenImage, SessionEvent, SessionId, SessionState};
use uisuggest_providers::mock::CallCounter;
use uisuggest_providers::{builtin_profiles, ProviderRegistry};
use uisuggest_service::{
    read_document, write_document, FaultPlan, JobPhase, SeededIds, Service, ServiceConfig,
    SteppingClock,
};

async fn open(dir: &std::path::Path, start_day: u32) -> Arc<Service> {
    let registry = ProviderRegistry::mock(1, &builtin_profiles(), CallCounter::default(), CallCounter::default());
    let clock = Arc::new(SteppingClock::new(
        Utc.with_ymd_and_hms(2025, 6, start_day, 0, 0, 0).unwrap(),
        chrono::Duration::seconds(1),
    ));
    let config = ServiceConfig {
        data_dir: dir.to_path_buf(),
        retention_days: 10,
        ..ServiceConfig::default()
    };
    Service::open(config, registry, clock, Arc::new(SeededIds::new(3)), FaultPlan::default())
        .await
        .unwrap()
}

fn stranded_session(id: &str) -> FeedbackSession {
    let shot = ScreenImage::filled(20, 30, [10, 20, 30, 255]).unwrap();
    let at = Utc.with_ymd_and_hms(2025, 6, 1, 0, 0, 0).unwrap();
    let mut s = FeedbackSession::new(SessionId(id.into()), shot, None, at);
    s.advance(SessionEvent::SubmitFeedback { issue_text: "slow".into(), mark: None }, at).unwrap();
    assert_eq!(s.state, SessionState::Generating);
    s
}

#[tokio::test]
async fn interrupted_generation_fails_on_restart() {
    let dir = tempfile::tempdir().unwrap();
    let session = stranded_session("s-stranded");
    write_document(&dir.path().join("sessions/s-stranded"), "session.json", &session).unwrap();

    let svc = open(dir.path(), 2).await;
    let snap = svc.snapshot(&SessionId("s-stranded".into())).unwrap();
    assert_eq!(snap.session.state, SessionState::Draft);
    let job = snap.job.unwrap();
    assert_eq!(job.phase, JobPhase::Failed);
    assert!(job.error.unwrap().contains("restart"));
    let on_disk: FeedbackSession = read_document(&dir.path().join("sessions/s-stranded"), "session.json").unwrap();
    assert_eq!(on_disk.state, SessionState::Draft);

    let status = svc
        .submit_feedback(&SessionId("s-stranded".into()), "retry".into(), None)
        .await
        .unwrap();
    assert_eq!(status.progress.total, 3);
    let snap = svc.wait_idle(&SessionId("s-stranded".into())).await.unwrap();
    assert_eq!(snap.session.state, SessionState::Review);
}

#[tokio::test]
async fn old_abandoned_snapshots_are_pruned() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 1).await;
    let shot = ScreenImage::filled(20, 30, [1, 2, 3, 255]).unwrap().encode_png();
    let snap = svc.create_session(&shot, None).await.unwrap();
    let id = snap.session.id.clone();
    svc.submit_feedback(&id, "x".into(), None).await.unwrap();
    svc.wait_idle(&id).await.unwrap();
    svc.submit_report(&id, uisuggest_service::ReportChoice::RejectAll, None)
        .await
        .unwrap();
    let kept = dir.path().join("abandoned").join(&id.0);
    assert!(kept.exists());
    drop(svc);

    open(dir.path(), 5).await;
    assert!(kept.exists(), "within retention");
    open(dir.path(), 20).await;
    assert!(!kept.exists(), "past retention");
}

#[tokio::test]
async fn unreadable_sessions_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("sessions/s-broken")).unwrap();
    std::fs::write(dir.path().join("sessions/s-broken/session.json"), b"{").unwrap();
    let svc = open(dir.path(), 1).await;
    assert!(svc.snapshot(&SessionId("s-broken".into())).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn documents_round_trip_through_split_files(w in 1u32..24, h in 1u32..24, rgba in any::<[u8; 4]>(), text in "[a-z ]{1,40}") {
        let dir = tempfile::tempdir().unwrap();
        let mut s = stranded_session("s-p");
        s.screenshot = ScreenImage::filled(w, h, rgba).unwrap();
        s.issue_text = text;
        write_document(dir.path(), "session.json", &s).unwrap();
        let json = std::fs::read_to_string(dir.path().join("session.json")).unwrap();
        prop_assert!(!json.contains("png_base64"));
        let back: FeedbackSession = read_document(dir.path(), "session.json").unwrap();
        prop_assert_eq!(back, s);
    }
}
