mod common;

use common::play::*;
use curation_core::exec::Exec;
use curation_core::game::Phase;
use curation_core::sessionlog::{
    clearance_time, replay, replay_many, EventKind, InteractionEvent, LogError, Replayer,
    SessionLog,
};

#[test]
fn empty_log_is_initial_state() {
    let rules = demo_rules();
    let log = SessionLog::new("s", rules.scene().version.clone());
    let r = replay(&log, &rules).unwrap();
    assert_eq!(r.session, rules.new_session("s"));
    assert!(r.findings.is_empty());
}

#[test]
fn playthrough_finishes() {
    let rules = demo_rules();
    let log = playthrough_log(&rules, 0, 600_000);
    let r = replay(&log, &rules).unwrap();
    assert!(r.findings.is_empty(), "{:?}", r.findings);
    assert_eq!(r.session.phase, Phase::Finished);
    assert_eq!(r.session.passed_levels, [1, 2, 3].into());
    assert_eq!(clearance_time(&log, &rules).unwrap(), 600_000);
    assert_eq!(clearance_time(&log.shifted(2000), &rules).unwrap(), 600_000);
}

#[test]
fn bundled_playthrough_fixture() {
    let rules = demo_rules();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/playthrough.session.jsonl");
    let log = playthrough_log(&rules, 0, 600_000);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(path, log.to_jsonl()).unwrap();
    }
    let stored = SessionLog::from_jsonl(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(stored, log);
}

#[test]
fn closed_gate_becomes_finding() {
    let rules = demo_rules();
    let mut log = SessionLog::new("s", rules.scene().version.clone());
    log.record(InteractionEvent::new(0, EventKind::EnterGame)).unwrap();
    log.record(InteractionEvent::new(1500, EventKind::Teleport { point_id: "next_level_1".into() }))
        .unwrap();
    let before = {
        let mut p = log.clone();
        p.events.pop();
        replay(&p, &rules).unwrap().session
    };
    let r = replay(&log, &rules).unwrap();
    assert_eq!(r.findings.len(), 1);
    assert!(r.findings[0].to_string().starts_with("gate-closed at t=1500"));
    assert_eq!(r.session, before);
}

#[test]
fn incomplete_and_mismatched_logs() {
    let rules = demo_rules();
    let mut log = playthrough_log(&rules, 0, 600_000);
    log.events.pop();
    assert!(matches!(clearance_time(&log, &rules), Err(LogError::Incomplete)));
    log.scene_version = "other".into();
    assert!(matches!(replay(&log, &rules), Err(LogError::VersionMismatch { .. })));
}

#[test]
fn random_logs_replay_deterministically() {
    let rules = demo_rules();
    let logs: Vec<SessionLog> = (0..100).map(|seed| random_log(&rules, seed, 200)).collect();
    let seq = replay_many(&logs, &rules, Exec::Sequential);
    let par = replay_many(&logs, &rules, Exec::Parallel);
    for (a, b) in seq.iter().zip(&par) {
        let a = serde_json::to_string(&a.as_ref().unwrap().session).unwrap();
        let b = serde_json::to_string(&b.as_ref().unwrap().session).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn prefix_then_suffix_equals_whole() {
    let rules = demo_rules();
    let mut logs: Vec<SessionLog> = (0..20).map(|seed| random_log(&rules, 1000 + seed, 120)).collect();
    logs.push(playthrough_log(&rules, 0, 600_000));
    for log in &logs {
        let whole = replay(log, &rules).unwrap().session;
        for cut in [0, 1, log.events.len() / 3, log.events.len() / 2, log.events.len()] {
            let mut prefix = log.clone();
            let suffix = prefix.events.split_off(cut);
            let mid = replay(&prefix, &rules).unwrap().session;
            let mut r = Replayer::resume(&rules, mid);
            for e in &suffix {
                let _ = r.step(e);
            }
            assert_eq!(r.finish().session, whole);
        }
    }
}

#[test]
fn jsonl_file_roundtrip_replays_identically() {
    let rules = demo_rules();
    let log = random_log(&rules, 7, 300);
    let back = SessionLog::from_jsonl(&log.to_jsonl()).unwrap();
    assert_eq!(replay(&back, &rules).unwrap(), replay(&log, &rules).unwrap());
}
