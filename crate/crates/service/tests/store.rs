// SPDX-License-Identifier: Apache-2.0

mod common;

use std::fs;
use std::process::{Command, Stdio};
use std::time::Duration;

use common::{finding_set, t};
use mutascope_core::context::Verdict;
use mutascope_service::store::Journal;
use mutascope_service::{FeedbackRequest, ReviewService, ServiceError, Status};

fn please_fix() -> FeedbackRequest {
    FeedbackRequest {
        verdict: Verdict::PleaseFix,
        actor: "reviewer".into(),
        note: None,
    }
}

#[test]
fn stores_and_retrieves_open_findings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("findings.journal");
    let (set, sources) = finding_set("cl-1", 3, 7);
    let mut svc = ReviewService::open(&path, None).unwrap();
    let ids = svc.store_findings(&set, &sources, t(0)).unwrap();
    assert_eq!(ids.len(), 21);
    let svc = ReviewService::open(&path, None).unwrap();
    let got = svc.changelist_findings("cl-1").unwrap();
    assert_eq!(got.len(), 21);
    assert!(got.iter().all(|f| f.status == Status::Open));
    for (f, want) in got.iter().zip(&set.findings) {
        assert_eq!(f.mutant, want.mutant);
        assert_eq!(f.diff, want.diff);
        let ctx = &f.context;
        assert!(
            ctx.start_line <= f.mutant.line && f.mutant.line < ctx.start_line + ctx.lines.len()
        );
        assert_eq!(
            ctx.lines[f.mutant.line - ctx.start_line],
            f.mutant.lines_before
        );
    }
    let summary = &svc.changelists()[0];
    assert_eq!((summary.findings, summary.open), (21, 21));
}

#[test]
fn restore_is_idempotent_and_conflicts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let (set, sources) = finding_set("cl-1", 2, 5);
    let mut svc = ReviewService::open(&path, None).unwrap();
    let a = svc.store_findings(&set, &sources, t(0)).unwrap();
    let b = svc.store_findings(&set, &sources, t(5)).unwrap();
    assert_eq!(a, b);
    assert_eq!(svc.findings().count(), 10);
    assert_eq!(svc.journal().records(), 1);

    let mut other = set.clone();
    other.findings.pop();
    assert!(matches!(
        svc.store_findings(&other, &sources, t(9)),
        Err(ServiceError::Conflict(_))
    ));
    assert_eq!(svc.findings().count(), 10);
}

#[test]
fn over_cap_sets_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (mut set, sources) = finding_set("cl-1", 1, 8);
    let mut svc = ReviewService::open(&dir.path().join("j"), None).unwrap();
    assert!(matches!(
        svc.store_findings(&set, &sources, t(0)),
        Err(ServiceError::BadRequest(_))
    ));
    set.findings.truncate(7);
    svc.store_findings(&set, &sources, t(0)).unwrap();
}

#[test]
fn feedback_round_trips_through_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let (set, sources) = finding_set("cl-1", 1, 3);
    let mut svc = ReviewService::open(&path, None).unwrap();
    let ids = svc.store_findings(&set, &sources, t(0)).unwrap();
    svc.record_feedback(&ids[1], &please_fix(), t(10)).unwrap();
    let svc = ReviewService::open(&path, None).unwrap();
    let f = svc.finding(&ids[1]).unwrap();
    assert_eq!(f.status, Status::PleaseFix);
    assert_eq!(f.updated_at, t(10));
    assert_eq!(svc.history(&ids[1]).len(), 1);
    assert_eq!(svc.finding(&ids[0]).unwrap().status, Status::Open);
}

#[test]
fn compaction_preserves_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let mut svc = ReviewService::open(&path, None).unwrap();
    for i in 0..4 {
        let (set, sources) = finding_set(&format!("cl-{i}"), 1, 2);
        let ids = svc.store_findings(&set, &sources, t(i)).unwrap();
        svc.record_feedback(&ids[0], &please_fix(), t(100 + i))
            .unwrap();
    }
    let before = svc.journal().state().clone();
    svc.compact().unwrap();
    assert_eq!(svc.journal().records(), 1);
    let (set, sources) = finding_set("cl-after", 1, 1);
    svc.store_findings(&set, &sources, t(7)).unwrap();
    let svc = ReviewService::open(&path, None).unwrap();
    assert_eq!(svc.journal().records(), 2);
    let mut want = before;
    assert!(svc.journal().state().changelists.contains_key("cl-after"));
    want.changelists.insert(
        "cl-after".into(),
        svc.journal().state().changelists["cl-after"].clone(),
    );
    for (id, f) in &svc.journal().state().findings {
        want.findings.entry(id.clone()).or_insert_with(|| f.clone());
    }
    assert_eq!(svc.journal().state(), &want);
}

/// Cuts the journal at every byte of its last record: reopening must give
/// exactly the state before or after that record.
#[test]
fn every_torn_tail_reopens_to_pre_or_post_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let mut svc = ReviewService::open(&path, None).unwrap();
    let (a, sa) = finding_set("cl-a", 2, 3);
    svc.store_findings(&a, &sa, t(0)).unwrap();
    let pre = svc.journal().state().clone();
    let pre_len = fs::metadata(&path).unwrap().len();
    let (b, sb) = finding_set("cl-b", 1, 1);
    svc.store_findings(&b, &sb, t(1)).unwrap();
    let post = svc.journal().state().clone();
    drop(svc);
    let full = fs::read(&path).unwrap();
    let copy = dir.path().join("cut");
    for cut in pre_len as usize..=full.len() {
        fs::write(&copy, &full[..cut]).unwrap();
        let j = Journal::open(&copy).unwrap();
        let want = if cut == full.len() { &post } else { &pre };
        assert_eq!(j.state(), want, "cut at {cut}");
        drop(j);
        // The damaged tail is gone and appends land on a clean boundary.
        let len = fs::metadata(&copy).unwrap().len();
        assert_eq!(
            len,
            if cut == full.len() {
                full.len() as u64
            } else {
                pre_len
            }
        );
    }
}

#[test]
fn damage_before_the_tail_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let mut svc = ReviewService::open(&path, None).unwrap();
    for i in 0..3 {
        let (set, sources) = finding_set(&format!("cl-{i}"), 1, 1);
        svc.store_findings(&set, &sources, t(i)).unwrap();
    }
    drop(svc);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[1] = "{\"record\":\"store\",";
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert!(matches!(
        Journal::open(&path),
        Err(ServiceError::Corrupt(_))
    ));
}

const CHILD_ENV: &str = "MUTASCOPE_CRASH_CHILD_JOURNAL";

/// Child half of the kill test: stores changelists until killed.
#[test]
fn crash_child() {
    let Ok(path) = std::env::var(CHILD_ENV) else {
        return;
    };
    let mut svc = ReviewService::open(std::path::Path::new(&path), None).unwrap();
    let (template, sources) = finding_set("x", 3, 7);
    for i in 0.. {
        let mut set = template.clone();
        set.changelist_id = format!("cl-{i:05}");
        svc.store_findings(&set, &sources, t(i)).unwrap();
    }
}

#[test]
fn killed_writer_leaves_whole_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j");
    let (template, _) = finding_set("x", 3, 7);
    let exe = std::env::current_exe().unwrap();
    for round in 0..5u64 {
        let mut child = Command::new(&exe)
            .args(["crash_child", "--exact", "--nocapture"])
            .env(CHILD_ENV, &path)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        std::thread::sleep(Duration::from_millis(150 + 37 * round));
        child.kill().unwrap();
        child.wait().unwrap();
        let svc = ReviewService::open(&path, None).unwrap();
        let state = svc.journal().state();
        assert!(!state.changelists.is_empty());
        for (id, cl) in &state.changelists {
            assert_eq!(cl.finding_ids.len(), 21, "{id} is partial");
            for (fid, want) in cl.finding_ids.iter().zip(&template.findings) {
                assert_eq!(state.findings[fid].mutant, want.mutant);
            }
        }
        assert_eq!(state.findings.len(), 21 * state.changelists.len());
        drop(svc);
        // Later rounds append after the repaired tail; start each fresh.
        fs::remove_file(&path).unwrap();
    }
}
