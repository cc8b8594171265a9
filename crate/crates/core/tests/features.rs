use std::collections::{BTreeMap, BTreeSet};

use handbrain::engine::{connect, EngineConfig, EngineRole};
use handbrain::features::{
    annotate_turns, build_feature_rows, dwell_ratio, exclusion, feature_names, gaze_entropy, split_dataset,
    vertical_dispersion, FeatureRow, Partition, MAX_SEGMENT, MIN_SEGMENT,
};
use handbrain::session::{replay_session, BoardRect, EventBody, GazeSample, SessionEvent};
use handbrain::sim::{generate_many, SimConfig, TruthPolicy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sessions(count: u64, seed: u64) -> Vec<Vec<SessionEvent>> {
    let cfg = SimConfig {
        turns: 12,
        ..SimConfig::default()
    };
    generate_many(&TruthPolicy::default(), &cfg, "feat", seed, count).unwrap()
}

fn rows_of(events: &[SessionEvent], k: usize) -> Vec<FeatureRow> {
    let state = replay_session(events).unwrap();
    let mut ev = connect(&EngineConfig::builtin(EngineRole::Evaluator, 1)).unwrap();
    let ctx = annotate_turns(&state, ev.as_mut()).unwrap();
    build_feature_rows(events, k, &ctx).unwrap()
}

/// Scrambles the content of every gaze and emotion batch delivered after `cut`.
fn scramble_after(events: &[SessionEvent], cut: u64, seed: u64) -> Vec<SessionEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = events.to_vec();
    for ev in out.iter_mut().filter(|e| e.t > cut) {
        match &mut ev.body {
            EventBody::GazeBatch { samples } => {
                for s in samples.iter_mut() {
                    s.x = rng.random_range(-500.0..1500.0);
                    s.y = rng.random_range(-500.0..1500.0);
                }
            }
            EventBody::EmotionBatch { samples } => {
                for s in samples.iter_mut() {
                    s.p = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
                }
            }
            _ => {}
        }
    }
    out
}

#[test]
fn rows_never_see_the_future() {
    for (i, events) in sessions(3, 21).iter().enumerate() {
        let state = replay_session(events).unwrap();
        let starts: BTreeMap<u32, u64> = state.turns.iter().map(|t| (t.index, t.start_t)).collect();
        let rows = rows_of(events, 3);
        let end = events.last().unwrap().t;
        for step in 1..8 {
            let cut = end * step / 8;
            let altered = rows_of(&scramble_after(events, cut, i as u64 * 10 + step), 3);
            assert_eq!(altered.len(), rows.len());
            let mut checked = 0;
            for (a, b) in rows.iter().zip(&altered) {
                let tau = starts[&a.turn] + (a.elapsed * 1000.0).round() as u64;
                if tau <= cut {
                    assert_eq!(a, b, "turn {} at {}s, cut {cut}", a.turn, a.elapsed);
                    checked += 1;
                }
            }
            assert!(step < 4 || checked > 0);
        }
    }
}

#[test]
fn one_row_per_second_of_thinking() {
    let mut ev = connect(&EngineConfig::builtin(EngineRole::Evaluator, 1)).unwrap();
    for events in sessions(4, 5) {
        let state = replay_session(&events).unwrap();
        let ctx = annotate_turns(&state, ev.as_mut()).unwrap();
        let rows = build_feature_rows(&events, 5, &ctx).unwrap();
        let mut expected = BTreeMap::new();
        for (turn, c) in state.turns.iter().zip(&ctx) {
            if exclusion(turn, c).is_none() {
                let seconds = (turn.mode_t - turn.start_t) / 1000;
                expected.insert(turn.index, seconds.max(1) as usize);
            }
        }
        let mut got = BTreeMap::new();
        for r in &rows {
            *got.entry(r.turn).or_insert(0usize) += 1;
            assert_eq!(r.values.len(), feature_names().len());
        }
        assert_eq!(got, expected);
        assert!(!got.contains_key(&1), "first turn has no label");
    }
}

#[test]
fn simulated_rows_have_no_missing_values_in_range() {
    let names = feature_names();
    let col = |n: &str| names.iter().position(|c| c == n).unwrap();
    let max_entropy = 65f64.log2();
    for events in sessions(3, 8) {
        for r in rows_of(&events, 3) {
            for (name, v) in names.iter().zip(&r.values) {
                let v = v.unwrap_or_else(|| panic!("{name} missing at turn {} {}s", r.turn, r.elapsed));
                assert!(v.is_finite(), "{name}");
            }
            for name in names.iter().filter(|n| n.contains("entropy")) {
                let v = r.values[col(name)].unwrap();
                assert!((0.0..=max_entropy + 1e-9).contains(&v), "{name} = {v}");
            }
            for name in names.iter().filter(|n| n.contains("dwell")) {
                let v = r.values[col(name)].unwrap();
                assert!((0.0..=1.0).contains(&v), "{name} = {v}");
            }
            for name in names.iter().filter(|n| n.contains("dispersion") && !n.contains("delta")) {
                assert!(r.values[col(name)].unwrap() >= 0.0, "{name}");
            }
        }
    }
}

fn gaze_window() -> impl Strategy<Value = Vec<GazeSample>> {
    prop::collection::vec((0u64..5000, -200.0..1200.0f64, -200.0..1200.0f64, prop::bool::weighted(0.9)), 0..120)
        .prop_map(|v| {
            let mut w: Vec<GazeSample> = v.into_iter().map(|(t, x, y, valid)| GazeSample { t, x, y, valid }).collect();
            w.sort_by_key(|s| s.t);
            w
        })
}

proptest! {
    #[test]
    fn gaze_statistics_stay_in_range(w in gaze_window(), think in 0.1..30.0f64) {
        let board = BoardRect::default();
        let any_valid = w.iter().any(|s| s.valid);
        let h = gaze_entropy(&w, &board);
        prop_assert_eq!(h.is_some(), any_valid);
        if let Some(h) = h {
            prop_assert!((0.0..=65f64.log2() + 1e-9).contains(&h));
        }
        if let Some(d) = vertical_dispersion(&w) {
            prop_assert!((0.0..=1400.0).contains(&d));
        }
        if let Some(r) = dwell_ratio(&w, &board, think, think).unwrap() {
            prop_assert!((0.0..=1.0).contains(&r));
        }
        prop_assert!(dwell_ratio(&w, &board, 1.0, 0.0).is_err());
    }
}

#[test]
fn split_partitions_turns_into_segments() {
    let rows: Vec<FeatureRow> = sessions(4, 13).iter().flat_map(|e| rows_of(e, 3)).collect();
    let a = split_dataset(&rows, 3).unwrap();
    assert_eq!(a, split_dataset(&rows, 3).unwrap(), "same seed, same split");
    assert_eq!(a.all.len(), rows.len());
    assert_eq!(a.train.len() + a.test.len(), rows.len());

    let turns = |rs: &[FeatureRow]| -> BTreeSet<(String, u32)> { rs.iter().map(|r| (r.session.clone(), r.turn)).collect() };
    let (train, test) = (turns(&a.train), turns(&a.test));
    assert!(train.is_disjoint(&test));
    assert_eq!(train.len() + test.len(), turns(&rows).len());

    for (game, segs) in &a.manifest.games {
        for (i, s) in segs.iter().enumerate() {
            assert!(s.turns.len() <= MAX_SEGMENT);
            if i + 1 < segs.len() {
                assert!(s.turns.len() >= MIN_SEGMENT);
            }
            let side = if s.partition == Partition::Train { &train } else { &test };
            assert!(s.turns.iter().all(|t| side.contains(&(game.clone(), *t))));
        }
    }
    assert!((a.manifest.train_fraction - 0.7).abs() < 0.15, "{}", a.manifest.train_fraction);
    let b = split_dataset(&rows, 4).unwrap();
    assert_ne!(a.manifest.games, b.manifest.games, "the seed matters");
}
