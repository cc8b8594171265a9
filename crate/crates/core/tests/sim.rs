use handbrain::engine::{EngineConfig, EngineRole};
use handbrain::fragility::fragility_score;
use handbrain::session::{replay_session, EventBody};
use handbrain::sim::{generate_many, generate_session, truth_labels, Link, SimConfig, SimError, TruthPolicy};

fn fast(turns: u32) -> SimConfig {
    SimConfig {
        turns,
        teammate: EngineConfig::builtin(EngineRole::Teammate, 1),
        opponent: EngineConfig::builtin(EngineRole::Opponent, 1),
        ..SimConfig::default()
    }
}

#[test]
fn same_seed_same_log() {
    let cfg = fast(8);
    let p = TruthPolicy::default();
    let a = generate_many(&p, &cfg, "d", 99, 3).unwrap();
    assert_eq!(a, generate_many(&p, &cfg, "d", 99, 3).unwrap());
    assert_ne!(a, generate_many(&p, &cfg, "d", 100, 3).unwrap());
    assert_ne!(a[0], a[1], "sessions in a batch differ");
}

#[test]
fn noise_free_threshold_labels_are_recovered_exactly() {
    let policy = TruthPolicy::fragility_threshold(0.03);
    let mut both = [0, 0];
    for events in generate_many(&policy, &fast(20), "thr", 5, 6).unwrap() {
        for t in truth_labels(&events, &policy).unwrap() {
            assert!(t.p_switch == 0.0 || t.p_switch == 1.0);
            assert_eq!(t.switched, t.p_switch == 1.0, "turn {}", t.turn);
            both[t.switched as usize] += 1;
        }
    }
    assert!(both[0] > 0 && both[1] > 0, "{both:?}");
}

#[test]
fn label_noise_flips_at_its_rate() {
    let policy = TruthPolicy {
        intercept: -1.0,
        fragility: 0.0,
        entropy: 0.0,
        elapsed: 0.0,
        previous_brain: 0.0,
        eval: 0.0,
        link: Link::Step,
        noise: 0.2,
    };
    let (mut turns, mut flips) = (0, 0);
    for events in generate_many(&policy, &fast(51), "noise", 8, 40).unwrap() {
        for t in truth_labels(&events, &policy).unwrap() {
            assert_eq!(t.p_switch, 0.0);
            turns += 1;
            flips += t.switched as u32;
        }
    }
    let rate = flips as f64 / turns as f64;
    assert!(turns >= 1500, "{turns}");
    assert!((rate - 0.2).abs() <= 0.03, "{flips}/{turns} = {rate}");
}

#[test]
fn fragile_turns_switch_more() {
    let policy = TruthPolicy::default();
    let mut turns = Vec::new();
    for events in generate_many(&policy, &fast(20), "dir", 12, 50).unwrap() {
        let state = replay_session(&events).unwrap();
        for pair in state.turns.windows(2) {
            let f = fragility_score(&pair[1].fen_before.parse().unwrap());
            turns.push((f, pair[0].mode != pair[1].mode));
        }
    }
    turns.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (low, high) = turns.split_at(turns.len() / 2);
    let rate = |s: &[(f64, bool)]| s.iter().filter(|t| t.1).count() as f64 / s.len() as f64;
    assert!(rate(high) > rate(low), "high {} vs low {}", rate(high), rate(low));
}

#[test]
fn bad_inputs_are_rejected() {
    let cfg = fast(1);
    assert!(matches!(
        generate_session(&TruthPolicy::default(), &cfg, "x", 0),
        Err(SimError::Invalid(_))
    ));
    let noisy = TruthPolicy {
        noise: 0.7,
        ..TruthPolicy::default()
    };
    assert!(generate_session(&noisy, &fast(5), "x", 0).is_err());

    // logs not written by the simulator have no ground truth
    let mut events = generate_session(&TruthPolicy::default(), &fast(3), "x", 0).unwrap();
    if let EventBody::SessionStart { origin, .. } = &mut events[0].body {
        *origin = Some("serve".into());
    }
    assert!(matches!(truth_labels(&events, &TruthPolicy::default()), Err(SimError::Foreign(_))));
}
