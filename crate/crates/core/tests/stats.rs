mod common;

use handbrain::features::Dataset;
use handbrain::stats::{analysis_report, exact_distribution, mann_whitney_with, Method, Outcome, VARIABLES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// U of `a` by pairwise comparison.
fn pairwise_u(a: &[f64], b: &[f64]) -> usize {
    a.iter().map(|x| b.iter().filter(|y| x > y).count()).sum()
}

fn subsets(total: usize, n: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << total).filter(move |m| m.count_ones() as usize == n)
}

fn split(mask: u32, total: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..total {
        if mask >> i & 1 == 1 { a.push(i as f64) } else { b.push(i as f64) }
    }
    (a, b)
}

#[test]
fn exact_test_matches_enumeration_up_to_seven() {
    for n in 1..=7 {
        for m in 1..=7 {
            let total = n + m;
            let mut counts = vec![0u128; n * m + 1];
            for mask in subsets(total, n) {
                let (a, b) = split(mask, total);
                counts[pairwise_u(&a, &b)] += 1;
            }
            assert_eq!(exact_distribution(n, m), counts, "n={n} m={m}");

            let all: f64 = counts.iter().sum::<u128>() as f64;
            for mask in subsets(total, n) {
                let (a, b) = split(mask, total);
                let u = pairwise_u(&a, &b);
                let le = counts[..=u].iter().sum::<u128>() as f64;
                let ge = counts[u..].iter().sum::<u128>() as f64;
                let want = (2.0 * le.min(ge) / all).min(1.0);
                let r = mann_whitney_with(&a, &b, Some(Method::Exact)).unwrap();
                assert_eq!(r.u, u as f64);
                assert!((r.p - want).abs() < 1e-12, "n={n} m={m} u={u}: {} vs {want}", r.p);
            }
        }
    }
}

/// Share of seeded runs in which each report variable comes out significant
/// when switch and non-switch turns share one distribution.
fn false_positive_rates(runs: u64, turns: u32) -> (Vec<f64>, f64) {
    let columns: Vec<usize> = VARIABLES
        .iter()
        .filter(|(_, c)| *c != "outcome_eval_delta")
        .map(|(_, c)| common::column(c))
        .collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut hits = vec![0u32; VARIABLES.len()];
    let mut clean = 0;
    for seed in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..turns)
            .map(|t| {
                let mut row = common::blank_row(&format!("s{}", t / 20), t % 20 + 2, 1.0, rng.random_bool(0.3));
                for &c in &columns {
                    row.values[c] = Some(noise.sample(&mut rng));
                }
                row.outcome_eval_delta = Some(noise.sample(&mut rng));
                row
            })
            .collect();
        let report = analysis_report(&Dataset::new(rows));
        let mut any = false;
        for (i, v) in report.variables.iter().enumerate() {
            match v.outcome {
                Outcome::Tested { significant, .. } => {
                    hits[i] += significant as u32;
                    any |= significant;
                }
                Outcome::InsufficientData { .. } => panic!("{} untested", v.column),
            }
        }
        clean += !any as u32;
    }
    let per_var = hits.iter().map(|&h| h as f64 / runs as f64).collect();
    (per_var, clean as f64 / runs as f64)
}

#[test]
fn identical_groups_rarely_test_significant() {
    let (per_var, clean) = false_positive_rates(100, 200);
    println!("per-variable false positive rates {per_var:?}; runs with no significant variable {clean:.2}");
    for (rate, (name, _)) in per_var.iter().zip(VARIABLES) {
        assert!(*rate <= 0.10, "{name}: {rate}");
    }
    // six independent tests at 0.05 leave about 0.95^6 of runs fully clean
    assert!(clean >= 0.6, "{clean}");
}

#[test]
fn reports_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<_> = (0..60u32)
        .map(|t| {
            let mut row = common::blank_row("g", t + 2, 1.0, t % 3 == 0);
            row.values[common::column("cur_fragility")] = Some(rng.random());
            row
        })
        .collect();
    let a = analysis_report(&Dataset::new(rows.clone()));
    let b = analysis_report(&Dataset::new(rows));
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_markdown(), b.to_markdown());
    assert_eq!(a.turns, 60);
    assert_eq!(a.switch_turns, 20);
    let untested = a
        .variables
        .iter()
        .filter(|v| matches!(v.outcome, Outcome::InsufficientData { .. }))
        .count();
    assert_eq!(untested, VARIABLES.len() - 1);
}
