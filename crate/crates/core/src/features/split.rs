use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rows::FeatureRow;
use super::FeatureError;

pub const TRAIN_TARGET: f64 = 0.7;
pub const MIN_SEGMENT: usize = 3;
pub const MAX_SEGMENT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub id: u32,
    pub turns: Vec<u32>,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub target_train_fraction: f64,
    /// Realized share of turns in the training partition.
    pub train_fraction: f64,
    pub train_turns: usize,
    pub test_turns: usize,
    pub games: BTreeMap<String, Vec<SegmentEntry>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    /// Every input row, in input order, with its segment id.
    pub all: Vec<FeatureRow>,
    pub train: Vec<FeatureRow>,
    pub test: Vec<FeatureRow>,
    pub manifest: SplitManifest,
}

/// Cuts each game's turns into consecutive segments of 3-5 turns (the last
/// may be shorter) and deals shuffled segments to train until about 70% of
/// all turns are there. Segment ids are written into the rows.
pub fn split_dataset(rows: &[FeatureRow], seed: u64) -> Result<DatasetSplit, FeatureError> {
    if rows.is_empty() {
        return Err(FeatureError::Invalid("cannot split an empty dataset".into()));
    }
    let mut turns: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for r in rows {
        turns.entry(&r.session).or_default().insert(r.turn);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments: Vec<(String, SegmentEntry)> = Vec::new();
    for (game, set) in &turns {
        let list: Vec<u32> = set.iter().copied().collect();
        let mut i = 0;
        let mut id = 0;
        while i < list.len() {
            let len = rng.random_range(MIN_SEGMENT..=MAX_SEGMENT).min(list.len() - i);
            segments.push((
                game.to_string(),
                SegmentEntry {
                    id,
                    turns: list[i..i + len].to_vec(),
                    partition: Partition::Test,
                },
            ));
            i += len;
            id += 1;
        }
    }

    let total: usize = segments.iter().map(|(_, s)| s.turns.len()).sum();
    let target = TRAIN_TARGET * total as f64;
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.shuffle(&mut rng);
    let mut train_turns = 0;
    for idx in order {
        let len = segments[idx].1.turns.len();
        if train_turns as f64 + len as f64 / 2.0 <= target {
            segments[idx].1.partition = Partition::Train;
            train_turns += len;
        }
    }

    let mut games: BTreeMap<String, Vec<SegmentEntry>> = BTreeMap::new();
    let mut lookup: BTreeMap<(String, u32), (u32, Partition)> = BTreeMap::new();
    for (game, seg) in segments {
        for &t in &seg.turns {
            lookup.insert((game.clone(), t), (seg.id, seg.partition));
        }
        games.entry(game).or_default().push(seg);
    }
    let (mut all, mut train, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        let (id, part) = lookup[&(r.session.clone(), r.turn)];
        let mut row = r.clone();
        row.segment = Some(id);
        match part {
            Partition::Train => train.push(row.clone()),
            Partition::Test => test.push(row.clone()),
        }
        all.push(row);
    }
    Ok(DatasetSplit {
        all,
        train,
        test,
        manifest: SplitManifest {
            seed,
            target_train_fraction: TRAIN_TARGET,
            train_fraction: train_turns as f64 / total as f64,
            train_turns,
            test_turns: total - train_turns,
            games,
        },
    })
}

/// Holds out the last segment of every training game with more than one
/// segment. Returns `(fit, validation)`.
pub fn validation_holdout(train: &[FeatureRow]) -> (Vec<FeatureRow>, Vec<FeatureRow>) {
    let mut segs: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for r in train {
        if let Some(s) = r.segment {
            segs.entry(&r.session).or_default().insert(s);
        }
    }
    let held: BTreeMap<&str, u32> = segs
        .iter()
        .filter(|(_, s)| s.len() > 1)
        .map(|(g, s)| (*g, *s.iter().next_back().unwrap()))
        .collect();
    train
        .iter()
        .cloned()
        .partition(|r| held.get(r.session.as_str()).is_none_or(|h| Some(*h) != r.segment))
}
