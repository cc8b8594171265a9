//! Synthetic gaze and facial-expression streams.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::chess::{Color, Square};
use crate::session::{BoardRect, EmotionSample, GazeSample, EMOTIONS, SURPRISE};

pub const GAZE_PERIOD_MS: u64 = 33;
pub const EMOTION_PERIOD_MS: u64 = 100;
const DROPOUT: f64 = 0.01;

/// Screen centre of a square, seen from `bottom`'s side of the board.
pub fn square_center(board: &BoardRect, sq: Square, bottom: Color) -> (f64, f64) {
    let side = board.size / 8.0;
    let (col, row) = match bottom {
        Color::White => (sq.file() as f64, 7.0 - sq.rank() as f64),
        Color::Black => (7.0 - sq.file() as f64, sq.rank() as f64),
    };
    (board.x + (col + 0.5) * side, board.y + (row + 0.5) * side)
}

/// Gaze over `(start, end]`: bursts around `centers`, one at a time. Higher
/// `scatter` (0..1) widens each burst and shortens the dwell on it.
pub fn gaze_bursts(
    rng: &mut ChaCha8Rng,
    board: &BoardRect,
    centers: &[(f64, f64)],
    scatter: f64,
    start: u64,
    end: u64,
) -> Vec<GazeSample> {
    let spread = Normal::new(0.0, 8.0 + 70.0 * scatter).expect("positive spread");
    let fallback = [(board.x + board.size / 2.0, board.y + board.size / 2.0)];
    let centers = if centers.is_empty() { &fallback[..] } else { centers };
    let mut out = Vec::new();
    let mut t = start + GAZE_PERIOD_MS;
    let mut burst_end = t;
    let mut center = centers[0];
    while t <= end {
        if t >= burst_end {
            center = *centers.choose(rng).expect("nonempty");
            let dwell = rng.random_range(150.0..650.0) * (1.0 - 0.6 * scatter);
            burst_end = t + dwell as u64;
        }
        if rng.random_bool(DROPOUT) {
            out.push(GazeSample {
                t,
                x: 0.0,
                y: 0.0,
                valid: false,
            });
        } else {
            out.push(GazeSample {
                t,
                x: center.0 + spread.sample(rng),
                y: center.1 + spread.sample(rng),
                valid: true,
            });
        }
        t += GAZE_PERIOD_MS;
    }
    out
}

/// Expression probabilities over `(start, end]`; `spike` (0..1) raises
/// surprise right after `start` and decays over about a second.
pub fn emotion_stream(rng: &mut ChaCha8Rng, spike: f64, start: u64, end: u64) -> Vec<EmotionSample> {
    let base = [0.04, 0.02, 0.04, 0.10, 0.05];
    let mut out = Vec::new();
    let mut t = start + EMOTION_PERIOD_MS;
    while t <= end {
        let since = (t - start) as f64;
        let surprise = (0.04 + spike * (-since / 800.0).exp() + rng.random_range(0.0..0.03)).min(0.9);
        let mut p = [0.0; EMOTIONS.len()];
        let jitter: Vec<f64> = base.iter().map(|b| b * rng.random_range(0.7..1.3)).collect();
        let rest = 1.0 - surprise;
        // the five minor expressions, then neutral takes what is left
        for (i, j) in jitter.iter().enumerate() {
            p[i] = j * rest;
        }
        p[SURPRISE] = surprise;
        p[6] = 1.0 - p[..6].iter().sum::<f64>();
        out.push(EmotionSample { t, p });
        t += EMOTION_PERIOD_MS;
    }
    out
}
