use crate::session::{BoardRect, GazeSample};

use super::FeatureError;

pub const FIXATION_MIN_MS: u64 = 100;
pub const FIXATION_RADIUS_PX: f64 = 50.0;
/// Below this many samples the vertical range is taken untrimmed.
const TRIM_MIN_SAMPLES: usize = 40;

fn valid(window: &[GazeSample]) -> impl Iterator<Item = &GazeSample> {
    window.iter().filter(|s| s.valid)
}

/// Linear-interpolated percentile of sorted data, `q` in [0, 100].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Vertical extent of the gaze in pixels, trimmed to the 2.5-97.5 percentile
/// band for windows of 40 or more samples.
pub fn vertical_dispersion(window: &[GazeSample]) -> Option<f64> {
    let mut ys: Vec<f64> = valid(window).map(|s| s.y).collect();
    if ys.is_empty() {
        return None;
    }
    ys.sort_by(f64::total_cmp);
    if ys.len() >= TRIM_MIN_SAMPLES {
        let lo = percentile(&ys, 2.5);
        let hi = percentile(&ys, 97.5);
        ys.retain(|&y| y >= lo && y <= hi);
    }
    Some(ys[ys.len() - 1] - ys[0])
}

/// Shannon entropy in bits of the samples over the 64 board cells plus one
/// pooled off-board cell.
pub fn gaze_entropy(window: &[GazeSample], board: &BoardRect) -> Option<f64> {
    let mut counts = [0u32; 65];
    let mut n = 0u32;
    for s in valid(window) {
        let cell = board.cell(s.x, s.y).map_or(64, |(c, r)| r * 8 + c);
        counts[cell] += 1;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum::<f64>();
    Some(h.max(0.0))
}

/// Share of the thinking time spent looking at the board. Each sample stands
/// for the interval up to the next one; the last one for the mean interval.
pub fn dwell_ratio(
    window: &[GazeSample],
    board: &BoardRect,
    window_s: f64,
    thinking_time_s: f64,
) -> Result<Option<f64>, FeatureError> {
    if !(thinking_time_s > 0.0) {
        return Err(FeatureError::Invalid(format!(
            "thinking time must be positive, got {thinking_time_s}"
        )));
    }
    let pts: Vec<&GazeSample> = valid(window).collect();
    if pts.is_empty() {
        return Ok(None);
    }
    let gaps: Vec<f64> = pts.windows(2).map(|w| (w[1].t - w[0].t) as f64).collect();
    let last = if gaps.is_empty() {
        1.0
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    };
    let (mut on, mut total) = (0.0, 0.0);
    for (i, s) in pts.iter().enumerate() {
        let w = gaps.get(i).copied().unwrap_or(last);
        total += w;
        if board.contains(s.x, s.y) {
            on += w;
        }
    }
    let fraction = if total > 0.0 {
        on / total
    } else {
        // all samples share one timestamp
        pts.iter().filter(|s| board.contains(s.x, s.y)).count() as f64 / pts.len() as f64
    };
    Ok(Some((fraction * window_s / thinking_time_s).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    pub start: u64,
    pub end: u64,
    pub x: f64,
    pub y: f64,
}

/// Dispersion-threshold fixations: maximal runs of at least 100 ms whose
/// samples all lie within 50 px of the run's centroid.
pub fn detect_fixations(window: &[GazeSample]) -> Vec<Fixation> {
    let pts: Vec<&GazeSample> = valid(window).collect();
    let fits = |run: &[&GazeSample]| {
        let n = run.len() as f64;
        let cx = run.iter().map(|s| s.x).sum::<f64>() / n;
        let cy = run.iter().map(|s| s.y).sum::<f64>() / n;
        let ok = run
            .iter()
            .all(|s| (s.x - cx).hypot(s.y - cy) <= FIXATION_RADIUS_PX);
        (ok, cx, cy)
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < pts.len() {
        let mut j = i;
        while j + 1 < pts.len() && fits(&pts[i..=j + 1]).0 {
            j += 1;
        }
        if pts[j].t - pts[i].t >= FIXATION_MIN_MS {
            let (_, x, y) = fits(&pts[i..=j]);
            out.push(Fixation {
                start: pts[i].t,
                end: pts[j].t,
                x,
                y,
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

pub fn fixation_count(window: &[GazeSample]) -> usize {
    detect_fixations(window).len()
}
