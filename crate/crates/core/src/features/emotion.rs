use crate::session::EmotionSample;

/// Mean surprise probability over samples with `t0 <= t <= t1`.
pub fn mean_surprise(samples: &[EmotionSample], t0: u64, t1: u64) -> Option<f64> {
    let inside: Vec<f64> = samples
        .iter()
        .filter(|s| s.t >= t0 && s.t <= t1)
        .map(|s| s.surprise())
        .collect();
    if inside.is_empty() {
        None
    } else {
        Some(inside.iter().sum::<f64>() / inside.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_surprise(t: u64, s: f64) -> EmotionSample {
        let mut p = [0.0; 7];
        p[5] = s;
        p[6] = 1.0 - s;
        EmotionSample { t, p }
    }

    #[test]
    fn examples() {
        let constant: Vec<_> = (0..5).map(|i| with_surprise(i * 100, 0.3)).collect();
        assert!((mean_surprise(&constant, 0, 500).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(mean_surprise(&constant, 1000, 2000), None);
        let mixed = [with_surprise(10, 0.2), with_surprise(20, 0.4), with_surprise(99, 0.9)];
        assert!((mean_surprise(&mixed, 0, 50).unwrap() - 0.3).abs() < 1e-15);
    }
}
