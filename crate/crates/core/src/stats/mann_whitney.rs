use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// Largest `n·m` for which the exact null distribution is enumerated.
pub const EXACT_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of the first sample: its rank sum minus `n(n+1)/2`.
    pub u: f64,
    /// `n·m - u`, the U of the second sample.
    pub u_complement: f64,
    /// Two-sided.
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub method: Method,
}

/// Midranks (1-based) of the pooled sample plus the tie term `Σ(t³ - t)`.
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Number of arrangements giving each U value, `counts[u]` for `u` in `0..=n·m`.
pub fn exact_distribution(n: usize, m: usize) -> Vec<u128> {
    // f[j][u]: arrangements of n' first-sample and j second-sample items,
    // built up over n'
    let top = n * m;
    let mut f = vec![vec![0u128; top + 1]; m + 1];
    for row in f.iter_mut() {
        row[0] = 1;
    }
    for _ in 1..=n {
        let mut g = vec![vec![0u128; top + 1]; m + 1];
        g[0][0] = 1;
        for j in 1..=m {
            for u in 0..=top {
                // largest item belongs to the first sample (beats all j) or to the second
                let from_a = if u >= j { f[j][u - j] } else { 0 };
                g[j][u] = from_a + g[j - 1][u];
            }
        }
        f = g;
    }
    f.swap_remove(m)
}

fn exact_p(u: f64, n: usize, m: usize) -> f64 {
    let counts = exact_distribution(n, m);
    let total: u128 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: u128 = counts[..=u].iter().sum();
    let upper: u128 = counts[u..].iter().sum();
    (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
}

fn normal_p(u: f64, n: usize, m: usize, ties: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let mu = nf * mf / 2.0;
    let var = nf * mf / 12.0 * ((big_n + 1.0) - ties / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * std.sf(z)).min(1.0)
}

/// Two-sided Mann-Whitney U test. The exact null distribution is used when
/// `n·m <= EXACT_LIMIT` and the pooled sample has no ties.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult, StatsError> {
    mann_whitney_with(a, b, None)
}

/// As [`mann_whitney_u`] with the method forced. Forcing `Exact` on tied
/// data is an error.
pub fn mann_whitney_with(a: &[f64], b: &[f64], method: Option<Method>) -> Result<UTestResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..n].iter().sum();
    let u = rank_sum - (n * (n + 1)) as f64 / 2.0;
    let method = match method {
        Some(Method::Exact) if ties > 0.0 => return Err(StatsError::TiesInExact),
        Some(m) => m,
        None if n * m <= EXACT_LIMIT && ties == 0.0 => Method::Exact,
        None => Method::NormalApprox,
    };
    let p = match method {
        Method::Exact => exact_p(u, n, m),
        Method::NormalApprox => normal_p(u, n, m, ties),
    };
    Ok(UTestResult {
        u,
        u_complement: (n * m) as f64 - u,
        p,
        mean_a: a.iter().sum::<f64>() / n as f64,
        mean_b: b.iter().sum::<f64>() / m as f64,
        n_a: n,
        n_b: m,
        method,
    })
}

#[cfg(test)]
mod tests {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn separated_triples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!((r.u, r.u_complement, r.method), (0.0, 9.0, Method::Exact));
        assert!((r.p - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identical_groups() {
        let r = mann_whitney_u(&[5.0; 3], &[5.0; 3]).unwrap();
        assert_eq!((r.u, r.p, r.method), (4.5, 1.0, Method::NormalApprox));
    }

    #[test]
    fn swapping_groups_complements_u() {
        let a = [3.1, 0.2, 7.7, 4.0, 4.0];
        let b = [1.0, 4.0, 9.5, 2.2];
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        assert_eq!(ba.u, ab.u_complement);
        assert_eq!(ba.p, ab.p);
    }

    #[test]
    fn distribution_sums_to_binomial() {
        let d = exact_distribution(20, 20);
        assert_eq!(d.iter().sum::<u128>(), 137_846_528_820);
        assert_eq!(d.len(), 401);
        assert_eq!(d[0], 1);
        assert_eq!(d[17], d[400 - 17]);
    }

    #[test]
    fn errors() {
        assert!(matches!(mann_whitney_u(&[], &[1.0]), Err(StatsError::EmptyGroup)));
        assert!(mann_whitney_with(&[1.0, 2.0], &[2.0], Some(Method::Exact)).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn normal_tracks_exact_at_fifteen() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut v: Vec<f64> = (0..30).map(f64::from).collect();
            v.shuffle(&mut rng);
            let (a, b) = v.split_at(15);
            let e = mann_whitney_with(a, b, Some(Method::Exact)).unwrap();
            let z = mann_whitney_with(a, b, Some(Method::NormalApprox)).unwrap();
            assert!((e.p - z.p).abs() < 0.01, "{} vs {}", e.p, z.p);
        }
    }
}
