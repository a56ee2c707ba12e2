use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Midpoint median; NaN for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn resample(xs: &[f64], rng: &mut ChaCha8Rng, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend((0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]));
}

/// Percentile bootstrap interval of `stat` at coverage `1 − alpha`.
pub fn bootstrap_ci(xs: &[f64], stat: fn(&[f64]) -> f64, resamples: usize, alpha: f64, seed: u64) -> Interval {
    if xs.is_empty() || resamples == 0 {
        return Interval {
            lo: f64::NAN,
            hi: f64::NAN,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(xs.len());
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            resample(xs, &mut rng, &mut buf);
            stat(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let at = |q: f64| stats[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Interval {
        lo: at(alpha / 2.0),
        hi: at(1.0 - alpha / 2.0),
    }
}

/// One-sided paired bootstrap p-value for `stat(a) − stat(b) > 0`. Pairs are
/// resampled jointly; the p-value is the fraction of resamples with a difference ≤ 0.
pub fn paired_bootstrap_p(a: &[f64], b: &[f64], stat: fn(&[f64]) -> f64, resamples: usize, seed: u64) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    if a.is_empty() || resamples == 0 {
        return 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ra, mut rb) = (Vec::with_capacity(a.len()), Vec::with_capacity(b.len()));
    let mut not_greater = 0usize;
    for _ in 0..resamples {
        ra.clear();
        rb.clear();
        for _ in 0..a.len() {
            let i = rng.random_range(0..a.len());
            ra.push(a[i]);
            rb.push(b[i]);
        }
        if stat(&ra) - stat(&rb) <= 0.0 {
            not_greater += 1;
        }
    }
    not_greater as f64 / resamples as f64
}
