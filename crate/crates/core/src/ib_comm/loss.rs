use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::OccupancyImage;
use crate::error::{Error, Result};

/// Probability clamp applied before taking logs in the cross-entropy.
pub const BCE_EPS: f64 = 1e-7;

/// Diagonal Gaussian posterior `q(z) = N(μ, diag σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLatent {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl GaussianLatent {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::invalid(format!(
                "mean has {} dims but variance has {}",
                mean.len(),
                variance.len()
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("latent mean must be finite"));
        }
        if let Some(v) = variance.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!("variance must be positive, got {v}")));
        }
        Ok(GaussianLatent { mean, variance })
    }

    pub fn standard(dim: usize) -> Self {
        GaussianLatent {
            mean: vec![0.0; dim],
            variance: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }
}

/// `KL(q ‖ N(0, I)) = ½ Σ (μ² + σ² − 1 − ln σ²)` in nats.
pub fn gaussian_kl(latent: &GaussianLatent) -> f64 {
    latent
        .mean
        .iter()
        .zip(&latent.variance)
        .map(|(m, v)| {
            let x = v - 1.0;
            // x − ln(1 + x) ≥ 0; ln_1p keeps it accurate near the prior
            0.5 * (m * m + (x - x.ln_1p()).max(0.0))
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Sample mean of `ln q(z) − ln p(z)` for `z ~ q`.
pub fn kl_monte_carlo(latent: &GaussianLatent, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(Error::invalid(format!("need at least 1000 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_log_var: Vec<f64> = latent.variance.iter().map(|v| 0.5 * v.ln()).collect();
    let sd: Vec<f64> = latent.variance.iter().map(|v| v.sqrt()).collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let mut log_ratio = 0.0;
        for k in 0..latent.dim() {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let z = latent.mean[k] + sd[k] * eps;
            // ln q − ln p; the 2π terms cancel
            log_ratio += -half_log_var[k] - 0.5 * eps * eps + 0.5 * z * z;
        }
        sum += log_ratio;
        sum_sq += log_ratio * log_ratio;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// Pixel-wise binary cross-entropy `−Σ [y ln ŷ + (1 − y) ln(1 − ŷ)]`, with `ŷ`
/// clamped to `[ε, 1 − ε]`.
pub fn reconstruction_bce(target: &OccupancyImage, predicted: &OccupancyImage) -> Result<f64> {
    if target.rows() != predicted.rows() || target.cols() != predicted.cols() {
        return Err(Error::invalid(format!(
            "shape mismatch: {}×{} vs {}×{}",
            target.rows(),
            target.cols(),
            predicted.rows(),
            predicted.cols()
        )));
    }
    Ok(target
        .values()
        .iter()
        .zip(predicted.values())
        .map(|(y, p)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibLossReport {
    pub reconstruction: f64,
    pub rate: f64,
    pub beta: f64,
    pub total: f64,
}

/// `reconstruction + β · rate`.
pub fn vib_loss(
    target: &OccupancyImage,
    predicted: &OccupancyImage,
    latent: &GaussianLatent,
    beta: f64,
) -> Result<VibLossReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let reconstruction = reconstruction_bce(target, predicted)?;
    let rate = gaussian_kl(latent);
    Ok(VibLossReport {
        reconstruction,
        rate,
        beta,
        total: reconstruction + beta * rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn image(side: usize, values: Vec<f64>) -> OccupancyImage {
        OccupancyImage::new(side, side, values).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(gaussian_kl(&GaussianLatent::standard(5)), 0.0);
        let one = GaussianLatent::new(vec![1.0], vec![1.0]).unwrap();
        assert_abs_diff_eq!(gaussian_kl(&one), 0.5, epsilon = 1e-15);
        let wide = GaussianLatent::new(vec![0.0], vec![2.0]).unwrap();
        assert_abs_diff_eq!(gaussian_kl(&wide), 0.5 * (1.0 - 2f64.ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(gaussian_kl(&wide), 0.15343, epsilon = 1e-5);
    }

    #[test]
    fn latent_validation() {
        assert!(GaussianLatent::new(vec![0.0], vec![0.0]).is_err());
        assert!(GaussianLatent::new(vec![0.0], vec![-1.0]).is_err());
        assert!(GaussianLatent::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GaussianLatent::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn monte_carlo_prior_and_determinism() {
        let prior = GaussianLatent::standard(4);
        let e = kl_monte_carlo(&prior, 10_000, 5).unwrap();
        assert!(e.estimate.abs() <= 3.0 * e.std_error + 1e-15);
        let again = kl_monte_carlo(&prior, 10_000, 5).unwrap();
        assert_eq!(e.estimate.to_bits(), again.estimate.to_bits());
        assert!(kl_monte_carlo(&prior, 999, 5).is_err());
    }

    #[test]
    fn monte_carlo_tracks_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for i in 0..5 {
            let dim = rng.random_range(1..=8);
            let mean = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let var = (0..dim).map(|_| rng.random_range(0.2..3.0)).collect();
            let l = GaussianLatent::new(mean, var).unwrap();
            let e = kl_monte_carlo(&l, 20_000, i).unwrap();
            assert!((e.estimate - gaussian_kl(&l)).abs() <= 4.0 * e.std_error);
        }
    }

    #[test]
    fn bce_examples() {
        let t = image(2, vec![0.0, 1.0, 1.0, 0.0]);
        let perfect = bce_direct(&t, &t);
        assert!(reconstruction_bce(&t, &t).unwrap() <= 4.0 * 1e-5);
        assert_abs_diff_eq!(reconstruction_bce(&t, &t).unwrap(), perfect, epsilon = 1e-12);
        let half = image(2, vec![0.5; 4]);
        assert_abs_diff_eq!(reconstruction_bce(&t, &half).unwrap(), 4.0 * 2f64.ln(), epsilon = 1e-12);
        let other = OccupancyImage::new(1, 4, vec![0.5; 4]).unwrap();
        assert!(reconstruction_bce(&t, &other).is_err());
    }

    fn bce_direct(t: &OccupancyImage, p: &OccupancyImage) -> f64 {
        let mut s = 0.0;
        for i in 0..t.values().len() {
            let q = p.values()[i].clamp(1e-7, 1.0 - 1e-7);
            let y = t.values()[i];
            s -= y * q.ln() + (1.0 - y) * (1.0 - q).ln();
        }
        s
    }

    #[test]
    fn bce_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let t = image(6, (0..36).map(|_| rng.random_range(0.0..=1.0)).collect());
            let p = image(6, (0..36).map(|_| rng.random_range(0.0..=1.0)).collect());
            assert_abs_diff_eq!(reconstruction_bce(&t, &p).unwrap(), bce_direct(&t, &p), epsilon = 1e-9);
        }
    }

    #[test]
    fn vib_assembly() {
        let t = image(2, vec![0.0, 1.0, 1.0, 0.0]);
        let p = image(2, vec![0.2, 0.7, 0.9, 0.4]);
        let l = GaussianLatent::new(vec![0.3, -0.1], vec![0.8, 1.4]).unwrap();
        let r1 = vib_loss(&t, &p, &l, 0.5).unwrap();
        let r2 = vib_loss(&t, &p, &l, 1.0).unwrap();
        assert_eq!(r1.total, r1.reconstruction + 0.5 * r1.rate);
        assert_abs_diff_eq!(
            r2.total - r2.reconstruction,
            2.0 * (r1.total - r1.reconstruction),
            epsilon = 1e-12
        );
        let tiny = vib_loss(&t, &p, &l, 1e-300).unwrap();
        assert_eq!(tiny.total, tiny.reconstruction);
        let zero = vib_loss(&t, &t, &GaussianLatent::standard(3), 2.0).unwrap();
        assert!(zero.total <= 4.0 * 1e-5);
        assert!(vib_loss(&t, &p, &l, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn kl_non_negative(m in proptest::collection::vec(-5.0..5.0f64, 1..8), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = m.iter().map(|_| rng.random_range(0.01..10.0)).collect();
            let l = GaussianLatent::new(m, v).unwrap();
            prop_assert!(gaussian_kl(&l) >= 0.0);
        }

        #[test]
        fn kl_vanishes_only_near_prior(m in proptest::collection::vec(-1e-7..1e-7f64, 1..8), dv in -1e-7..1e-7f64) {
            let v = vec![1.0 + dv; m.len()];
            let l = GaussianLatent::new(m.clone(), v).unwrap();
            prop_assert!(gaussian_kl(&l) <= 1e-12);

            let mut far = m;
            far[0] += 1e-3;
            let l = GaussianLatent::new(far.clone(), vec![1.0; far.len()]).unwrap();
            prop_assert!(gaussian_kl(&l) > 1e-12);
        }
    }
}
