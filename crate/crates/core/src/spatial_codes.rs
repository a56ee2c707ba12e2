//! Place and head-direction cell ensembles, the joint softmax observation model,
//! analytic hexagonal grid codes and the path-loss evaluators.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FrequencyVector, Pose, Vec2};

/// Numerically stable softmax over log-potentials.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceCellEnsemble {
    centers: Vec<Vec2>,
    widths: Vec<f64>,
}

impl PlaceCellEnsemble {
    pub fn new(centers: Vec<Vec2>, widths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("place cell ensemble must not be empty"));
        }
        if centers.len() != widths.len() {
            return Err(Error::invalid(format!(
                "{} centers but {} widths",
                centers.len(),
                widths.len()
            )));
        }
        if let Some(w) = widths.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::invalid(format!("place field width must be positive, got {w}")));
        }
        Ok(PlaceCellEnsemble { centers, widths })
    }

    /// `per_side²` cells on a uniform lattice covering `[0, extent]²`, all with width `sigma`.
    pub fn uniform_grid(per_side: usize, extent: f64, sigma: f64) -> Result<Self> {
        if per_side == 0 {
            return Err(Error::invalid("place cell lattice needs at least one cell per side"));
        }
        let step = extent / per_side as f64;
        let centers = (0..per_side)
            .flat_map(|j| (0..per_side).map(move |i| Vec2::new((i as f64 + 0.5) * step, (j as f64 + 0.5) * step)))
            .collect::<Vec<_>>();
        let widths = vec![sigma; centers.len()];
        Self::new(centers, widths)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Gaussian log-potentials `−‖r − μᵢ‖² / 2σᵢ²`.
    pub fn log_potentials(&self, r: &Vec2) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.widths)
            .map(|(mu, sigma)| -(r - mu).norm_squared() / (2.0 * sigma * sigma))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadDirectionEnsemble {
    preferred: Vec<f64>,
    concentration: Vec<f64>,
}

impl HeadDirectionEnsemble {
    pub fn new(preferred: Vec<f64>, concentration: Vec<f64>) -> Result<Self> {
        if preferred.is_empty() {
            return Err(Error::invalid("head direction ensemble must not be empty"));
        }
        if preferred.len() != concentration.len() {
            return Err(Error::invalid(format!(
                "{} preferred directions but {} concentrations",
                preferred.len(),
                concentration.len()
            )));
        }
        if let Some(k) = concentration.iter().find(|k| !(**k >= 0.0)) {
            return Err(Error::invalid(format!("concentration must be non-negative, got {k}")));
        }
        Ok(HeadDirectionEnsemble {
            preferred,
            concentration,
        })
    }

    /// `count` cells with evenly spaced preferred directions and a shared concentration.
    pub fn uniform(count: usize, kappa: f64) -> Result<Self> {
        let preferred = (0..count).map(|j| TAU * j as f64 / count as f64).collect();
        Self::new(preferred, vec![kappa; count])
    }

    pub fn len(&self) -> usize {
        self.preferred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preferred.is_empty()
    }

    /// Von Mises log-potentials `κⱼ cos(θ − φⱼ)`.
    pub fn log_potentials(&self, theta: f64) -> Vec<f64> {
        self.preferred
            .iter()
            .zip(&self.concentration)
            .map(|(phi, kappa)| kappa * (theta - phi).cos())
            .collect()
    }
}

/// Default ensemble sizes: 256 place cells over a 15 m square, 32 head-direction cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDefaults {
    pub place_cells_per_side: usize,
    pub arena_extent: f64,
    pub place_sigma: f64,
    pub hd_cells: usize,
    pub hd_kappa: f64,
}

impl Default for EnsembleDefaults {
    fn default() -> Self {
        EnsembleDefaults {
            place_cells_per_side: 16,
            arena_extent: 15.0,
            place_sigma: 0.5,
            hd_cells: 32,
            hd_kappa: 4.0,
        }
    }
}

impl EnsembleDefaults {
    pub fn build(&self) -> Result<(PlaceCellEnsemble, HeadDirectionEnsemble)> {
        Ok((
            PlaceCellEnsemble::uniform_grid(self.place_cells_per_side, self.arena_extent, self.place_sigma)?,
            HeadDirectionEnsemble::uniform(self.hd_cells, self.hd_kappa)?,
        ))
    }
}

/// Per-ensemble normalized Gaussian place activations.
pub fn place_activations(e: &PlaceCellEnsemble, r: &Vec2) -> Result<Vec<f64>> {
    if e.is_empty() {
        return Err(Error::invalid("empty place cell ensemble"));
    }
    Ok(softmax(&e.log_potentials(r)))
}

/// Per-ensemble normalized von Mises head-direction activations.
pub fn hd_activations(e: &HeadDirectionEnsemble, theta: f64) -> Result<Vec<f64>> {
    if e.is_empty() {
        return Err(Error::invalid("empty head direction ensemble"));
    }
    Ok(softmax(&e.log_potentials(theta)))
}

/// Joint softmax over all `N + M` cells: place log-potentials first, then head direction.
pub fn pose_cell_distribution(place: &PlaceCellEnsemble, hd: &HeadDirectionEnsemble, p: &Pose) -> Result<Vec<f64>> {
    if place.is_empty() || hd.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    let mut logits = place.log_potentials(&p.position);
    logits.extend(hd.log_potentials(p.heading()));
    Ok(softmax(&logits))
}

/// A set of equal-magnitude frequency vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCode {
    components: Vec<FrequencyVector>,
}

impl GridCode {
    pub fn new(components: Vec<FrequencyVector>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::invalid("grid code needs at least one component"));
        };
        let q = first.magnitude();
        if components.iter().any(|c| (c.magnitude() - q).abs() > 1e-12) {
            return Err(Error::invalid("grid code components must share one magnitude"));
        }
        Ok(GridCode { components })
    }

    /// `count` directions at `base_angle + 2πk/count`.
    pub fn evenly_spaced(count: usize, magnitude: f64, base_angle: f64) -> Result<Self> {
        let comps = (0..count)
            .map(|k| FrequencyVector::from_angle(base_angle + TAU * k as f64 / count as f64, magnitude))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    /// Two orthogonal components: the square (four-fold) lattice.
    pub fn square(magnitude: f64, base_angle: f64) -> Result<Self> {
        Self::new(vec![
            FrequencyVector::from_angle(base_angle, magnitude)?,
            FrequencyVector::from_angle(base_angle + PI / 2.0, magnitude)?,
        ])
    }

    pub fn components(&self) -> &[FrequencyVector] {
        &self.components
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn magnitude(&self) -> f64 {
        self.components[0].magnitude()
    }
}

/// Three directions 120° apart: the minimal isotropic code.
pub fn make_hex_code(magnitude: f64, base_angle: f64) -> Result<GridCode> {
    if !(magnitude > 0.0) {
        return Err(Error::invalid(format!("magnitude must be positive, got {magnitude}")));
    }
    GridCode::evenly_spaced(3, magnitude, base_angle)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    /// `‖Σ uⱼ‖₂`
    pub first_order_residual: f64,
    /// Spectral norm of `Σ uⱼuⱼᵀ − λI`.
    pub second_order_residual: f64,
    pub lambda: f64,
}

impl IsotropyReport {
    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.first_order_residual <= tol && self.second_order_residual <= tol
    }
}

/// Deviation of a code's unit directions from first- and second-order isotropy,
/// with `λ = K/2` (the only value compatible with `tr Σ uuᵀ = K`).
pub fn isotropy_check(code: &GridCode) -> IsotropyReport {
    let k = code.count() as f64;
    let lambda = k / 2.0;
    let mut sum = Vec2::zeros();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for comp in code.components() {
        let u = comp.direction();
        sum += u;
        a += u.x * u.x;
        b += u.x * u.y;
        c += u.y * u.y;
    }
    // Σuuᵀ − λI is symmetric with trace ≈ 0, so its eigenvalues are ±√(((a−c)/2)² + b²)
    // plus the trace offset
    let half_trace = (a + c) / 2.0 - lambda;
    let radius = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    IsotropyReport {
        first_order_residual: sum.norm(),
        second_order_residual: half_trace.abs() + radius,
        lambda,
    }
}

/// Interference pattern `A(r) = Σ cos(qⱼ · r)`.
pub fn hex_activity(code: &GridCode, r: &Vec2) -> f64 {
    code.components().iter().map(|q| q.phase(r).cos()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalWeightSchedule {
    pub w_init: f64,
    pub decay: f64,
    pub horizon: usize,
}

impl Default for TemporalWeightSchedule {
    fn default() -> Self {
        TemporalWeightSchedule {
            w_init: 5.0,
            decay: 0.8,
            horizon: 100,
        }
    }
}

impl TemporalWeightSchedule {
    pub fn new(w_init: f64, decay: f64, horizon: usize) -> Result<Self> {
        if !(w_init > 0.0) {
            return Err(Error::invalid(format!("w_init must be positive, got {w_init}")));
        }
        if !(decay > 0.0 && decay < 1.0) {
            return Err(Error::invalid(format!("decay must lie in (0, 1), got {decay}")));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(TemporalWeightSchedule { w_init, decay, horizon })
    }

    pub fn weight(&self, t: usize) -> f64 {
        match t {
            0 => 2.0 * self.w_init,
            1..=4 => self.w_init * self.decay.powi(t as i32 - 1),
            _ => 1.0,
        }
    }
}

/// Per-frame weights: heavy emphasis on the first frames, flat from frame 5 on.
pub fn temporal_weights(s: &TemporalWeightSchedule) -> Vec<f64> {
    (0..s.horizon).map(|t| s.weight(t)).collect()
}

/// `KL(p ‖ q) = Σ p log(p/q)` in nats.
pub fn categorical_kl(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", p.len(), q.len())));
    }
    for (name, dist) in [("p", p), ("q", q)] {
        if dist.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid(format!("{name} has negative or NaN entries")));
        }
        let s: f64 = dist.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("{name} sums to {s}, not 1")));
        }
    }
    let mut kl = 0.0;
    for (pi, qi) in p.iter().zip(q) {
        if *pi > 0.0 {
            if *qi <= 0.0 {
                return Err(Error::invalid("q must be positive wherever p is"));
            }
            kl += pi * (pi / qi).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// `Σₜ wₜ · KL(targetₜ ‖ predictedₜ)` over a sequence of frames.
pub fn weighted_sequence_kl(
    schedule: &TemporalWeightSchedule,
    targets: &[Vec<f64>],
    predicted: &[Vec<f64>],
) -> Result<f64> {
    if targets.len() != predicted.len() {
        return Err(Error::invalid("target and prediction sequences differ in length"));
    }
    targets
        .iter()
        .zip(predicted)
        .enumerate()
        .map(|(t, (p, q))| Ok(schedule.weight(t) * categorical_kl(p, q)?))
        .sum()
}
