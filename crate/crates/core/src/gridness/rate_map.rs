use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Axis-aligned rectangle `[min, max]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub min: Vec2,
    pub max: Vec2,
}

impl Arena {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self> {
        if !(max.x > min.x && max.y > min.y) {
            return Err(Error::invalid("arena max must exceed min on both axes"));
        }
        Ok(Arena { min, max })
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(Vec2::zeros(), Vec2::new(side, side))
    }
}

/// Occupancy-normalized firing rate map. Row index follows y, column index follows x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMap {
    rows: usize,
    cols: usize,
    bins: Vec<Option<f64>>,
    visit_time: Vec<f64>,
    bin_size: f64,
    origin: Vec2,
}

impl RateMap {
    /// Builds a map directly from per-bin rates; `None` marks unvisited bins,
    /// visited bins get unit dwell.
    pub fn from_rates(rows: usize, cols: usize, rates: Vec<Option<f64>>, bin_size: f64) -> Result<Self> {
        if rates.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "expected {}×{} = {} rates, got {}",
                rows,
                cols,
                rows * cols,
                rates.len()
            )));
        }
        if !(bin_size > 0.0) {
            return Err(Error::invalid("bin_size must be positive"));
        }
        let visit_time = rates.iter().map(|r| if r.is_some() { 1.0 } else { 0.0 }).collect();
        Ok(RateMap {
            rows,
            cols,
            bins: rates,
            visit_time,
            bin_size,
            origin: Vec2::zeros(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bin_size(&self) -> f64 {
        self.bin_size
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn bins(&self) -> &[Option<f64>] {
        &self.bins
    }

    pub fn visit_time(&self) -> &[f64] {
        &self.visit_time
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.bins[row * self.cols + col]
    }

    pub fn visited_count(&self) -> usize {
        self.bins.iter().filter(|b| b.is_some()).count()
    }

    /// Quarter turn counter-clockwise: bin `(r, c)` moves to `(cols−1−c, r)`.
    pub fn rotate90(&self) -> RateMap {
        let (rows, cols) = (self.cols, self.rows);
        let mut bins = vec![None; rows * cols];
        let mut visit_time = vec![0.0; rows * cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (nr, nc) = (self.cols - 1 - c, r);
                bins[nr * cols + nc] = self.bins[r * self.cols + c];
                visit_time[nr * cols + nc] = self.visit_time[r * self.cols + c];
            }
        }
        RateMap {
            rows,
            cols,
            bins,
            visit_time,
            bin_size: self.bin_size,
            origin: self.origin,
        }
    }
}

/// One trajectory sample: where the agent was and for how long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub position: Vec2,
    pub dwell: f64,
}

/// `R = S / O` with `S` the summed activation and `O` the summed dwell per bin.
/// Samples outside the arena are ignored.
pub fn build_rate_map(
    trajectory: &[TrajectorySample],
    activations: &[f64],
    arena: &Arena,
    bin_size: f64,
) -> Result<RateMap> {
    if trajectory.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    if trajectory.len() != activations.len() {
        return Err(Error::invalid(format!(
            "{} trajectory samples but {} activations",
            trajectory.len(),
            activations.len()
        )));
    }
    if !(bin_size > 0.0) {
        return Err(Error::invalid("bin_size must be positive"));
    }
    let extent = arena.max - arena.min;
    let cols = (extent.x / bin_size).ceil() as usize;
    let rows = (extent.y / bin_size).ceil() as usize;
    let mut activation = vec![0.0; rows * cols];
    let mut occupancy = vec![0.0; rows * cols];

    for (s, a) in trajectory.iter().zip(activations) {
        if s.dwell < 0.0 || !s.dwell.is_finite() {
            return Err(Error::invalid(format!("dwell must be non-negative, got {}", s.dwell)));
        }
        let rel = s.position - arena.min;
        if rel.x < 0.0 || rel.y < 0.0 || rel.x > extent.x || rel.y > extent.y {
            continue;
        }
        let c = ((rel.x / bin_size) as usize).min(cols - 1);
        let r = ((rel.y / bin_size) as usize).min(rows - 1);
        activation[r * cols + c] += a;
        occupancy[r * cols + c] += s.dwell;
    }

    let bins = activation
        .iter()
        .zip(&occupancy)
        .map(|(s, o)| (*o > 0.0).then(|| s / o))
        .collect();
    Ok(RateMap {
        rows,
        cols,
        bins,
        visit_time: occupancy,
        bin_size,
        origin: arena.min,
    })
}

/// Missing-aware Gaussian blur: each visited bin becomes the kernel-weighted mean of
/// its visited neighbors. Unvisited bins stay missing.
pub fn smooth_rate_map(m: &RateMap, sigma_bins: f64) -> Result<RateMap> {
    if !(sigma_bins >= 0.0) {
        return Err(Error::invalid(format!("sigma must be non-negative, got {sigma_bins}")));
    }
    if sigma_bins == 0.0 {
        return Ok(m.clone());
    }
    let radius = (3.0 * sigma_bins).ceil() as isize;
    let width = (2 * radius + 1) as usize;
    let kernel: Vec<f64> = (-radius..=radius)
        .flat_map(|dy| {
            (-radius..=radius).map(move |dx| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_bins * sigma_bins)).exp())
        })
        .collect();

    let (rows, cols) = (m.rows as isize, m.cols as isize);
    let mut out = vec![None; m.bins.len()];
    for r in 0..rows {
        for c in 0..cols {
            if m.bins[(r * cols + c) as usize].is_none() {
                continue;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -radius..=radius {
                let rr = r + dy;
                if rr < 0 || rr >= rows {
                    continue;
                }
                for dx in -radius..=radius {
                    let cc = c + dx;
                    if cc < 0 || cc >= cols {
                        continue;
                    }
                    if let Some(v) = m.bins[(rr * cols + cc) as usize] {
                        let w = kernel[(dy + radius) as usize * width + (dx + radius) as usize];
                        num += w * v;
                        den += w;
                    }
                }
            }
            out[(r * cols + c) as usize] = Some(num / den);
        }
    }
    Ok(RateMap { bins: out, ..m.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(x: f64, y: f64, dwell: f64) -> TrajectorySample {
        TrajectorySample {
            position: Vec2::new(x, y),
            dwell,
        }
    }

    #[test]
    fn single_sample_rate() {
        let arena = Arena::square(2.0).unwrap();
        let m = build_rate_map(&[sample(0.5, 0.5, 0.5)], &[2.0], &arena, 1.0).unwrap();
        assert_eq!(m.get(0, 0), Some(4.0));
        assert_eq!(m.get(1, 1), None);
        assert_eq!(m.visit_time()[0], 0.5);
    }

    #[test]
    fn constant_activation_unit_dwell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let arena = Arena::square(5.0).unwrap();
        let traj: Vec<_> = (0..200)
            .map(|_| sample(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), 1.0))
            .collect();
        let acts = vec![0.75; traj.len()];
        let m = build_rate_map(&traj, &acts, &arena, 1.0).unwrap();
        for b in m.bins().iter().flatten() {
            assert_abs_diff_eq!(*b, 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn missing_exactly_where_unvisited() {
        let arena = Arena::square(3.0).unwrap();
        let m = build_rate_map(
            &[sample(0.1, 0.1, 1.0), sample(2.9, 1.5, 2.0)],
            &[1.0, 1.0],
            &arena,
            1.0,
        )
        .unwrap();
        for (b, o) in m.bins().iter().zip(m.visit_time()) {
            assert_eq!(b.is_none(), *o == 0.0);
        }
        assert_eq!(m.visited_count(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        let arena = Arena::square(1.0).unwrap();
        assert!(build_rate_map(&[], &[], &arena, 0.1).is_err());
        assert!(build_rate_map(&[sample(0.0, 0.0, 1.0)], &[], &arena, 0.1).is_err());
        assert!(build_rate_map(&[sample(0.0, 0.0, 1.0)], &[1.0], &arena, 0.0).is_err());
    }

    #[test]
    fn smoothing_identity_and_constant() {
        let rates: Vec<_> = (0..25)
            .map(|i| if i % 7 == 3 { None } else { Some(i as f64) })
            .collect();
        let m = RateMap::from_rates(5, 5, rates, 1.0).unwrap();
        assert_eq!(smooth_rate_map(&m, 0.0).unwrap(), m);

        let flat = RateMap::from_rates(6, 6, vec![Some(2.5); 36], 1.0).unwrap();
        let s = smooth_rate_map(&flat, 1.3).unwrap();
        for b in s.bins() {
            assert_abs_diff_eq!(b.unwrap(), 2.5, epsilon = 1e-12);
        }
        assert!(smooth_rate_map(&m, -1.0).is_err());
    }

    #[test]
    fn smoothing_conserves_spike_mass() {
        let side = 21;
        let mut rates = vec![Some(0.0); side * side];
        rates[10 * side + 10] = Some(7.0);
        let m = RateMap::from_rates(side, side, rates, 1.0).unwrap();
        let s = smooth_rate_map(&m, 1.5).unwrap();
        let total: f64 = s.bins().iter().map(|b| b.unwrap()).sum();
        assert_abs_diff_eq!(total, 7.0, epsilon = 1e-9);
    }

    #[test]
    fn smoothing_keeps_missing_mask() {
        let rates: Vec<_> = (0..49)
            .map(|i| if i % 5 == 0 { None } else { Some(1.0 + i as f64) })
            .collect();
        let m = RateMap::from_rates(7, 7, rates, 1.0).unwrap();
        let s = smooth_rate_map(&m, 1.0).unwrap();
        for (a, b) in m.bins().iter().zip(s.bins()) {
            assert_eq!(a.is_none(), b.is_none());
        }
    }
}
