use serde::{Deserialize, Serialize};

use super::rate_map::RateMap;
use crate::error::{Error, Result};

/// Minimum number of overlapping valid bins for a defined correlation.
pub const DEFAULT_MIN_OVERLAP: usize = 20;

/// Spatial autocorrelogram indexed by integer offset `(dx, dy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelogram {
    rows: usize,
    cols: usize,
    values: Vec<Option<f64>>,
}

impl Autocorrelogram {
    /// Builds a correlogram from a `(2·half_y+1) × (2·half_x+1)` grid whose center is offset zero.
    pub fn from_values(rows: usize, cols: usize, values: Vec<Option<f64>>) -> Result<Self> {
        if rows.is_multiple_of(2) || cols.is_multiple_of(2) || values.len() != rows * cols {
            return Err(Error::invalid(
                "correlogram dimensions must be odd and match the value count",
            ));
        }
        Ok(Autocorrelogram { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// `(row, col)` of offset zero.
    pub fn center_index(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }

    pub fn max_dx(&self) -> isize {
        (self.cols / 2) as isize
    }

    pub fn max_dy(&self) -> isize {
        (self.rows / 2) as isize
    }

    /// Largest annulus radius that stays inside the correlogram.
    pub fn half_extent(&self) -> usize {
        self.rows.min(self.cols) / 2
    }

    pub fn get(&self, dx: isize, dy: isize) -> Option<f64> {
        if dx.abs() > self.max_dx() || dy.abs() > self.max_dy() {
            return None;
        }
        let r = (dy + self.max_dy()) as usize;
        let c = (dx + self.max_dx()) as usize;
        self.values[r * self.cols + c]
    }

    fn set(&mut self, dx: isize, dy: isize, v: Option<f64>) {
        let r = (dy + self.max_dy()) as usize;
        let c = (dx + self.max_dx()) as usize;
        self.values[r * self.cols + c] = v;
    }

    /// Bilinear sample at a real-valued offset. Missing if any neighbor carrying
    /// nonzero weight is missing or out of range.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let snap = |v: f64| {
            let r = v.round();
            if (v - r).abs() < 1e-9 {
                r
            } else {
                v
            }
        };
        let (x, y) = (snap(x), snap(y));
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0 as isize, y0 as isize);
        let mut acc = 0.0;
        for (ox, wx) in [(0, 1.0 - fx), (1, fx)] {
            if wx == 0.0 {
                continue;
            }
            for (oy, wy) in [(0, 1.0 - fy), (1, fy)] {
                if wy == 0.0 {
                    continue;
                }
                acc += wx * wy * self.get(ix + ox, iy + oy)?;
            }
        }
        Some(acc)
    }
}

pub fn spatial_autocorrelogram(m: &RateMap) -> Result<Autocorrelogram> {
    spatial_autocorrelogram_with(m, DEFAULT_MIN_OVERLAP)
}

/// Pearson correlation between the map and its shifted copy at every offset,
/// using means and deviations over the overlapping valid bins only.
pub fn spatial_autocorrelogram_with(m: &RateMap, min_overlap: usize) -> Result<Autocorrelogram> {
    if m.visited_count() < 2 {
        return Err(Error::InsufficientData(
            "rate map needs at least two visited bins".into(),
        ));
    }
    let (rows, cols) = (m.rows() as isize, m.cols() as isize);
    let values: Vec<f64> = m.bins().iter().map(|b| b.unwrap_or(0.0)).collect();
    let valid: Vec<bool> = m.bins().iter().map(|b| b.is_some()).collect();
    let mut sac = Autocorrelogram {
        rows: (2 * rows - 1) as usize,
        cols: (2 * cols - 1) as usize,
        values: vec![None; ((2 * rows - 1) * (2 * cols - 1)) as usize],
    };

    // SAC(d) = SAC(−d): compute dy > 0, or dy = 0 with dx ≥ 0, then mirror
    for dy in 0..rows {
        let dx_start = if dy == 0 { 0 } else { -(cols - 1) };
        for dx in dx_start..cols {
            let v = correlation_at(&values, &valid, rows, cols, dx, dy, min_overlap);
            sac.set(dx, dy, v);
            sac.set(-dx, -dy, v);
        }
    }
    Ok(sac)
}

fn correlation_at(
    values: &[f64],
    valid: &[bool],
    rows: isize,
    cols: isize,
    dx: isize,
    dy: isize,
    min_overlap: usize,
) -> Option<f64> {
    let (r0, r1) = (0.max(-dy), rows.min(rows - dy));
    let (c0, c1) = (0.max(-dx), cols.min(cols - dx));
    let mut n = 0usize;
    let (mut sa, mut sb) = (0.0, 0.0);
    for r in r0..r1 {
        for c in c0..c1 {
            let i = (r * cols + c) as usize;
            let j = ((r + dy) * cols + c + dx) as usize;
            if valid[i] && valid[j] {
                n += 1;
                sa += values[i];
                sb += values[j];
            }
        }
    }
    if n < min_overlap.max(2) {
        return None;
    }
    let (ma, mb) = (sa / n as f64, sb / n as f64);
    let (mut sab, mut saa, mut sbb, mut raw_a, mut raw_b) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in r0..r1 {
        for c in c0..c1 {
            let i = (r * cols + c) as usize;
            let j = ((r + dy) * cols + c + dx) as usize;
            if valid[i] && valid[j] {
                let (a, b) = (values[i] - ma, values[j] - mb);
                sab += a * b;
                saa += a * a;
                sbb += b * b;
                raw_a += values[i] * values[i];
                raw_b += values[j] * values[j];
            }
        }
    }
    // relative threshold: constant overlaps leave only rounding noise in the deviations
    if saa <= 1e-20 * raw_a.max(f64::MIN_POSITIVE) || sbb <= 1e-20 * raw_b.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
