//! Information-bottleneck loss evaluators and the fixed-rate map codec.

mod codec;
mod loss;

pub use codec::{decode_map, encode_map, grid_side_for_budget, Message, MessageHeader, HEADER_BYTES};
pub use loss::{
    gaussian_kl, kl_monte_carlo, reconstruction_bce, vib_loss, GaussianLatent, McEstimate, VibLossReport, BCE_EPS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major image of occupancy probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyImage {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl OccupancyImage {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {rows}×{cols} non-empty image, got {} values",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("occupancy value {v} outside [0, 1]")));
        }
        Ok(OccupancyImage { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}
