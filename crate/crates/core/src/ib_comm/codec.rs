use serde::{Deserialize, Serialize};

use super::OccupancyImage;
use crate::error::{Error, Result};

/// Header size on the wire: u16 + u8 + u16 + u16 + u32.
pub const HEADER_BYTES: usize = 11;

/// Fixed-rate occupancy message. Payload bits are row-major, one bit per cell,
/// `true` meaning occupied or not known to be free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    payload: Vec<bool>,
    grid_side: u16,
    bits_per_cell: u8,
    pub sender: (u16, u16),
    pub timestamp: u32,
}

impl Message {
    pub fn new(payload: Vec<bool>, grid_side: u16, sender: (u16, u16), timestamp: u32) -> Result<Self> {
        if grid_side == 0 {
            return Err(Error::invalid("grid_side must be positive"));
        }
        if payload.len() != grid_side as usize * grid_side as usize {
            return Err(Error::invalid(format!(
                "payload has {} bits, expected {}",
                payload.len(),
                grid_side as usize * grid_side as usize
            )));
        }
        Ok(Message {
            payload,
            grid_side,
            bits_per_cell: 1,
            sender,
            timestamp,
        })
    }

    pub fn with_origin(mut self, sender: (u16, u16), timestamp: u32) -> Self {
        self.sender = sender;
        self.timestamp = timestamp;
        self
    }

    pub fn payload(&self) -> &[bool] {
        &self.payload
    }

    pub fn grid_side(&self) -> u16 {
        self.grid_side
    }

    pub fn bits_per_cell(&self) -> u8 {
        self.bits_per_cell
    }

    pub fn payload_bits(&self) -> usize {
        self.payload.len()
    }

    pub fn bit(&self, row: usize, col: usize) -> bool {
        self.payload[row * self.grid_side as usize + col]
    }

    pub fn header(&self) -> MessageHeader {
        MessageHeader {
            grid_side: self.grid_side,
            bits_per_cell: self.bits_per_cell,
            sender_x: self.sender.0,
            sender_y: self.sender.1,
            timestamp: self.timestamp,
            payload_bits: self.payload.len(),
        }
    }

    /// Little-endian header followed by MSB-first packed payload, zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.payload.len().div_ceil(8));
        out.extend_from_slice(&self.grid_side.to_le_bytes());
        out.push(self.bits_per_cell);
        out.extend_from_slice(&self.sender.0.to_le_bytes());
        out.extend_from_slice(&self.sender.1.to_le_bytes());
        out.extend_from_slice(&self.timestamp.to_le_bytes());
        for chunk in self.payload.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |b, (i, bit)| if *bit { b | (0x80 >> i) } else { b });
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::invalid(format!("message too short: {} bytes", bytes.len())));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let grid_side = u16_at(0);
        let bits_per_cell = bytes[2];
        if bits_per_cell != 1 {
            return Err(Error::invalid(format!("unsupported bits_per_cell {bits_per_cell}")));
        }
        let sender = (u16_at(3), u16_at(5));
        let timestamp = u32::from_le_bytes([bytes[7], bytes[8], bytes[9], bytes[10]]);
        let n_bits = grid_side as usize * grid_side as usize;
        let body = &bytes[HEADER_BYTES..];
        if body.len() != n_bits.div_ceil(8) {
            return Err(Error::invalid(format!(
                "payload has {} bytes, expected {}",
                body.len(),
                n_bits.div_ceil(8)
            )));
        }
        let payload: Vec<bool> = (0..n_bits).map(|i| body[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        if !n_bits.is_multiple_of(8) && body[body.len() - 1] & (0xff >> (n_bits % 8)) != 0 {
            return Err(Error::invalid("nonzero padding bits"));
        }
        Message::new(payload, grid_side, sender, timestamp)
    }
}

/// What the episode log records for each sent message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageHeader {
    pub grid_side: u16,
    pub bits_per_cell: u8,
    pub sender_x: u16,
    pub sender_y: u16,
    pub timestamp: u32,
    pub payload_bits: usize,
}

/// Largest `k` with `k² ≤ budget`.
pub fn grid_side_for_budget(budget_bits: usize) -> usize {
    let mut k = (budget_bits as f64).sqrt() as usize;
    while k * k > budget_bits {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= budget_bits {
        k += 1;
    }
    k
}

/// Pixels `r` with `⌊r·k/n⌋ = i`, the same partition [`decode_map`] reads back.
/// When `k > n` an empty block borrows the pixel it would be sampled at.
fn block_range(i: usize, k: usize, n: usize) -> (usize, usize) {
    let start = (i * n).div_ceil(k);
    let end = ((i + 1) * n).div_ceil(k).min(n);
    if start >= end {
        let p = (i * n / k).min(n - 1);
        return (p, p + 1);
    }
    (start, end)
}

/// Downsamples to `k × k` blocks and binarizes each by majority (ties count as occupied).
pub fn encode_map(belief: &OccupancyImage, budget_bits: usize) -> Result<Message> {
    if budget_bits < 1 {
        return Err(Error::invalid("bit budget must be at least 1"));
    }
    let k = grid_side_for_budget(budget_bits).min(u16::MAX as usize);
    let mut payload = Vec::with_capacity(k * k);
    for bi in 0..k {
        let (r0, r1) = block_range(bi, k, belief.rows());
        for bj in 0..k {
            let (c0, c1) = block_range(bj, k, belief.cols());
            let mut sum = 0.0;
            for r in r0..r1 {
                for c in c0..c1 {
                    sum += belief.get(r, c);
                }
            }
            let count = ((r1 - r0) * (c1 - c0)) as f64;
            payload.push(sum >= 0.5 * count);
        }
    }
    debug_assert!(payload.len() <= budget_bits);
    Message::new(payload, k as u16, (0, 0), 0)
}

/// Nearest-neighbor upsampling of the payload to `target_side × target_side`.
pub fn decode_map(msg: &Message, target_side: usize) -> OccupancyImage {
    let k = msg.grid_side() as usize;
    let values = (0..target_side)
        .flat_map(|r| (0..target_side).map(move |c| (r, c)))
        .map(|(r, c)| {
            if msg.bit(r * k / target_side, c * k / target_side) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    OccupancyImage::new(target_side, target_side, values).expect("binary values are valid")
}
