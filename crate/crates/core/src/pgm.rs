//! Binary 8-bit grayscale images (P5).

use std::path::Path;

use crate::error::{Error, Result};
use crate::world::{BeliefMap, BeliefState};

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height || width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "{} pixels for a {width}×{height} image",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let bytes = encode_pgm(width, height, pixels)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Header fields and pixel data of a P5 image.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::invalid("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::invalid("not an 8-bit P5 image"));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad PGM dimension {s:?}")))
    };
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = bytes.get(pos + 1..).unwrap_or_default();
    if data.len() != w * h {
        return Err(Error::invalid("PGM pixel count does not match header"));
    }
    Ok((w, h, data.to_vec()))
}

/// Linear map of finite values onto 1..=255; missing values become 0.
pub fn scale_to_gray(values: &[Option<f64>]) -> Vec<u8> {
    let finite = values.iter().flatten().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    values
        .iter()
        .map(|v| match v {
            Some(x) if x.is_finite() => {
                if hi > lo {
                    1 + ((x - lo) / (hi - lo) * 254.0).round() as u8
                } else {
                    128
                }
            }
            _ => 0,
        })
        .collect()
}

pub fn belief_gray(state: BeliefState) -> u8 {
    match state {
        BeliefState::Unknown => 0,
        BeliefState::Wall => 64,
        BeliefState::Free => 192,
        BeliefState::Target => 255,
    }
}

pub fn belief_pixels(belief: &BeliefMap) -> Vec<u8> {
    belief.cells().iter().map(|c| belief_gray(c.state)).collect()
}
