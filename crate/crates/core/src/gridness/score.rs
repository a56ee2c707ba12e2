use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::autocorr::Autocorrelogram;
use crate::error::{Error, Result};

/// Minimum number of paired annulus pixels for a defined ring correlation.
pub const MIN_RING_PIXELS: usize = 8;

/// Angles entering the G60 and G90 contrasts, in degrees.
pub const SCORE_ANGLES: [u32; 7] = [30, 45, 60, 90, 120, 135, 150];

/// Annulus `r_min ≤ |d| ≤ r_max` in bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub r_min: usize,
    pub r_max: usize,
}

impl AnnulusSpec {
    pub fn new(r_min: usize, r_max: usize) -> Result<Self> {
        if r_min == 0 || r_min >= r_max {
            return Err(Error::invalid(format!(
                "annulus needs 0 < r_min < r_max, got ({r_min}, {r_max})"
            )));
        }
        Ok(AnnulusSpec { r_min, r_max })
    }

    fn check_fits(&self, sac: &Autocorrelogram) -> Result<()> {
        if self.r_max > sac.half_extent() {
            return Err(Error::invalid(format!(
                "r_max {} exceeds correlogram half-extent {}",
                self.r_max,
                sac.half_extent()
            )));
        }
        Ok(())
    }
}

/// Candidate annuli: `r_min` in `r_min_lo..=r_min_hi`, `r_max` from `r_min + min_width`
/// up to the correlogram half-extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSearch {
    pub r_min_lo: usize,
    pub r_min_hi: usize,
    pub min_width: usize,
}

impl Default for AnnulusSearch {
    fn default() -> Self {
        AnnulusSearch {
            r_min_lo: 2,
            r_min_hi: 6,
            min_width: 3,
        }
    }
}

impl AnnulusSearch {
    pub fn candidates(&self, half_extent: usize) -> Vec<AnnulusSpec> {
        let mut out = Vec::new();
        for r_min in self.r_min_lo.max(1)..=self.r_min_hi {
            for r_max in (r_min + self.min_width.max(1))..=half_extent {
                out.push(AnnulusSpec { r_min, r_max });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridnessReport {
    pub g60: f64,
    pub g90: f64,
    pub best_annulus_60: AnnulusSpec,
    pub best_annulus_90: AnnulusSpec,
    /// `C_θ` on `best_annulus_60`, keyed by degrees.
    pub ring_correlations: BTreeMap<u32, f64>,
}

fn rotated_sample(sac: &Autocorrelogram, dx: isize, dy: isize, angle_deg: f64) -> Option<f64> {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (x, y) = (dx as f64, dy as f64);
    sac.sample(c * x - s * y, s * x + c * y)
}

/// Pixel offsets with `r_min² ≤ |d|² ≤ r_max²`.
fn annulus_offsets(a: &AnnulusSpec) -> impl Iterator<Item = (isize, isize)> {
    let r = a.r_max as isize;
    let (lo, hi) = ((a.r_min * a.r_min) as isize, r * r);
    (-r..=r)
        .flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(move |(dx, dy)| {
            let dd = dx * dx + dy * dy;
            dd >= lo && dd <= hi
        })
}

#[derive(Debug, Clone, Copy, Default)]
struct RingSums {
    n: usize,
    s: f64,
    ss: f64,
    t: f64,
    st: f64,
}

impl RingSums {
    fn add(&mut self, s: f64, t: f64) {
        self.n += 1;
        self.s += s;
        self.ss += s * s;
        self.t += t;
        self.st += s * t;
    }

    fn sub(&self, o: &RingSums) -> RingSums {
        RingSums {
            n: self.n - o.n,
            s: self.s - o.s,
            ss: self.ss - o.ss,
            t: self.t - o.t,
            st: self.st - o.st,
        }
    }

    /// `Σ(S − s̄)(Sθ − s̄) / Σ(S − s̄)²` with `s̄` the mean of `S` over the paired pixels.
    fn correlation(&self) -> Option<f64> {
        if self.n < MIN_RING_PIXELS {
            return None;
        }
        let n = self.n as f64;
        let mean = self.s / n;
        let den = self.ss - n * mean * mean;
        if den <= 1e-12 * self.ss.max(f64::MIN_POSITIVE) {
            return None;
        }
        Some((self.st - mean * self.t) / den)
    }
}

/// Correlation between the annulus and the correlogram rotated by `angle` degrees,
/// with one shared mean taken over the annulus.
pub fn ring_correlation(sac: &Autocorrelogram, annulus: &AnnulusSpec, angle: f64) -> Result<f64> {
    annulus.check_fits(sac)?;
    let pairs: Vec<(f64, f64)> = annulus_offsets(annulus)
        .filter_map(|(dx, dy)| Some((sac.get(dx, dy)?, rotated_sample(sac, dx, dy, angle)?)))
        .collect();
    if pairs.len() < MIN_RING_PIXELS {
        return Err(Error::InsufficientData(format!(
            "annulus ({}, {}) has {} valid pixels at {angle}°",
            annulus.r_min,
            annulus.r_max,
            pairs.len()
        )));
    }
    let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut raw = 0.0;
    for (s, t) in &pairs {
        num += (s - mean) * (t - mean);
        den += (s - mean) * (s - mean);
        raw += s * s;
    }
    if den <= 1e-12 * raw.max(f64::MIN_POSITIVE) {
        return Err(Error::InsufficientData(format!(
            "correlogram is constant on annulus ({}, {})",
            annulus.r_min, annulus.r_max
        )));
    }
    Ok(num / den)
}

fn g60_from(c: impl Fn(u32) -> Result<f64>) -> Result<f64> {
    Ok((c(60)? + c(120)?) / 2.0 - (c(30)? + c(90)? + c(150)?) / 3.0)
}

fn g90_from(c: impl Fn(u32) -> Result<f64>) -> Result<f64> {
    Ok(c(90)? - (c(45)? + c(135)?) / 2.0)
}

/// `(C60 + C120)/2 − (C30 + C90 + C150)/3`
pub fn gridness_60(sac: &Autocorrelogram, annulus: &AnnulusSpec) -> Result<f64> {
    g60_from(|a| ring_correlation(sac, annulus, a as f64))
}

/// `C90 − (C45 + C135)/2`
pub fn gridness_90(sac: &Autocorrelogram, annulus: &AnnulusSpec) -> Result<f64> {
    g90_from(|a| ring_correlation(sac, annulus, a as f64))
}

/// Cumulative ring sums over squared radius for every score angle, so any annulus
/// reduces to a difference of two prefix entries.
struct RingTables {
    prefix: BTreeMap<u32, Vec<RingSums>>,
}

impl RingTables {
    fn new(sac: &Autocorrelogram) -> Self {
        let half = sac.half_extent() as isize;
        let max_dd = (half * half) as usize;
        let mut prefix = BTreeMap::new();
        for angle in SCORE_ANGLES {
            let mut buckets = vec![RingSums::default(); max_dd + 1];
            for dy in -half..=half {
                for dx in -half..=half {
                    let dd = (dx * dx + dy * dy) as usize;
                    if dd > max_dd {
                        continue;
                    }
                    if let (Some(s), Some(t)) = (sac.get(dx, dy), rotated_sample(sac, dx, dy, angle as f64)) {
                        buckets[dd].add(s, t);
                    }
                }
            }
            let mut acc = RingSums::default();
            let cumulative = buckets
                .into_iter()
                .map(|b| {
                    acc.n += b.n;
                    acc.s += b.s;
                    acc.ss += b.ss;
                    acc.t += b.t;
                    acc.st += b.st;
                    acc
                })
                .collect();
            prefix.insert(angle, cumulative);
        }
        RingTables { prefix }
    }

    fn correlation(&self, a: &AnnulusSpec, angle: u32) -> Result<f64> {
        let table = &self.prefix[&angle];
        let hi = table[a.r_max * a.r_max];
        let lo = table[a.r_min * a.r_min - 1];
        hi.sub(&lo)
            .correlation()
            .ok_or_else(|| Error::InsufficientData(format!("annulus ({}, {}) undefined at {angle}°", a.r_min, a.r_max)))
    }
}

pub fn best_gridness(sac: &Autocorrelogram) -> Result<GridnessReport> {
    best_gridness_with(sac, &AnnulusSearch::default())
}

/// Maximizes G60 and, independently, G90 over the annulus search set.
pub fn best_gridness_with(sac: &Autocorrelogram, search: &AnnulusSearch) -> Result<GridnessReport> {
    let tables = RingTables::new(sac);
    let mut best60: Option<(f64, AnnulusSpec)> = None;
    let mut best90: Option<(f64, AnnulusSpec)> = None;
    for a in search.candidates(sac.half_extent()) {
        if let Ok(g) = g60_from(|ang| tables.correlation(&a, ang)) {
            if best60.is_none_or(|(b, _)| g > b) {
                best60 = Some((g, a));
            }
        }
        if let Ok(g) = g90_from(|ang| tables.correlation(&a, ang)) {
            if best90.is_none_or(|(b, _)| g > b) {
                best90 = Some((g, a));
            }
        }
    }
    let (Some((_, a60)), Some((_, a90))) = (best60, best90) else {
        return Err(Error::InsufficientData(
            "no annulus yields a defined gridness score".into(),
        ));
    };
    // report the exact direct-route values for the winning annuli
    let mut ring_correlations = BTreeMap::new();
    for angle in SCORE_ANGLES {
        ring_correlations.insert(angle, ring_correlation(sac, &a60, angle as f64)?);
    }
    Ok(GridnessReport {
        g60: gridness_60(sac, &a60)?,
        g90: gridness_90(sac, &a90)?,
        best_annulus_60: a60,
        best_annulus_90: a90,
        ring_correlations,
    })
}
