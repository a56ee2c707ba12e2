use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::gridness::{
    best_gridness, build_rate_map, smooth_rate_map, spatial_autocorrelogram, synthetic_rate_map, Arena,
    Autocorrelogram, GridnessReport, RateMap, TrajectorySample, SCORE_ANGLES,
};
use crate::pgm::{scale_to_gray, write_pgm};
use crate::spatial_codes::make_hex_code;

/// Bins along the longer arena side when no bin size is given.
pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_SMOOTHING_BINS: f64 = 1.0;

/// Trajectory plus one activation column per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub samples: Vec<TrajectorySample>,
    pub units: Vec<String>,
    /// `activations[u][i]` is unit `u` at sample `i`.
    pub activations: Vec<Vec<f64>>,
}

pub fn parse_trajectory_csv(text: &str, path: &Path) -> Result<TrajectoryTable> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 5 || header[..4] != ["t", "x", "y", "dwell"] {
        return Err(parse_err("expected columns t,x,y,dwell,a_1..a_U".into()));
    }
    let units = header[4..].to_vec();
    let mut samples = Vec::new();
    let mut activations = vec![Vec::new(); units.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(format!("row {}: {e}", line + 2)))?;
        if values.len() != header.len() {
            return Err(parse_err(format!("row {} has {} fields", line + 2, values.len())));
        }
        samples.push(TrajectorySample {
            position: Vec2::new(values[1], values[2]),
            dwell: values[3],
        });
        for (u, a) in values[4..].iter().enumerate() {
            activations[u].push(*a);
        }
    }
    if samples.is_empty() {
        return Err(parse_err("no samples".into()));
    }
    Ok(TrajectoryTable {
        samples,
        units,
        activations,
    })
}

/// Bounding box of the visited positions.
pub fn arena_of(samples: &[TrajectorySample]) -> Result<Arena> {
    let (mut lo, mut hi) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for s in samples {
        lo = Vec2::new(lo.x.min(s.position.x), lo.y.min(s.position.y));
        hi = Vec2::new(hi.x.max(s.position.x), hi.y.max(s.position.y));
    }
    Arena::new(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitAnalysis {
    pub unit: String,
    /// `None` when no annulus gives a defined score, e.g. a unit with flat activity.
    pub report: Option<GridnessReport>,
}

pub struct UnitMaps {
    pub rate_map: RateMap,
    pub sac: Autocorrelogram,
}

pub fn analyze_unit(
    samples: &[TrajectorySample],
    activations: &[f64],
    arena: &Arena,
    bin_size: f64,
) -> Result<(Option<GridnessReport>, UnitMaps)> {
    let raw = build_rate_map(samples, activations, arena, bin_size)?;
    let rate_map = smooth_rate_map(&raw, DEFAULT_SMOOTHING_BINS)?;
    let sac = spatial_autocorrelogram(&rate_map)?;
    let report = match best_gridness(&sac) {
        Ok(r) => Some(r),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((report, UnitMaps { rate_map, sac }))
}

pub const REPORT_HEADER: [&str; 14] = [
    "unit", "g60", "g90", "r_min_60", "r_max_60", "r_min_90", "r_max_90", "c30", "c45", "c60", "c90", "c120", "c135",
    "c150",
];

fn report_record(unit: &str, r: Option<&GridnessReport>) -> Vec<String> {
    let Some(r) = r else {
        let mut row = vec![String::new(); REPORT_HEADER.len()];
        row[0] = unit.to_string();
        return row;
    };
    let mut row = vec![
        unit.to_string(),
        format!("{:.6}", r.g60),
        format!("{:.6}", r.g90),
        r.best_annulus_60.r_min.to_string(),
        r.best_annulus_60.r_max.to_string(),
        r.best_annulus_90.r_min.to_string(),
        r.best_annulus_90.r_max.to_string(),
    ];
    row.extend(
        SCORE_ANGLES
            .iter()
            .map(|a| r.ring_correlations.get(a).map_or(String::new(), |c| format!("{c:.6}"))),
    );
    row
}

pub fn write_report_csv(path: &Path, rows: &[UnitAnalysis]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(REPORT_HEADER).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record(report_record(&r.unit, r.report.as_ref()))
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

fn write_map(path: &Path, rows: usize, cols: usize, values: &[Option<f64>]) -> Result<()> {
    write_pgm(path, cols, rows, &scale_to_gray(values))
}

/// Scores every unit of a trajectory file and writes `gridness.csv` plus rate-map
/// and autocorrelogram images.
pub fn analyze_trajectory_file(traj: &Path, out: &Path, bin_size: Option<f64>) -> Result<Vec<UnitAnalysis>> {
    let text = std::fs::read_to_string(traj).map_err(|e| Error::io(traj, e))?;
    let table = parse_trajectory_csv(&text, traj)?;
    let arena = arena_of(&table.samples)?;
    let extent = arena.max - arena.min;
    let bin = bin_size.unwrap_or(extent.x.max(extent.y) / DEFAULT_BINS as f64);
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut results = Vec::with_capacity(table.units.len());
    for (unit, acts) in table.units.iter().zip(&table.activations) {
        let (report, maps) = analyze_unit(&table.samples, acts, &arena, bin)?;
        let stem: String = unit
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' })
            .collect();
        write_map(
            &out.join(format!("rate_{stem}.pgm")),
            maps.rate_map.rows(),
            maps.rate_map.cols(),
            maps.rate_map.bins(),
        )?;
        write_map(
            &out.join(format!("sac_{stem}.pgm")),
            maps.sac.rows(),
            maps.sac.cols(),
            maps.sac.values(),
        )?;
        results.push(UnitAnalysis {
            unit: unit.clone(),
            report,
        });
    }
    write_report_csv(&out.join("gridness.csv"), &results)?;
    Ok(results)
}

/// Synthetic hexagonal unit sampled on a `side × side` grid of unit bins.
pub fn hexcode_demo(magnitude: f64, side: usize, out: &Path) -> Result<GridnessReport> {
    let code = make_hex_code(magnitude, 0.0)?;
    let map = synthetic_rate_map(&code, side, 1.0)?;
    let sac = spatial_autocorrelogram(&map)?;
    let report = best_gridness(&sac)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_map(&out.join("rate_map.pgm"), map.rows(), map.cols(), map.bins())?;
    write_map(&out.join("sac.pgm"), sac.rows(), sac.cols(), sac.values())?;
    write_report_csv(
        &out.join("gridness.csv"),
        &[UnitAnalysis {
            unit: "hex".into(),
            report: Some(report.clone()),
        }],
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_columns() {
        let text = "t,x,y,dwell,a_1,a_2\n0,0.5,0.5,1,2.0,0\n1,1.5,0.5,1,1.0,3\n";
        let t = parse_trajectory_csv(text, Path::new("x.csv")).unwrap();
        assert_eq!(t.units, vec!["a_1", "a_2"]);
        assert_eq!(t.samples.len(), 2);
        assert_eq!(t.activations[1], vec![0.0, 3.0]);
    }

    #[test]
    fn rejects_malformed() {
        for text in ["x,y\n1,2\n", "t,x,y,dwell,a_1\n0,1,1,1,zz\n", "t,x,y,dwell,a_1\n"] {
            assert!(parse_trajectory_csv(text, Path::new("x.csv")).is_err(), "{text}");
        }
    }
}
