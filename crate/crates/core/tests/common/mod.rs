#![allow(dead_code)]

use ndarray::Array2;
use ofdmsar::{AmplitudeMode, Complex64, PointTarget, RadarConfig, Scene, SymbolGrid};

/// Range-bin height used by the critically sampled desk grids.
pub const DESK_RANGE_BIN: usize = 13;

pub fn desk(n: usize, m: usize) -> RadarConfig {
    RadarConfig::critical_desk(n, m, DESK_RANGE_BIN)
}

pub fn on_grid(cfg: &RadarConfig, k: f64, j: f64, rcs: f64, mode: AmplitudeMode) -> PointTarget {
    PointTarget::new(cfg.ground_x_for_bin(k).unwrap(), cfg.ground_y_for_column(j), rcs, mode)
}

/// Single target at the desk range bin and the given column.
pub fn desk_scene(cfg: &RadarConfig, column: f64, mode: AmplitudeMode) -> Scene {
    Scene::from_targets(vec![on_grid(cfg, DESK_RANGE_BIN as f64, column, 1.0, mode)])
}

/// 512 subcarriers, 2 s aperture, every 47th symbol.
pub fn table_lite() -> RadarConfig {
    let mut cfg = RadarConfig::table_one();
    cfg.n_subcarriers = 512;
    cfg.azimuth_downsample = 47;
    cfg
}

pub fn ones(cfg: &RadarConfig) -> SymbolGrid {
    SymbolGrid {
        data: Array2::from_elem((cfg.n_subcarriers, cfg.az_count()), Complex64::new(1.0, 0.0)),
        mask: None,
    }
}

pub fn snr_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Vertex of the parabola through the three samples around `i` (circular).
pub fn parabolic_peak(v: &[f64], i: usize) -> f64 {
    let n = v.len();
    let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
    let den = a - 2.0 * b + c;
    if den == 0.0 {
        i as f64
    } else {
        i as f64 + 0.5 * (a - c) / den
    }
}

/// Index of the largest sample within `±radius` of `centre` (circular).
pub fn local_max_near(v: &[f64], centre: f64, radius: usize) -> usize {
    let n = v.len() as i64;
    let c = centre.round() as i64;
    (c - radius as i64..=c + radius as i64)
        .map(|i| i.rem_euclid(n) as usize)
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .unwrap()
}

/// Signed circular distance `to − from` folded into `[−n/2, n/2)`.
pub fn circular_offset(from: f64, to: f64, n: usize) -> f64 {
    let n = n as f64;
    (to - from + n / 2.0).rem_euclid(n) - n / 2.0
}

pub fn db(ratio: f64) -> f64 {
    20.0 * ratio.log10()
}
