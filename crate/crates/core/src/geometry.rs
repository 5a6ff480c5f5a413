//! Broadside stripmap acquisition geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::RadarConfig;

/// Platform height, speed, pointing and antenna apertures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformGeometry {
    pub height_m: f64,
    pub speed_mps: f64,
    /// Elevation pointing angle of the beam centre, radians.
    pub elevation_angle_rad: f64,
    pub aperture_az_m: f64,
    pub aperture_el_m: f64,
}

impl Default for PlatformGeometry {
    fn default() -> Self {
        Self {
            height_m: 1000.0,
            speed_mps: 50.0,
            elevation_angle_rad: std::f64::consts::FRAC_PI_4,
            aperture_az_m: 0.1,
            aperture_el_m: 0.1,
        }
    }
}

impl PlatformGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.height_m > 0.0) {
            return Err(SarError::InvalidParameter(format!(
                "height_m must be > 0, got {}",
                self.height_m
            )));
        }
        if !(self.speed_mps > 0.0) {
            return Err(SarError::InvalidParameter(format!(
                "speed_mps must be > 0, got {}",
                self.speed_mps
            )));
        }
        let th = self.elevation_angle_rad;
        if !(th > 0.0 && th < std::f64::consts::FRAC_PI_2) {
            return Err(SarError::InvalidParameter(format!(
                "elevation_angle_rad must lie in (0, π/2), got {th}"
            )));
        }
        if !(self.aperture_az_m > 0.0) || !(self.aperture_el_m > 0.0) {
            return Err(SarError::InvalidParameter(
                "antenna apertures must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Azimuth and elevation 3 dB beamwidths `0.886 λ / D` in radians.
pub fn beamwidths(wavelength: f64, geom: &PlatformGeometry) -> Result<(f64, f64)> {
    if !(wavelength > 0.0) {
        return Err(SarError::InvalidParameter(format!(
            "wavelength must be > 0, got {wavelength}"
        )));
    }
    if !(geom.aperture_az_m > 0.0) || !(geom.aperture_el_m > 0.0) {
        return Err(SarError::InvalidParameter(
            "antenna apertures must be > 0".into(),
        ));
    }
    Ok((
        0.886 * wavelength / geom.aperture_az_m,
        0.886 * wavelength / geom.aperture_el_m,
    ))
}

/// Ground footprint `(L_az, L_el)` of the beam.
///
/// Only the elevation angle and height of `geom` are used; `elevation_angle_rad`
/// may be zero here (nadir pointing) even though a full platform requires it to
/// be positive.
pub fn ground_coverage(geom: &PlatformGeometry, theta_az: f64, theta_el: f64) -> Result<(f64, f64)> {
    use std::f64::consts::FRAC_PI_2;
    let tc = geom.elevation_angle_rad;
    let upper = tc + theta_el / 2.0;
    let lower = tc - theta_el / 2.0;
    if upper >= FRAC_PI_2 {
        return Err(SarError::Geometry(format!(
            "elevation beam crosses the horizon: θc + θel/2 = {upper:.4} rad"
        )));
    }
    if lower <= -FRAC_PI_2 {
        return Err(SarError::Geometry(format!(
            "elevation beam lower edge out of range: {lower:.4} rad"
        )));
    }
    let h = geom.height_m;
    let l_az = 2.0 * h / tc.cos() * (theta_az / 2.0).tan();
    let l_el = h * (upper.tan() - lower.tan());
    Ok((l_az, l_el))
}

/// Slant-range evaluation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeModel {
    Exact,
    /// `R̄ + (v m T − y)² / (2 R̄)`.
    #[default]
    FirstOrder,
}

/// Closest-approach range `√(x² + H²)`.
pub fn closest_range(x_m: f64, height_m: f64) -> f64 {
    x_m.hypot(height_m)
}

/// Instantaneous range to ground point `(x, y)` at (full-rate) symbol index `m`.
pub fn slant_range(x_m: f64, y_m: f64, m: f64, cfg: &RadarConfig, mode: RangeModel) -> f64 {
    let h = cfg.platform.height_m;
    let along = cfg.platform.speed_mps * m * cfg.total_symbol_s() - y_m;
    match mode {
        RangeModel::Exact => (x_m * x_m + h * h + along * along).sqrt(),
        RangeModel::FirstOrder => {
            let r0 = closest_range(x_m, h);
            r0 + along * along / (2.0 * r0)
        }
    }
}

/// Ratio of envelope to phase correlation times (≫ 1 when the azimuth
/// envelope is slowly varying relative to the azimuth chirp).
pub fn lemma1_correlation_ratio(cfg: &RadarConfig, x_m: f64, y_m: f64) -> f64 {
    let r0 = closest_range(x_m, cfg.platform.height_m);
    let rho_r = cfg.range_pitch_m();
    let v = cfg.platform.speed_mps;
    let m = cfg.n_symbols() as f64;
    2.0 * std::f64::consts::PI * m * v * cfg.total_symbol_s() * ((2.0 * rho_r * r0).sqrt() + y_m)
        / (cfg.wavelength_m() * r0)
}
