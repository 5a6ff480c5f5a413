use ndarray::Axis;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use std::f64::consts::PI;

use super::{fft, ImageGrid, KaMode, Stage};
use crate::error::{Result, SarError};
use crate::RadarConfig;

/// Unitary forward DFT over columns; Doppler bins stored centred.
pub fn azimuth_fft(mut img: ImageGrid, cfg: &RadarConfig) -> Result<ImageGrid> {
    img.expect(Stage::Rc)?;
    fft::unitary_dft_axis(&mut img.data, Axis(1), FftDirection::Forward);
    fft::fftshift_axis(&mut img.data, Axis(1));
    img.stage = Stage::Rd;
    img.axes.doppler_pitch_hz = cfg.doppler_pitch_hz();
    img.axes.zero_doppler_bin = cfg.az_count() / 2;
    Ok(img)
}

/// Column index `m̃` whose azimuth phase is stationary at signed Doppler bin `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub column: f64,
    pub in_aperture: bool,
}

pub fn stationary_point(p: f64, cfg: &RadarConfig, closest_range_m: f64, y_m: f64) -> Result<StationaryPoint> {
    let ka = cfg.chirp_rate(closest_range_m);
    if !(ka > 0.0) || !ka.is_finite() {
        return Err(SarError::InvalidParameter(format!(
            "azimuth chirp rate must be positive, got {ka}"
        )));
    }
    let t = cfg.az_interval_s();
    let m = cfg.az_count() as f64;
    let column = -p / (m * t * t * ka) + y_m / (cfg.platform.speed_mps * t);
    Ok(StationaryPoint {
        column,
        in_aperture: (0.0..m).contains(&column),
    })
}

/// Range migration in bins at signed Doppler bin `p`, evaluated at `reference_range_m`.
pub fn rcm_shift(p: f64, cfg: &RadarConfig, reference_range_m: f64) -> f64 {
    let v = cfg.platform.speed_mps;
    let ka = cfg.chirp_rate(reference_range_m);
    let bw = ka * cfg.az_count() as f64 * cfg.az_interval_s();
    v * v * p * p / (2.0 * reference_range_m * bw * bw * cfg.range_pitch_m())
}

/// Remove the azimuth chirp `e^{jπp²/(M²T²K_a)}` and return to the time domain.
pub fn azimuth_compress(
    mut img: ImageGrid,
    cfg: &RadarConfig,
    reference_range_m: f64,
    ka_mode: KaMode,
) -> Result<ImageGrid> {
    img.expect(Stage::Rcmc)?;
    if !(reference_range_m > 0.0) {
        return Err(SarError::InvalidParameter(format!(
            "reference range must be > 0, got {reference_range_m}"
        )));
    }
    let m = cfg.az_count();
    let t = cfg.az_interval_s();
    let rho = cfg.range_pitch_m();
    let ka_ref = cfg.chirp_rate(reference_range_m);
    img.data
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(k, mut row)| {
            let ka = match ka_mode {
                KaMode::Reference => ka_ref,
                KaMode::PerRangeBin if k > 0 => cfg.chirp_rate(k as f64 * rho),
                KaMode::PerRangeBin => ka_ref,
            };
            let c = PI / ((m * m) as f64 * t * t * ka);
            for (b, v) in row.iter_mut().enumerate() {
                let p = fft::signed_index(b, m) as f64;
                *v *= Complex64::from_polar(1.0, -c * p * p);
            }
        });
    fft::ifftshift_axis(&mut img.data, Axis(1));
    fft::unitary_dft_axis(&mut img.data, Axis(1), FftDirection::Inverse);
    img.stage = Stage::Ac;
    img.axes.az_pitch_m = cfg.az_pitch_m();
    Ok(img)
}
