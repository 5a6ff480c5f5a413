use ndarray::Axis;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use std::f64::consts::PI;

use super::{fft, rcm_shift, ImageGrid, RcmcMethod, Stage};
use crate::error::{Result, SarError};
use crate::{sinc, RadarConfig};

/// Interpolation taps for reading position `k0 + frac` from samples
/// `k0 − halfwidth + 1 ..= k0 + halfwidth`.
///
/// The range spectrum occupies subcarriers `0..n`, so the baseband kernel is
/// modulated to the band centre `(n − 1)/2`. Window weights are normalised to
/// unit sum before modulation.
pub fn windowed_sinc_taps(frac: f64, halfwidth: usize, n: usize) -> Vec<Complex64> {
    let hw = halfwidth as f64;
    let lo = 1 - halfwidth as i64;
    let raw: Vec<f64> = (lo..=halfwidth as i64)
        .map(|i| {
            let x = i as f64 - frac;
            let w = if x.abs() < hw {
                0.5 * (1.0 + (PI * x / hw).cos())
            } else {
                0.0
            };
            sinc(x) * w
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    let centre = (n as f64 - 1.0) / 2.0;
    raw.iter()
        .zip(lo..)
        .map(|(&h, i)| {
            let x = i as f64 - frac;
            Complex64::from_polar(h / sum, -2.0 * PI * centre * x / n as f64)
        })
        .collect()
}

/// Shift every Doppler column by `−Δk(p)` in range so that migrating
/// trajectories line up at the closest-approach bin. Range indexing is circular.
pub fn rcmc(
    mut img: ImageGrid,
    cfg: &RadarConfig,
    reference_range_m: f64,
    method: RcmcMethod,
) -> Result<ImageGrid> {
    img.expect(Stage::Rd)?;
    if !(reference_range_m > 0.0) && method != RcmcMethod::None {
        return Err(SarError::InvalidParameter(format!(
            "reference range must be > 0, got {reference_range_m}"
        )));
    }
    let (n, m) = img.data.dim();
    match method {
        RcmcMethod::None => {}
        RcmcMethod::WindowedSinc { halfwidth } => {
            if halfwidth == 0 {
                return Err(SarError::InvalidParameter(
                    "windowed_sinc halfwidth must be >= 1".into(),
                ));
            }
            img.data
                .axis_iter_mut(Axis(1))
                .into_par_iter()
                .enumerate()
                .for_each(|(b, mut col)| {
                    let shift = rcm_shift(fft::signed_index(b, m) as f64, cfg, reference_range_m);
                    let src: Vec<Complex64> = col.iter().copied().collect();
                    let whole = shift.floor();
                    let frac = shift - whole;
                    let base = whole as i64;
                    let ni = n as i64;
                    if frac < 1e-12 {
                        for (k, v) in col.iter_mut().enumerate() {
                            *v = src[(k as i64 + base).rem_euclid(ni) as usize];
                        }
                        return;
                    }
                    let taps = windowed_sinc_taps(frac, halfwidth, n);
                    let lo = 1 - halfwidth as i64;
                    for (k, v) in col.iter_mut().enumerate() {
                        let k0 = k as i64 + base;
                        *v = taps
                            .iter()
                            .zip(lo..)
                            .map(|(t, i)| t * src[(k0 + i).rem_euclid(ni) as usize])
                            .sum();
                    }
                });
        }
        RcmcMethod::PhaseRamp => {
            fft::unitary_dft_axis(&mut img.data, Axis(0), FftDirection::Forward);
            img.data
                .axis_iter_mut(Axis(1))
                .into_par_iter()
                .enumerate()
                .for_each(|(b, mut col)| {
                    let shift = rcm_shift(fft::signed_index(b, m) as f64, cfg, reference_range_m);
                    for (sub, v) in col.iter_mut().enumerate() {
                        *v *= Complex64::from_polar(1.0, 2.0 * PI * sub as f64 * shift / n as f64);
                    }
                });
            fft::unitary_dft_axis(&mut img.data, Axis(0), FftDirection::Inverse);
        }
    }
    img.stage = Stage::Rcmc;
    Ok(img)
}
