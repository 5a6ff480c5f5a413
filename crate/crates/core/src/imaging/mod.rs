//! Range-Doppler focusing of filtered temporal-frequency grids.
//!
//! Stages run strictly in order `tf → rc → rd → rcmc → ac`:
//!
//! * [`range_compress`]: unitary inverse DFT over subcarriers.
//! * [`azimuth_fft`]: unitary forward DFT over columns, Doppler axis centred.
//! * [`rcmc`]: per-Doppler-column range shift by the migration `Δk(p)`.
//! * [`azimuth_compress`]: azimuth chirp removal and unitary inverse DFT.
//!
//! All transforms work on the decimated azimuth axis, so `M` and the column
//! interval are [`RadarConfig::az_count`] and [`RadarConfig::az_interval_s`].

mod azimuth;
pub mod fft;
mod range;
mod rcmc;
mod spa;

pub use azimuth::{azimuth_compress, azimuth_fft, rcm_shift, stationary_point, StationaryPoint};
pub use range::range_compress;
pub use rcmc::{rcmc, windowed_sinc_taps};
pub use spa::{spa_spectrum, SpaValue};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Result, SarError};
use crate::{Grid, RadarConfig};

/// Processing stage of an [`ImageGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Tf,
    Rc,
    Rd,
    Rcmc,
    Ac,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Tf => "tf",
            Stage::Rc => "rc",
            Stage::Rd => "rd",
            Stage::Rcmc => "rcmc",
            Stage::Ac => "ac",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis metadata of an image grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    /// Range-bin pitch `c / (2 N Δf)`.
    pub range_pitch_m: f64,
    /// Along-track distance between columns in the time domain.
    pub az_pitch_m: f64,
    /// Doppler bin spacing in the Doppler domain.
    pub doppler_pitch_hz: f64,
    /// Column holding zero Doppler when `stage` is `rd` or `rcmc`.
    pub zero_doppler_bin: usize,
}

impl Axes {
    pub fn from_config(cfg: &RadarConfig) -> Self {
        Self {
            range_pitch_m: cfg.range_pitch_m(),
            az_pitch_m: cfg.az_pitch_m(),
            doppler_pitch_hz: cfg.doppler_pitch_hz(),
            zero_doppler_bin: cfg.az_count() / 2,
        }
    }
}

/// Complex range-bin × azimuth (or Doppler) grid tagged with its stage.
#[derive(Debug, Clone)]
pub struct ImageGrid {
    pub data: Grid,
    pub stage: Stage,
    pub axes: Axes,
}

impl ImageGrid {
    /// Wrap a filtered temporal-frequency grid.
    pub fn from_tf(data: Grid, cfg: &RadarConfig) -> Result<Self> {
        let dims = (cfg.n_subcarriers, cfg.az_count());
        if data.dim() != dims {
            return Err(SarError::DimensionMismatch {
                expected: dims,
                got: data.dim(),
            });
        }
        Ok(Self {
            data,
            stage: Stage::Tf,
            axes: Axes::from_config(cfg),
        })
    }

    pub(crate) fn expect(&self, stage: Stage) -> Result<()> {
        if self.stage != stage {
            return Err(SarError::Stage {
                expected: stage.to_string(),
                got: self.stage.to_string(),
            });
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        fft::energy(&self.data)
    }

    /// Position `(row, column)` of the largest magnitude.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut bv = -1.0;
        for ((k, m), v) in self.data.indexed_iter() {
            let a = v.norm_sqr();
            if a > bv {
                bv = a;
                best = (k, m);
            }
        }
        best
    }
}

/// Range cell migration correction interpolator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum RcmcMethod {
    /// Truncated sinc with a raised-cosine window over `2·halfwidth` taps,
    /// circular in range.
    WindowedSinc { halfwidth: usize },
    /// Exact fractional shift by a linear phase across the range spectrum.
    PhaseRamp,
    /// Skip the correction (the column is passed through).
    None,
}

impl Default for RcmcMethod {
    fn default() -> Self {
        RcmcMethod::WindowedSinc { halfwidth: 8 }
    }
}

/// Which range the azimuth chirp rate is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KaMode {
    /// One chirp rate at the reference range for every row.
    #[default]
    Reference,
    /// Chirp rate at each row's own range `k·ρ_r`.
    PerRangeBin,
}

/// Options of a full focusing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub reference_range_m: f64,
    pub rcmc: RcmcMethod,
    pub ka_mode: KaMode,
}

impl ChainOptions {
    pub fn new(reference_range_m: f64) -> Self {
        Self {
            reference_range_m,
            rcmc: RcmcMethod::default(),
            ka_mode: KaMode::default(),
        }
    }
}

/// Intermediate products of [`focus_stages`].
#[derive(Debug, Clone)]
pub struct ChainProducts {
    pub rc: ImageGrid,
    pub rd: ImageGrid,
    pub rcmc: ImageGrid,
    pub ac: ImageGrid,
}

/// Focus a filtered grid to the final complex image.
pub fn focus(tf: Grid, cfg: &RadarConfig, opts: &ChainOptions) -> Result<ImageGrid> {
    let img = ImageGrid::from_tf(tf, cfg)?;
    let rc = range_compress(img, cfg)?;
    let rd = azimuth_fft(rc, cfg)?;
    let cm = rcmc(rd, cfg, opts.reference_range_m, opts.rcmc)?;
    azimuth_compress(cm, cfg, opts.reference_range_m, opts.ka_mode)
}

/// Focus and keep every intermediate stage.
pub fn focus_stages(tf: Grid, cfg: &RadarConfig, opts: &ChainOptions) -> Result<ChainProducts> {
    let img = ImageGrid::from_tf(tf, cfg)?;
    let rc = range_compress(img, cfg)?;
    let rd = azimuth_fft(rc.clone(), cfg)?;
    let cm = rcmc(rd.clone(), cfg, opts.reference_range_m, opts.rcmc)?;
    let ac = azimuth_compress(cm.clone(), cfg, opts.reference_range_m, opts.ka_mode)?;
    Ok(ChainProducts {
        rc,
        rd,
        rcmc: cm,
        ac,
    })
}
