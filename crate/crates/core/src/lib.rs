//! Simulation and analysis of data-aided OFDM synthetic-aperture-radar imaging.
//!
//! The pipeline mirrors a stripmap range-Doppler processor fed by a
//! communication waveform:
//!
//! 1. [`echo::synthesize_echo`] builds the subcarrier × symbol echo grid
//!    `Y = H ⊙ S + Z` for a [`scene::Scene`] and a random [`waveform::SymbolGrid`].
//! 2. [`tf_filter::apply_tf_filter`] removes the data symbols (reciprocal,
//!    matched or Wiener filtering).
//! 3. [`imaging`] performs range compression, the azimuth FFT, range cell
//!    migration correction in the range-Doppler domain and azimuth compression.
//! 4. [`metrics`] scores the focused image of a reference point target
//!    (ISLR, PEL, output SNR, NMSE).
//!
//! [`oracle`] holds brute-force least-squares references and [`scenario`]
//! drives complete runs from a JSON configuration.

// Negated comparisons are how validation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod echo;
pub mod error;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod scenario;
pub mod scene;
pub mod tf_filter;
pub mod waveform;

pub use num_complex::Complex64;

pub use config::RadarConfig;
pub use echo::{build_channel_matrix, synthesize_echo, EchoGrid};
pub use error::{Result, SarError};
pub use geometry::{PlatformGeometry, RangeModel};
pub use imaging::{ChainOptions, ImageGrid, KaMode, RcmcMethod, Stage};
pub use metrics::MetricsReport;
pub use scene::{AmplitudeMode, PointTarget, Scene};
pub use tf_filter::{apply_tf_filter, FilterKind, FilterSpec};
pub use waveform::{Constellation, SrsConfig, SymbolGrid};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex grid, rows indexed by subcarrier / range bin, columns by
/// symbol / azimuth / Doppler bin.
pub type Grid = ndarray::Array2<Complex64>;

/// `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub(crate) fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
