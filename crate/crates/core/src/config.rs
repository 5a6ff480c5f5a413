//! Waveform, timing and platform parameters with derived quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::geometry::PlatformGeometry;
use crate::SPEED_OF_LIGHT;

/// OFDM signalling and acquisition parameters.
///
/// The azimuth axis processed by the imaging chain is the decimated one:
/// every `azimuth_downsample`-th symbol is kept, so the chain sees
/// [`az_count`](Self::az_count) columns spaced [`az_interval_s`](Self::az_interval_s) apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub fc_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub cp_duration_s: f64,
    /// Useful symbol duration; defaults to `1/Δf`.
    #[serde(default)]
    pub symbol_duration_s: Option<f64>,
    pub aperture_time_s: f64,
    pub n_subcarriers: usize,
    #[serde(default = "one")]
    pub azimuth_downsample: usize,
    #[serde(default)]
    pub platform: PlatformGeometry,
    /// Per-element complex noise variance.
    #[serde(default)]
    pub noise_var: f64,
}

fn one() -> usize {
    1
}

impl RadarConfig {
    /// 3.5 GHz / 30 kHz numerology over a 2 s aperture, one symbol in ten kept.
    pub fn table_one() -> Self {
        let df = 30e3;
        Self {
            fc_hz: 3.5e9,
            bandwidth_hz: 100e6,
            subcarrier_spacing_hz: df,
            cp_duration_s: 1.0 / (4.0 * df),
            symbol_duration_s: None,
            aperture_time_s: 2.0,
            n_subcarriers: 3276,
            azimuth_downsample: 10,
            platform: PlatformGeometry::default(),
            noise_var: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SarError::InvalidParameter(m));
        if !(self.fc_hz > 0.0) {
            return bad(format!("fc_hz must be > 0, got {}", self.fc_hz));
        }
        if !(self.subcarrier_spacing_hz > 0.0) {
            return bad(format!(
                "subcarrier_spacing_hz must be > 0, got {}",
                self.subcarrier_spacing_hz
            ));
        }
        if !(self.cp_duration_s >= 0.0) {
            return bad(format!("cp_duration_s must be >= 0, got {}", self.cp_duration_s));
        }
        if let Some(tp) = self.symbol_duration_s {
            let want = 1.0 / self.subcarrier_spacing_hz;
            if ((tp - want) / want).abs() > 1e-9 {
                return bad(format!(
                    "symbol_duration_s = {tp} is not 1/subcarrier_spacing_hz = {want}"
                ));
            }
        }
        if !(self.aperture_time_s > 0.0) {
            return bad(format!("aperture_time_s must be > 0, got {}", self.aperture_time_s));
        }
        if self.n_subcarriers == 0 {
            return bad("n_subcarriers must be >= 1".into());
        }
        if self.azimuth_downsample == 0 {
            return bad("azimuth_downsample must be >= 1".into());
        }
        let occupied = self.n_subcarriers as f64 * self.subcarrier_spacing_hz;
        if occupied > self.bandwidth_hz * (1.0 + 1e-12) {
            return bad(format!(
                "n_subcarriers · Δf = {occupied} Hz exceeds bandwidth_hz = {}",
                self.bandwidth_hz
            ));
        }
        if self.n_symbols() == 0 {
            return bad("aperture shorter than one symbol".into());
        }
        if !(self.noise_var >= 0.0) {
            return bad(format!("noise_var must be >= 0, got {}", self.noise_var));
        }
        self.platform.validate()
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc_hz
    }

    pub fn useful_symbol_s(&self) -> f64 {
        self.symbol_duration_s
            .unwrap_or(1.0 / self.subcarrier_spacing_hz)
    }

    /// `T_sym = T_p + T_cp`.
    pub fn total_symbol_s(&self) -> f64 {
        self.useful_symbol_s() + self.cp_duration_s
    }

    /// Full-rate symbol count over the aperture.
    pub fn n_symbols(&self) -> usize {
        (self.aperture_time_s / self.total_symbol_s()).round() as usize
    }

    /// Number of azimuth columns after decimation.
    pub fn az_count(&self) -> usize {
        self.n_symbols().div_ceil(self.azimuth_downsample)
    }

    /// Time between retained azimuth columns.
    pub fn az_interval_s(&self) -> f64 {
        self.azimuth_downsample as f64 * self.total_symbol_s()
    }

    pub fn prf_hz(&self) -> f64 {
        1.0 / self.az_interval_s()
    }

    /// Range-bin pitch `c / (2 N Δf)`.
    pub fn range_pitch_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.n_subcarriers as f64 * self.subcarrier_spacing_hz)
    }

    /// Along-track distance between retained columns.
    pub fn az_pitch_m(&self) -> f64 {
        self.platform.speed_mps * self.az_interval_s()
    }

    pub fn doppler_pitch_hz(&self) -> f64 {
        1.0 / (self.az_count() as f64 * self.az_interval_s())
    }

    /// Azimuth chirp rate `2 v² / (λ R̄)`.
    pub fn chirp_rate(&self, closest_range_m: f64) -> f64 {
        let v = self.platform.speed_mps;
        2.0 * v * v / (self.wavelength_m() * closest_range_m)
    }

    /// `PRF / B_a` for a target illuminated over the whole aperture; 1 means the
    /// azimuth chirp exactly fills the Doppler band.
    pub fn oversampling(&self, closest_range_m: f64) -> f64 {
        self.prf_hz() / (self.chirp_rate(closest_range_m) * self.aperture_time_s)
    }

    /// Largest unambiguous range permitted by the cyclic prefix.
    pub fn max_unambiguous_range_m(&self) -> f64 {
        self.cp_duration_s * SPEED_OF_LIGHT / 2.0
    }

    /// Speed that makes `K_a · M · T² = 1` at `closest_range_m`, i.e. the
    /// azimuth chirp spans the Doppler band exactly once.
    pub fn critical_speed(&self, closest_range_m: f64) -> f64 {
        let t = self.az_interval_s();
        let m = self.az_count() as f64;
        (self.wavelength_m() * closest_range_m / (2.0 * m * t * t)).sqrt()
    }

    /// Small square configuration with critically sampled azimuth: `n × m`
    /// grid, one symbol per column, speed set so that the reference target at
    /// range bin `range_bin` focuses to an ideal impulse. The bin must lie
    /// beyond the platform height for the target to be placeable.
    pub fn critical_desk(n: usize, m: usize, range_bin: usize) -> Self {
        let df = 30e3;
        let mut cfg = Self {
            fc_hz: 3.5e9,
            bandwidth_hz: 100e6,
            subcarrier_spacing_hz: df,
            cp_duration_s: 1.0 / (4.0 * df),
            symbol_duration_s: None,
            aperture_time_s: 0.0,
            n_subcarriers: n,
            azimuth_downsample: 1,
            platform: PlatformGeometry::default(),
            noise_var: 0.0,
        };
        cfg.aperture_time_s = m as f64 * cfg.total_symbol_s();
        let r0 = range_bin as f64 * cfg.range_pitch_m();
        cfg.platform.speed_mps = cfg.critical_speed(r0);
        cfg
    }

    /// Ground coordinate `x` placing a broadside target exactly at range bin `k`.
    pub fn ground_x_for_bin(&self, k: f64) -> Result<f64> {
        let r = k * self.range_pitch_m();
        let h = self.platform.height_m;
        if r <= h {
            return Err(SarError::Geometry(format!(
                "range bin {k} ({r:.3} m) is not beyond the platform height {h} m"
            )));
        }
        Ok((r * r - h * h).sqrt())
    }

    /// Ground coordinate `y` of the target whose closest approach falls on
    /// retained column `m`.
    pub fn ground_y_for_column(&self, m: f64) -> f64 {
        m * self.az_pitch_m()
    }
}
