//! Constellations, transmitted symbol grids and sounding-pilot resource masks.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::tf_filter::FilterSpec;
use crate::{rng, Grid, RadarConfig};

/// Unit-power symbol alphabet with its filter-relevant moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub name: String,
    pub points: Vec<Complex64>,
    /// `E|s|²`
    pub mean_power: f64,
    /// `E|s|⁴`
    pub fourth_moment: f64,
    /// `E[1/|s|²]`
    pub inverse_power_moment: f64,
}

/// Square QAM of the given order (4, 16, 64 or 256), normalised to unit power.
pub fn make_qam(order: usize) -> Result<Constellation> {
    let side = match order {
        4 => 2,
        16 => 4,
        64 => 8,
        256 => 16,
        _ => {
            return Err(SarError::InvalidParameter(format!(
                "unsupported QAM order {order}; expected 4, 16, 64 or 256"
            )))
        }
    };
    let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
    let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) / scale;
    let points: Vec<Complex64> = (0..side)
        .flat_map(|i| (0..side).map(move |q| Complex64::new(level(i), level(q))))
        .collect();
    let name = if order == 4 {
        "qpsk".to_string()
    } else {
        format!("qam{order}")
    };
    Ok(Constellation::from_points(name, points))
}

impl Constellation {
    /// Build from raw points; moments are exact alphabet averages.
    pub fn from_points(name: String, points: Vec<Complex64>) -> Self {
        let k = points.len() as f64;
        let mean_power = points.iter().map(|s| s.norm_sqr()).sum::<f64>() / k;
        let fourth_moment = points.iter().map(|s| s.norm_sqr().powi(2)).sum::<f64>() / k;
        let inverse_power_moment = points.iter().map(|s| 1.0 / s.norm_sqr()).sum::<f64>() / k;
        Self {
            name,
            points,
            mean_power,
            fourth_moment,
            inverse_power_moment,
        }
    }

    /// Look up by name: "qpsk", "qam16", "qam64" or "qam256".
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "qpsk" => make_qam(4),
            "qam16" => make_qam(16),
            "qam64" => make_qam(64),
            "qam256" => make_qam(256),
            other => Err(SarError::InvalidParameter(format!(
                "unknown constellation {other:?}"
            ))),
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }
}

/// Moments of the filtered spectrum `χ = s·g` and of the filter gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiStats {
    pub mean: f64,
    pub var: f64,
    /// `E|g|²`
    pub gain_power: f64,
}

impl ChiStats {
    /// `E[(χ − 1)²]`
    pub fn mse_factor(&self) -> f64 {
        self.var + (self.mean - 1.0).powi(2)
    }

    /// `E[χ²]`
    pub fn second_moment(&self) -> f64 {
        self.var + self.mean * self.mean
    }
}

/// Exact enumeration of `E[χ]`, `Var[χ]` and `E|g|²` over the alphabet.
pub fn chi_stats(c: &Constellation, filter: &FilterSpec) -> Result<ChiStats> {
    filter.validate()?;
    let k = c.points.len() as f64;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut gp = 0.0;
    for &s in &c.points {
        let g = filter.gain(s);
        let chi = (s * g).re;
        m1 += chi;
        m2 += chi * chi;
        gp += g.norm_sqr();
    }
    m1 /= k;
    m2 /= k;
    Ok(ChiStats {
        mean: m1,
        var: (m2 - m1 * m1).max(0.0),
        gain_power: gp / k,
    })
}

/// Transmitted symbols on the processed (decimated) grid.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub data: Grid,
    /// Active resource elements; `None` means every element is active.
    pub mask: Option<Array2<bool>>,
}

impl SymbolGrid {
    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn is_active(&self, n: usize, m: usize) -> bool {
        self.mask.as_ref().is_none_or(|mk| mk[[n, m]])
    }
}

/// Draw i.i.d. uniform symbols on every active element. Column `m` uses its
/// own random stream, so the result depends only on `seed`.
pub fn gen_symbol_grid(
    cfg: &RadarConfig,
    c: &Constellation,
    seed: u64,
    mask: Option<&Array2<bool>>,
) -> Result<SymbolGrid> {
    let dims = (cfg.n_subcarriers, cfg.az_count());
    if let Some(mk) = mask {
        if mk.dim() != dims {
            return Err(SarError::DimensionMismatch {
                expected: dims,
                got: mk.dim(),
            });
        }
    }
    let mut data = Grid::zeros(dims);
    let k = c.points.len();
    data.axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(m, mut col)| {
            let mut r = rng::stream(seed, m as u64);
            for (n, v) in col.iter_mut().enumerate() {
                if mask.is_none_or(|mk| mk[[n, m]]) {
                    *v = c.points[r.gen_range(0..k)];
                }
            }
        });
    Ok(SymbolGrid {
        data,
        mask: mask.cloned(),
    })
}

/// Comb-structured sounding pilot layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrsConfig {
    pub periodicity_slots: usize,
    #[serde(default = "default_symbols_per_slot")]
    pub symbols_per_slot: usize,
    #[serde(default = "default_comb")]
    pub comb_spacing: usize,
    #[serde(default = "default_rb")]
    pub n_resource_blocks: usize,
    #[serde(default = "default_start")]
    pub start_subcarrier: usize,
}

fn default_symbols_per_slot() -> usize {
    14
}
fn default_comb() -> usize {
    4
}
fn default_rb() -> usize {
    24
}
fn default_start() -> usize {
    1667
}

impl Default for SrsConfig {
    fn default() -> Self {
        Self {
            periodicity_slots: 20,
            symbols_per_slot: default_symbols_per_slot(),
            comb_spacing: default_comb(),
            n_resource_blocks: default_rb(),
            start_subcarrier: default_start(),
        }
    }
}

impl SrsConfig {
    pub fn with_periodicity(periodicity_slots: usize) -> Self {
        Self {
            periodicity_slots,
            ..Default::default()
        }
    }

    /// Subcarriers covered by the pilot allocation (12 per resource block).
    pub fn span(&self) -> usize {
        12 * self.n_resource_blocks
    }

    /// Full-rate symbols between consecutive pilot symbols.
    pub fn period_symbols(&self) -> usize {
        self.periodicity_slots * self.symbols_per_slot
    }

    pub fn validate(&self, n_subcarriers: usize) -> Result<()> {
        if self.periodicity_slots == 0 || self.symbols_per_slot == 0 {
            return Err(SarError::Config(
                "srs periodicity_slots and symbols_per_slot must be >= 1".into(),
            ));
        }
        if self.comb_spacing == 0 || self.n_resource_blocks == 0 {
            return Err(SarError::Config(
                "srs comb_spacing and n_resource_blocks must be >= 1".into(),
            ));
        }
        if self.start_subcarrier + self.span() > n_subcarriers {
            return Err(SarError::Config(format!(
                "srs allocation {}..{} exceeds N = {n_subcarriers} subcarriers",
                self.start_subcarrier,
                self.start_subcarrier + self.span()
            )));
        }
        Ok(())
    }
}

/// Separable pilot mask: comb over subcarriers times periodic symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsMask {
    /// Active subcarriers, length N.
    pub subcarriers: Vec<bool>,
    /// Active full-rate symbols, length `n_symbols`.
    pub symbols: Vec<bool>,
    pub pilot_prf_hz: f64,
}

impl SrsMask {
    pub fn active_tones(&self) -> usize {
        self.subcarriers.iter().filter(|&&a| a).count()
    }

    /// Dense mask on the processed grid: column `j` is full-rate symbol `j·D`.
    pub fn dense(&self, cfg: &RadarConfig) -> Array2<bool> {
        let d = cfg.azimuth_downsample;
        Array2::from_shape_fn((cfg.n_subcarriers, cfg.az_count()), |(n, j)| {
            self.subcarriers[n] && self.symbols.get(j * d).copied().unwrap_or(false)
        })
    }
}

pub fn srs_mask(cfg: &RadarConfig, srs: &SrsConfig) -> Result<SrsMask> {
    srs.validate(cfg.n_subcarriers)?;
    let mut subcarriers = vec![false; cfg.n_subcarriers];
    for n in (srs.start_subcarrier..srs.start_subcarrier + srs.span()).step_by(srs.comb_spacing) {
        subcarriers[n] = true;
    }
    let period = srs.period_symbols();
    let symbols = (0..cfg.n_symbols()).map(|m| m % period == 0).collect();
    Ok(SrsMask {
        subcarriers,
        symbols,
        pilot_prf_hz: 1.0 / (period as f64 * cfg.total_symbol_s()),
    })
}
