//! Element-wise temporal-frequency filters removing the data symbols.

use ndarray::Zip;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::echo::EchoGrid;
use crate::error::{Result, SarError};
use crate::waveform::{ChiStats, SymbolGrid};
use crate::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    /// Reciprocal: `g = 1/s`.
    Rf,
    /// Matched: `g = s*`.
    Mf,
    /// Wiener: `g = s* / (|s|² + 1/SNR)`.
    Wf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Rf, FilterKind::Mf, FilterKind::Wf];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Rf => "rf",
            FilterKind::Mf => "mf",
            FilterKind::Wf => "wf",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = SarError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(FilterKind::Rf),
            "mf" => Ok(FilterKind::Mf),
            "wf" => Ok(FilterKind::Wf),
            other => Err(SarError::InvalidParameter(format!(
                "unknown filter {other:?}; expected rf, mf or wf"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Input SNR (linear), required for the Wiener filter.
    pub snr_in_linear: Option<f64>,
}

impl FilterSpec {
    pub fn rf() -> Self {
        Self {
            kind: FilterKind::Rf,
            snr_in_linear: None,
        }
    }

    pub fn mf() -> Self {
        Self {
            kind: FilterKind::Mf,
            snr_in_linear: None,
        }
    }

    pub fn wf(snr_in_linear: f64) -> Self {
        Self {
            kind: FilterKind::Wf,
            snr_in_linear: Some(snr_in_linear),
        }
    }

    /// Spec of `kind`, attaching `snr_in_linear` only where it is used.
    pub fn of(kind: FilterKind, snr_in_linear: f64) -> Self {
        match kind {
            FilterKind::Rf => Self::rf(),
            FilterKind::Mf => Self::mf(),
            FilterKind::Wf => Self::wf(snr_in_linear),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == FilterKind::Wf {
            match self.snr_in_linear {
                Some(s) if s > 0.0 && s.is_finite() => {}
                Some(s) => {
                    return Err(SarError::Config(format!(
                        "wiener filter needs a positive finite SNR, got {s}"
                    )))
                }
                None => {
                    return Err(SarError::Config(
                        "wiener filter needs snr_in_linear".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Filter gain for symbol `s`. Must only be called after [`validate`](Self::validate).
    pub fn gain(&self, s: Complex64) -> Complex64 {
        match self.kind {
            FilterKind::Rf => s.conj() / s.norm_sqr(),
            FilterKind::Mf => s.conj(),
            FilterKind::Wf => {
                let inv = 1.0 / self.snr_in_linear.unwrap_or(f64::INFINITY);
                s.conj() / (s.norm_sqr() + inv)
            }
        }
    }
}

/// `ŷ = y·g(s)` on active elements, `0` elsewhere.
pub fn apply_tf_filter(y: &EchoGrid, s: &SymbolGrid, spec: &FilterSpec) -> Result<Grid> {
    spec.validate()?;
    if y.data.dim() != s.data.dim() {
        return Err(SarError::DimensionMismatch {
            expected: s.data.dim(),
            got: y.data.dim(),
        });
    }
    let mut out = Grid::zeros(y.data.dim());
    let apply = |o: &mut Complex64, &yv: &Complex64, &sv: &Complex64| {
        *o = if sv.norm_sqr() > 0.0 {
            yv * spec.gain(sv)
        } else {
            Complex64::new(0.0, 0.0)
        };
    };
    match &s.mask {
        None => Zip::from(&mut out)
            .and(&y.data)
            .and(&s.data)
            .par_for_each(apply),
        Some(mask) => Zip::from(&mut out)
            .and(&y.data)
            .and(&s.data)
            .and(mask)
            .par_for_each(|o, yv, sv, &active| {
                if active {
                    apply(o, yv, sv)
                }
            }),
    }
    Ok(out)
}

/// Expected `‖Ŷ − H‖²` for an `n × m` grid.
pub fn channel_mse_analytic(
    n: usize,
    m: usize,
    stats: &ChiStats,
    rcs_total: f64,
    noise_var: f64,
) -> f64 {
    (n * m) as f64 * (rcs_total * stats.mse_factor() + noise_var * stats.gain_power)
}
