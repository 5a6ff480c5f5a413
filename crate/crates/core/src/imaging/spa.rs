use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Result, SarError};

/// Stationary-phase estimate of one DFT bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaValue {
    pub value: Complex64,
    /// Stationary sample index `m̃`.
    pub stationary_point: f64,
    /// `false` when `m̃` falls outside the envelope; `value` is then zero.
    pub in_support: bool,
}

/// Approximate `U_p = Σ_m w_m e^{j(a m² + b m)} e^{−j2πmp/M}` (non-normalised
/// DFT, `M = envelope.len()`) by the stationary-phase formula.
pub fn spa_spectrum(envelope: &[Complex64], a: f64, b: f64, p: f64) -> Result<SpaValue> {
    if a == 0.0 {
        return Err(SarError::DegeneratePhase);
    }
    let len = envelope.len();
    if len == 0 {
        return Err(SarError::InvalidParameter("empty envelope".into()));
    }
    let m = len as f64;
    let st = (2.0 * PI * p / m - b) / (2.0 * a);
    if !(st >= 0.0 && st <= m - 1.0) {
        return Ok(SpaValue {
            value: Complex64::new(0.0, 0.0),
            stationary_point: st,
            in_support: false,
        });
    }
    let lo = st.floor() as usize;
    let hi = (lo + 1).min(len - 1);
    let f = st - lo as f64;
    let mag = (1.0 - f) * envelope[lo].norm() + f * envelope[hi].norm();
    let nearest = if f < 0.5 { lo } else { hi };
    let phase = a * st * st + b * st - 2.0 * PI * st * p / m + envelope[nearest].arg();
    let amp = mag * (2.0 * PI / (2.0 * a).abs()).sqrt();
    Ok(SpaValue {
        value: Complex64::from_polar(amp, phase + a.signum() * PI / 4.0),
        stationary_point: st,
        in_support: true,
    })
}
