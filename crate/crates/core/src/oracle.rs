//! Brute-force references: least-squares reflectivity estimation on a
//! candidate grid, and its comparison with the fast focusing chain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::echo::{synthesize_echo, unit_response, EchoGrid, EchoSeeds};
use crate::error::{Result, SarError};
use crate::imaging::{focus, ChainOptions, RcmcMethod};
use crate::metrics::target_bins;
use crate::scene::Scene;
use crate::tf_filter::{apply_tf_filter, FilterSpec};
use crate::waveform::{gen_symbol_grid, make_qam, SymbolGrid};
use crate::RadarConfig;

pub const MAX_GRID_POINTS: usize = 256;
pub const MAX_ELEMENTS: usize = 65536;
const PIVOT_RATIO_MIN: f64 = 1e-12;

fn design_matrix(grid: &[(f64, f64)], s: &SymbolGrid, cfg: &RadarConfig) -> Result<DMatrix<Complex64>> {
    let (n, m) = s.dim();
    if n * m > MAX_ELEMENTS {
        return Err(SarError::Capacity(format!(
            "{n}×{m} grid exceeds {MAX_ELEMENTS} elements"
        )));
    }
    if grid.len() > MAX_GRID_POINTS {
        return Err(SarError::Capacity(format!(
            "{} candidates exceed {MAX_GRID_POINTS}",
            grid.len()
        )));
    }
    let mut a = DMatrix::<Complex64>::zeros(n * m, grid.len());
    for (c, &(x, y)) in grid.iter().enumerate() {
        let h = unit_response(cfg, x, y);
        for ((i, v), sv) in h.iter().enumerate().zip(s.data.iter()) {
            a[(i, c)] = v * sv;
        }
    }
    Ok(a)
}

fn observation(y: &EchoGrid) -> DVector<Complex64> {
    DVector::from_iterator(y.data.len(), y.data.iter().copied())
}

/// `α̂ = (H̃ᴴH̃ + λI)⁻¹ H̃ᴴ y` with columns `vec(H_q ⊙ S)` for every candidate.
pub fn ls_reconstruct(
    y: &EchoGrid,
    grid: &[(f64, f64)],
    s: &SymbolGrid,
    cfg: &RadarConfig,
    ridge: f64,
) -> Result<Vec<Complex64>> {
    if !(ridge >= 0.0) {
        return Err(SarError::InvalidParameter(format!("ridge must be >= 0, got {ridge}")));
    }
    if y.data.dim() != s.dim() {
        return Err(SarError::DimensionMismatch {
            expected: s.dim(),
            got: y.data.dim(),
        });
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let a = design_matrix(grid, s, cfg)?;
    let ah = a.adjoint();
    let mut normal = &ah * &a;
    for i in 0..grid.len() {
        normal[(i, i)] += Complex64::new(ridge, 0.0);
    }
    let rhs = &ah * observation(y);
    let chol = normal
        .cholesky()
        .ok_or(SarError::Singular { ratio: 0.0 })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::MAX, 0.0f64), |(lo, hi), d| {
        let p = d.norm_sqr();
        (lo.min(p), hi.max(p))
    });
    let ratio = lo / hi;
    if ratio < PIVOT_RATIO_MIN {
        return Err(SarError::Singular { ratio });
    }
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// `‖y − H̃ α̂‖`.
pub fn ls_residual(
    y: &EchoGrid,
    grid: &[(f64, f64)],
    s: &SymbolGrid,
    cfg: &RadarConfig,
    alpha: &[Complex64],
) -> Result<f64> {
    let obs = observation(y);
    if grid.is_empty() {
        return Ok(obs.norm());
    }
    let a = design_matrix(grid, s, cfg)?;
    let x = DVector::from_column_slice(alpha);
    Ok((obs - a * x).norm())
}

/// Per-target comparison of chain and least-squares amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// `|y_ac(k_q, m_q)| / √NM` per target.
    pub chain: Vec<f64>,
    /// `|α̂_q|` per target.
    pub least_squares: Vec<f64>,
    /// Largest `|chain − ls| / ls`; `None` for an empty scene.
    pub max_relative_gap: Option<f64>,
}

/// Focus a noiseless reciprocal-filtered echo and solve least squares on the
/// true target positions; compare amplitudes at each target's bin.
pub fn rd_vs_ls_compare(scene: &Scene, cfg: &RadarConfig, seed: u64) -> Result<OracleComparison> {
    let mut quiet = cfg.clone();
    quiet.noise_var = 0.0;
    if scene.is_empty() {
        return Ok(OracleComparison {
            chain: Vec::new(),
            least_squares: Vec::new(),
            max_relative_gap: None,
        });
    }
    let s = gen_symbol_grid(&quiet, &make_qam(256)?, seed, None)?;
    let seeds = EchoSeeds::new(seed, seed);
    let y = synthesize_echo(scene, &quiet, &s, seeds)?;
    let grid: Vec<(f64, f64)> = scene.targets.iter().map(|t| (t.x_m, t.y_m)).collect();
    let alpha = ls_reconstruct(&y, &grid, &s, &quiet, 0.0)?;
    let r_ref = scene.targets.iter().map(|t| t.closest_range(cfg.platform.height_m)).sum::<f64>()
        / scene.len() as f64;
    let mut opts = ChainOptions::new(r_ref);
    opts.rcmc = RcmcMethod::PhaseRamp;
    let tf = apply_tf_filter(&y, &s, &FilterSpec::rf())?;
    let img = focus(tf, &quiet, &opts)?;
    let (n, m) = img.data.dim();
    let norm = ((n * m) as f64).sqrt();
    let chain: Vec<f64> = scene
        .targets
        .iter()
        .map(|t| {
            let (k, j) = target_bins(&quiet, t.x_m, t.y_m);
            img.data[[k.round() as usize % n, j.round() as usize % m]].norm() / norm
        })
        .collect();
    let ls: Vec<f64> = alpha.iter().map(|a| a.norm()).collect();
    let gap = chain
        .iter()
        .zip(&ls)
        .map(|(c, l)| (c - l).abs() / l)
        .fold(0.0, f64::max);
    Ok(OracleComparison {
        chain,
        least_squares: ls,
        max_relative_gap: Some(gap),
    })
}
