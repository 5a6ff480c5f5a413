//! Temporal-frequency echo synthesis `Y = H ⊙ S + Z`.

use ndarray::{ArrayViewMut1, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Result, SarError};
use crate::scene::{AmplitudeMode, Scene};
use crate::waveform::SymbolGrid;
use crate::{rng, Grid, RadarConfig, SPEED_OF_LIGHT};

/// Re-anchor the subcarrier phase recurrence this often.
const REANCHOR: usize = 64;

/// Seeds for the two independent random draws of a realisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct EchoSeeds {
    pub noise: u64,
    pub rcs: u64,
}

impl EchoSeeds {
    pub fn new(noise: u64, rcs: u64) -> Self {
        Self { noise, rcs }
    }
}

/// Received subcarrier × azimuth-column grid.
#[derive(Debug, Clone)]
pub struct EchoGrid {
    pub data: Grid,
    pub cfg: RadarConfig,
    /// `None` for grids not produced by [`synthesize_echo`].
    pub seeds: Option<EchoSeeds>,
    pub scene_targets: usize,
}

impl EchoGrid {
    pub fn from_data(data: Grid, cfg: &RadarConfig) -> Self {
        Self {
            data,
            cfg: cfg.clone(),
            seeds: None,
            scene_targets: 0,
        }
    }
}

/// Complex reflectivities `α_q = d_q e^{−j4π f_c R̄_q / c}`.
pub fn target_amplitudes(scene: &Scene, cfg: &RadarConfig, rcs_seed: u64) -> Vec<Complex64> {
    let h = cfg.platform.height_m;
    scene
        .targets
        .iter()
        .enumerate()
        .map(|(q, t)| {
            let d = match t.amplitude_mode {
                AmplitudeMode::Deterministic => Complex64::new(t.rcs_var.sqrt(), 0.0),
                AmplitudeMode::Random => {
                    rng::complex_normal(&mut rng::stream(rcs_seed, q as u64), t.rcs_var)
                }
            };
            let r0 = t.closest_range(h);
            d * Complex64::from_polar(1.0, -4.0 * PI * cfg.fc_hz * r0 / SPEED_OF_LIGHT)
        })
        .collect()
}

/// Migration term `ΔR = (v m T_sym − y)² / (2 R̄)` at full-rate symbol `m`.
fn range_migration(cfg: &RadarConfig, y: f64, r0: f64, m: f64) -> f64 {
    let a = cfg.platform.speed_mps * m * cfg.total_symbol_s() - y;
    a * a / (2.0 * r0)
}

fn check_cyclic_prefix(scene: &Scene, cfg: &RadarConfig) -> Result<()> {
    let rmax = cfg.max_unambiguous_range_m();
    let last = ((cfg.az_count().max(1) - 1) * cfg.azimuth_downsample) as f64;
    for (q, t) in scene.targets.iter().enumerate() {
        let r0 = t.closest_range(cfg.platform.height_m);
        let far = r0
            + range_migration(cfg, t.y_m, r0, 0.0).max(range_migration(cfg, t.y_m, r0, last));
        if far >= rmax {
            return Err(SarError::Config(format!(
                "target {q} at ({}, {}) reaches {far:.2} m, beyond the {rmax:.2} m the cyclic prefix covers",
                t.x_m, t.y_m
            )));
        }
    }
    Ok(())
}

/// Accumulate `Σ_q α_q e^{−j4π/c (nΔf(ΔR+R̄) + f_c ΔR)}` for column `j`.
fn fill_channel_column(
    mut col: ArrayViewMut1<Complex64>,
    j: usize,
    scene: &Scene,
    alphas: &[Complex64],
    cfg: &RadarConfig,
) {
    let m = (j * cfg.azimuth_downsample) as f64;
    let k = 4.0 * PI / SPEED_OF_LIGHT;
    for (t, &alpha) in scene.targets.iter().zip(alphas) {
        let r0 = t.closest_range(cfg.platform.height_m);
        let dr = range_migration(cfg, t.y_m, r0, m);
        let start = alpha * Complex64::from_polar(1.0, -k * cfg.fc_hz * dr);
        let step_phase = -k * cfg.subcarrier_spacing_hz * (dr + r0);
        let step = Complex64::from_polar(1.0, step_phase);
        let mut z = start;
        for (n, v) in col.iter_mut().enumerate() {
            if n % REANCHOR == 0 {
                z = start * Complex64::from_polar(1.0, step_phase * n as f64);
            }
            *v += z;
            z *= step;
        }
    }
}

/// Response `b cᴴ ⊙ E` of a unit-reflectivity scatterer at `(x, y)`, without
/// the carrier-range phase that [`target_amplitudes`] folds into `α_q`.
pub fn unit_response(cfg: &RadarConfig, x_m: f64, y_m: f64) -> Grid {
    let scene = Scene::from_targets(vec![crate::scene::PointTarget::new(
        x_m,
        y_m,
        1.0,
        AmplitudeMode::Deterministic,
    )]);
    let one = [Complex64::new(1.0, 0.0)];
    let mut h = Grid::zeros((cfg.n_subcarriers, cfg.az_count()));
    h.axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(j, col)| fill_channel_column(col, j, &scene, &one, cfg));
    h
}

/// Imaging channel `H = Σ_q α_q (b_q c_qᴴ ⊙ E_q)` on the processed grid.
pub fn build_channel_matrix(scene: &Scene, cfg: &RadarConfig, rcs_seed: u64) -> Result<Grid> {
    cfg.validate()?;
    let alphas = target_amplitudes(scene, cfg, rcs_seed);
    let mut h = Grid::zeros((cfg.n_subcarriers, cfg.az_count()));
    h.axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(j, col)| fill_channel_column(col, j, scene, &alphas, cfg));
    Ok(h)
}

/// Synthesise one echo realisation. Noise for column `j` comes from stream
/// `j` of `seeds.noise`, amplitudes of target `q` from stream `q` of `seeds.rcs`.
pub fn synthesize_echo(
    scene: &Scene,
    cfg: &RadarConfig,
    s: &SymbolGrid,
    seeds: EchoSeeds,
) -> Result<EchoGrid> {
    cfg.validate()?;
    scene.validate()?;
    let dims = (cfg.n_subcarriers, cfg.az_count());
    if s.dim() != dims {
        return Err(SarError::DimensionMismatch {
            expected: dims,
            got: s.dim(),
        });
    }
    check_cyclic_prefix(scene, cfg)?;
    let mut data = build_channel_matrix(scene, cfg, seeds.rcs)?;
    Zip::from(&mut data).and(&s.data).par_for_each(|y, &sv| *y *= sv);
    if cfg.noise_var > 0.0 {
        data.axis_iter_mut(Axis(1))
            .into_par_iter()
            .enumerate()
            .for_each(|(j, mut col)| {
                let mut r = rng::stream(seeds.noise, j as u64);
                for v in col.iter_mut() {
                    *v += rng::complex_normal(&mut r, cfg.noise_var);
                }
            });
    }
    Ok(EchoGrid {
        data,
        cfg: cfg.clone(),
        seeds: Some(seeds),
        scene_targets: scene.len(),
    })
}
