//! Point-target image quality: resolutions, ISLR, PEL, output SNR and NMSE
//! against the ideal sinc image, evaluated over Monte-Carlo ensembles.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::echo::{synthesize_echo, target_amplitudes, EchoSeeds};
use crate::error::{Result, SarError};
use crate::imaging::{fft::unitary_dft, focus, ChainOptions};
use crate::scene::Scene;
use crate::tf_filter::{apply_tf_filter, FilterSpec};
use crate::waveform::{chi_stats, gen_symbol_grid, ChiStats, Constellation};
use crate::{linear_to_db, rng, sinc, Grid, RadarConfig};

/// Trials reduced per parallel work unit; fixed so sums do not depend on the
/// thread count.
const TRIAL_CHUNK: usize = 8;

/// Processing mode of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    DataAided,
    PilotOnly,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::DataAided => "data_aided",
            Mode::PilotOnly => "pilot_only",
        }
    }
}

/// Flat quality summary. Point-target-specific entries are `None` unless the
/// scene holds exactly one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rho_r_m: f64,
    pub rho_a_m: f64,
    pub measured_rho_r_m: Option<f64>,
    pub measured_rho_a_m: Option<f64>,
    pub islr_db: Option<f64>,
    pub pel: Option<f64>,
    pub snr_out_db: Option<f64>,
    pub nmse: f64,
    pub identity_residual: Option<f64>,
    pub trials: usize,
    pub filter: String,
    pub mode: String,
}

/// `(ρ_r, ρ_a) = (c / (2NΔf), v / (2 K_a T_a))` with `K_a` at `reference_range_m`.
pub fn theoretical_resolutions(cfg: &RadarConfig, reference_range_m: f64) -> (f64, f64) {
    let ka = cfg.chirp_rate(reference_range_m);
    (
        cfg.range_pitch_m(),
        cfg.platform.speed_mps / (2.0 * ka * cfg.aperture_time_s),
    )
}

/// Fractional `(range bin, column)` of a target's closest approach.
pub fn target_bins(cfg: &RadarConfig, x_m: f64, y_m: f64) -> (f64, f64) {
    let r0 = x_m.hypot(cfg.platform.height_m);
    (r0 / cfg.range_pitch_m(), y_m / cfg.az_pitch_m())
}

/// Complex amplitude a focused target is expected to carry: `α_q e^{−jπ/4}`,
/// the constant phase left by the stationary point of a down-chirp.
pub fn focused_amplitudes(scene: &Scene, cfg: &RadarConfig, rcs_seed: u64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, -PI / 4.0);
    target_amplitudes(scene, cfg, rcs_seed)
        .into_iter()
        .map(|a| a * rot)
        .collect()
}

/// `√(NM) Σ_q α̃_q sinc(k − k_q) sinc(m − m_q)` on the processed grid.
pub fn ideal_reference_image(scene: &Scene, cfg: &RadarConfig, rcs_seed: u64) -> Grid {
    let amps = focused_amplitudes(scene, cfg, rcs_seed);
    ideal_from_amplitudes(scene, cfg, &amps)
}

fn ideal_from_amplitudes(scene: &Scene, cfg: &RadarConfig, amps: &[Complex64]) -> Grid {
    let (n, m) = (cfg.n_subcarriers, cfg.az_count());
    let scale = ((n * m) as f64).sqrt();
    let mut out = Grid::zeros((n, m));
    for (t, &a) in scene.targets.iter().zip(amps) {
        let (kq, mq) = target_bins(cfg, t.x_m, t.y_m);
        let rows: Vec<f64> = (0..n).map(|k| sinc(k as f64 - kq)).collect();
        let cols: Vec<f64> = (0..m).map(|j| sinc(j as f64 - mq)).collect();
        let amp = a * scale;
        Zip::indexed(&mut out).for_each(|(k, j), v| *v += amp * (rows[k] * cols[j]));
    }
    out
}

/// −3 dB mainlobe width in samples, measured on a `factor`-times
/// oversampled copy of `profile` (zero-padded DFT interpolation).
pub fn measure_mainlobe_width(profile: &[f64], factor: usize) -> Result<f64> {
    let n = profile.len();
    if n < 3 || factor == 0 {
        return Err(SarError::Measurement(
            "profile needs at least 3 samples and a positive factor".into(),
        ));
    }
    let max = profile.iter().cloned().fold(f64::MIN, f64::max);
    if !(max > 0.0) {
        return Err(SarError::Measurement("profile has no positive peak".into()));
    }
    let near_max = profile.iter().filter(|&&v| v >= max * (1.0 - 1e-9)).count();
    if near_max > 1 {
        return Err(SarError::Measurement(format!(
            "peak is not unique ({near_max} samples at the maximum)"
        )));
    }
    let fine = interpolate(profile, factor);
    let peak_ix = fine
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
        .0;
    let peak = fine[peak_ix];
    let level = peak / 2f64.sqrt();
    let crossing = |dir: i64| -> Option<f64> {
        let mut i = peak_ix as i64;
        loop {
            let j = i + dir;
            if j < 0 || j >= fine.len() as i64 {
                return None;
            }
            let (a, b) = (fine[i as usize], fine[j as usize]);
            if b < level {
                return Some(i as f64 + dir as f64 * (a - level) / (a - b));
            }
            i = j;
        }
    };
    match (crossing(-1), crossing(1)) {
        (Some(l), Some(r)) => Ok((r - l) / factor as f64),
        _ => Err(SarError::Measurement("no −3 dB crossing on one side of the peak".into())),
    }
}

/// Band-limited interpolation of a real profile onto `factor·n` points.
fn interpolate(profile: &[f64], factor: usize) -> Vec<f64> {
    let n = profile.len();
    if factor == 1 {
        return profile.to_vec();
    }
    let mut spec: Vec<Complex64> = profile.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    unitary_dft(&mut spec, FftDirection::Forward);
    let big = n * factor;
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    let half = n / 2;
    for (i, &v) in spec.iter().enumerate() {
        let signed = if i <= half { i as i64 } else { i as i64 - n as i64 };
        if n.is_multiple_of(2) && i == half {
            // split the Nyquist bin between both signs
            padded[half] += v * 0.5;
            padded[big - half] += v * 0.5;
            continue;
        }
        let dst = signed.rem_euclid(big as i64) as usize;
        padded[dst] = v;
    }
    unitary_dft(&mut padded, FftDirection::Inverse);
    let s = (factor as f64).sqrt();
    padded.iter().map(|v| (v * s).norm()).collect()
}

/// Energy split of one image around `peak` with a `±halfwidth` square mainlobe.
pub fn mainlobe_energies(image: &Grid, peak: (usize, usize), halfwidth: usize) -> Result<(f64, f64)> {
    let (n, m) = image.dim();
    let (k, j) = peak;
    if k < halfwidth || j < halfwidth || k + halfwidth >= n || j + halfwidth >= m {
        return Err(SarError::Measurement(format!(
            "mainlobe ±{halfwidth} around ({k}, {j}) exceeds the {n}×{m} image"
        )));
    }
    let mut main = 0.0;
    for kk in k - halfwidth..=k + halfwidth {
        for jj in j - halfwidth..=j + halfwidth {
            main += image[[kk, jj]].norm_sqr();
        }
    }
    let total: f64 = image.iter().map(|v| v.norm_sqr()).sum();
    Ok((main, total))
}

/// `(total − mainlobe) / mainlobe` energy.
pub fn islr(image: &Grid, peak: (usize, usize), halfwidth: usize) -> Result<f64> {
    let (main, total) = mainlobe_energies(image, peak, halfwidth)?;
    Ok((total - main) / main)
}

/// `NM · mean (1 − R(0,0)/√NM)²`.
pub fn pel(peaks: &[f64], nm: usize) -> f64 {
    let s = (nm as f64).sqrt();
    nm as f64 * peaks.iter().map(|r| (1.0 - r / s).powi(2)).sum::<f64>() / peaks.len() as f64
}

/// Closed form `Var[χ] + NM (1 − E[χ])²`.
pub fn pel_analytic(stats: &ChiStats, nm: usize) -> f64 {
    stats.var + nm as f64 * (1.0 - stats.mean).powi(2)
}

/// Closed form `E[R²(0,0)] = E[χ²] + (NM − 1) E[χ]²`.
pub fn peak_power_analytic(stats: &ChiStats, nm: usize) -> f64 {
    stats.second_moment() + (nm as f64 - 1.0) * stats.mean * stats.mean
}

/// `σ²_α E[R²(0,0)] / (σ² E|g|²)`.
pub fn snr_out(rcs_var: f64, mean_peak_power: f64, noise_var: f64, gain_power: f64) -> f64 {
    rcs_var * mean_peak_power / (noise_var * gain_power)
}

/// Mean profile error normalised by `σ²_α E[R²(0,0)]`.
pub fn nmse(mean_error_energy: f64, rcs_var: f64, mean_peak_power: f64) -> f64 {
    mean_error_energy / (rcs_var * mean_peak_power)
}

/// `|ISLR + PEL/E[R²] + 1/SNR_out − NMSE| / NMSE`; zero when both sides vanish.
pub fn identity_check(islr: f64, pel: f64, mean_peak_power: f64, snr_out: f64, nmse: f64) -> f64 {
    let inv_snr = if snr_out.is_finite() { 1.0 / snr_out } else { 0.0 };
    let lhs = islr + pel / mean_peak_power + inv_snr;
    let scale = nmse.abs().max(lhs.abs());
    if scale < 1e-15 {
        0.0
    } else {
        (lhs - nmse).abs() / nmse.abs().max(1e-300)
    }
}

/// Monte-Carlo ensemble definition.
#[derive(Debug, Clone)]
pub struct EnsembleSpec<'a> {
    /// Geometry and timing; `noise_var` sets the noise level.
    pub cfg: &'a RadarConfig,
    pub scene: &'a Scene,
    pub constellation: &'a Constellation,
    pub filter: FilterSpec,
    pub chain: ChainOptions,
    /// Active resource elements on the processed grid (pilot-only runs).
    pub mask: Option<&'a Array2<bool>>,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub mainlobe_halfwidth: usize,
    /// Keep the per-pixel mean noisy power image.
    pub keep_mean_power: bool,
}

/// Everything an ensemble measures. [`EnsembleResult::report`] is the flat summary.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub report: MetricsReport,
    pub chi: ChiStats,
    /// Mean `|y − y_ideal|²` summed over the image, noisy trials.
    pub mean_error_energy: f64,
    /// Same for the noiseless trials.
    pub mean_noiseless_error_energy: f64,
    /// `E|y_ideal|²` summed over the image.
    pub mean_ideal_energy: f64,
    /// Empirical `E[R²(0,0)]` from noiseless trials (single target).
    pub mean_peak_power: Option<f64>,
    pub islr: Option<f64>,
    pub pel: Option<f64>,
    pub snr_out: Option<f64>,
    pub nmse: f64,
    /// Per-pixel mean of `|y|²` over noisy trials when requested.
    pub mean_power: Option<Array2<f64>>,
    /// Noisy focused image of the first trial.
    pub sample_image: Grid,
    /// Noiseless focused image of the first trial.
    pub sample_noiseless: Grid,
}

#[derive(Default)]
struct Partial {
    err: f64,
    err0: f64,
    ideal: f64,
    main: f64,
    total: f64,
    peaks: Vec<f64>,
    peak_power: f64,
    power: Option<Array2<f64>>,
    sample: Option<(Grid, Grid)>,
}

impl Partial {
    fn merge(&mut self, o: Partial) {
        self.err += o.err;
        self.err0 += o.err0;
        self.ideal += o.ideal;
        self.main += o.main;
        self.total += o.total;
        self.peaks.extend(o.peaks);
        self.peak_power += o.peak_power;
        match (&mut self.power, o.power) {
            (Some(a), Some(b)) => *a += &b,
            (None, Some(b)) => self.power = Some(b),
            _ => {}
        }
        if self.sample.is_none() {
            self.sample = o.sample;
        }
    }
}

fn diff_energy(a: &Grid, b: &Grid) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Run `spec.trials` independent realisations (symbols, amplitudes, noise)
/// through filter and focusing, in parallel, with order-fixed reduction.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    let cfg = spec.cfg;
    cfg.validate()?;
    spec.scene.validate()?;
    if spec.trials == 0 {
        return Err(SarError::InvalidParameter("trials must be >= 1".into()));
    }
    let chi = chi_stats(spec.constellation, &spec.filter)?;
    let (n, m) = (cfg.n_subcarriers, cfg.az_count());
    let nm = n * m;
    let single = spec.scene.len() == 1;
    let peak_bin = if single {
        let t = spec.scene.targets[0];
        let (kq, mq) = target_bins(cfg, t.x_m, t.y_m);
        Some((kq.round() as usize % n, mq.round() as usize % m))
    } else {
        None
    };
    let mut quiet = cfg.clone();
    quiet.noise_var = 0.0;

    let run_trial = |t: usize| -> Result<Partial> {
        let base = rng::derive_seed(spec.seed, t as u64);
        let sym_seed = rng::derive_seed(base, 0);
        let seeds = EchoSeeds::new(rng::derive_seed(base, 1), rng::derive_seed(base, 2));
        let s = gen_symbol_grid(cfg, spec.constellation, sym_seed, spec.mask)?;
        let clean = synthesize_echo(spec.scene, &quiet, &s, seeds)?;
        let tf0 = apply_tf_filter(&clean, &s, &spec.filter)?;
        let img0 = focus(tf0, cfg, &spec.chain)?.data;
        let img = if cfg.noise_var > 0.0 {
            let noise = synthesize_echo(&Scene::default(), cfg, &s, seeds)?;
            let tfz = apply_tf_filter(&noise, &s, &spec.filter)?;
            &img0 + &focus(tfz, cfg, &spec.chain)?.data
        } else {
            img0.clone()
        };
        let amps = focused_amplitudes(spec.scene, cfg, seeds.rcs);
        let ideal = ideal_from_amplitudes(spec.scene, cfg, &amps);
        let mut p = Partial {
            err: diff_energy(&img, &ideal),
            err0: diff_energy(&img0, &ideal),
            ideal: ideal.iter().map(|v| v.norm_sqr()).sum(),
            ..Default::default()
        };
        if let Some(pk) = peak_bin {
            let (main, total) = mainlobe_energies(&img, pk, spec.mainlobe_halfwidth)?;
            p.main = main;
            p.total = total;
            let a = amps[0];
            let r00 = if a.norm() > 0.0 {
                (img0[pk] / a).re
            } else {
                0.0
            };
            p.peaks.push(r00);
            p.peak_power = r00 * r00;
        }
        if spec.keep_mean_power {
            p.power = Some(img.mapv(|v| v.norm_sqr()));
        }
        if t == 0 {
            p.sample = Some((img, img0));
        }
        Ok(p)
    };

    let chunks: Vec<Result<Partial>> = (0..spec.trials.div_ceil(TRIAL_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Partial::default();
            for t in c * TRIAL_CHUNK..((c + 1) * TRIAL_CHUNK).min(spec.trials) {
                acc.merge(run_trial(t)?);
            }
            Ok(acc)
        })
        .collect();
    let mut acc = Partial::default();
    for c in chunks {
        acc.merge(c?);
    }

    let tr = spec.trials as f64;
    let mean_err = acc.err / tr;
    let mean_ideal = acc.ideal / tr;
    let active_fraction = spec
        .mask
        .map_or(1.0, |mk| mk.iter().filter(|&&a| a).count() as f64 / nm as f64);
    let (rho_r, rho_a) = theoretical_resolutions(cfg, spec.chain.reference_range_m);

    let (mean_peak_power, islr_v, pel_v, snr_v, nmse_v, resid) = if single {
        let rcs = spec.scene.targets[0].rcs_var;
        let epp = acc.peak_power / tr;
        let islr_v = (acc.total - acc.main) / acc.main;
        let pel_v = pel(&acc.peaks, nm);
        let snr_v = snr_out(rcs, epp, cfg.noise_var, chi.gain_power * active_fraction);
        let nmse_v = nmse(mean_err, rcs, epp);
        let resid = identity_check(islr_v, pel_v, epp, snr_v, nmse_v);
        (Some(epp), Some(islr_v), Some(pel_v), Some(snr_v), nmse_v, Some(resid))
    } else {
        let nmse_v = if mean_ideal > 0.0 { mean_err / mean_ideal } else { 0.0 };
        (None, None, None, None, nmse_v, None)
    };

    let (sample, sample0) = acc.sample.expect("trial 0 always runs");
    let (mrr, mra) = match peak_bin {
        Some((k, j)) => {
            let range_cut: Vec<f64> = sample0.column(j).iter().map(|v| v.norm()).collect();
            let az_cut: Vec<f64> = sample0.row(k).iter().map(|v| v.norm()).collect();
            (
                measure_mainlobe_width(&range_cut, 16).ok().map(|w| w * cfg.range_pitch_m()),
                measure_mainlobe_width(&az_cut, 16).ok().map(|w| w * cfg.az_pitch_m()),
            )
        }
        None => (None, None),
    };

    let report = MetricsReport {
        rho_r_m: rho_r,
        rho_a_m: rho_a,
        measured_rho_r_m: mrr,
        measured_rho_a_m: mra,
        islr_db: islr_v.map(linear_to_db),
        pel: pel_v,
        snr_out_db: snr_v.map(linear_to_db),
        nmse: nmse_v,
        identity_residual: resid,
        trials: spec.trials,
        filter: spec.filter.kind.to_string(),
        mode: spec.mode.as_str().to_string(),
    };
    Ok(EnsembleResult {
        report,
        chi,
        mean_error_energy: mean_err,
        mean_noiseless_error_energy: acc.err0 / tr,
        mean_ideal_energy: mean_ideal,
        mean_peak_power,
        islr: islr_v,
        pel: pel_v,
        snr_out: snr_v,
        nmse: nmse_v,
        mean_power: acc.power.map(|p| p / tr),
        sample_image: sample,
        sample_noiseless: sample0,
    })
}
