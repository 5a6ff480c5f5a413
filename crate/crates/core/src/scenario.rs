//! JSON-configured scenario runs writing metrics, images and profiles.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use crate::echo::{synthesize_echo, EchoSeeds};
use crate::error::{Result, SarError};
use crate::imaging::{focus_stages, ChainOptions, ImageGrid, KaMode, RcmcMethod, Stage};
use crate::io::emit_pgm;
use crate::metrics::{run_ensemble, EnsembleSpec, MetricsReport, Mode};
use crate::scene::{load_scene_pgm, Extent, Scene};
use crate::tf_filter::{apply_tf_filter, FilterKind, FilterSpec};
use crate::waveform::{gen_symbol_grid, srs_mask, Constellation, SrsConfig};
use crate::{db_to_linear, rng, Grid, RadarConfig};

/// Scene given inline or as a raster file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSource {
    Pgm(PgmScene),
    Inline(Scene),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgmScene {
    /// Relative paths resolve against the config file's directory.
    pub pgm: PathBuf,
    pub extent: Extent,
    #[serde(default = "default_threshold")]
    pub threshold: u8,
    #[serde(default = "default_rcs_scale")]
    pub rcs_scale: f64,
}

fn default_threshold() -> u8 {
    0
}
fn default_rcs_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrSweep {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSelection {
    #[serde(default = "default_images")]
    pub images: Vec<Stage>,
    #[serde(default = "yes")]
    pub profiles: bool,
    #[serde(default = "default_floor")]
    pub db_floor: f64,
}

fn default_images() -> Vec<Stage> {
    vec![Stage::Ac]
}
fn yes() -> bool {
    true
}
fn default_floor() -> f64 {
    -40.0
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self {
            images: default_images(),
            profiles: true,
            db_floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    radar: RadarConfig,
    #[serde(default)]
    scene: Option<SceneSource>,
    #[serde(default = "default_constellation")]
    constellation: String,
    #[serde(default = "default_filters")]
    filters: Vec<FilterKind>,
    #[serde(default)]
    mode: Mode,
    #[serde(default)]
    srs: Option<SrsConfig>,
    snr_in_db: SnrSweep,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    rcmc: RcmcMethod,
    #[serde(default)]
    ka_mode: KaMode,
    #[serde(default)]
    reference_range_m: Option<f64>,
    #[serde(default)]
    mainlobe_halfwidth: usize,
    #[serde(default)]
    outputs: OutputSelection,
}

fn default_constellation() -> String {
    "qam256".into()
}
fn default_filters() -> Vec<FilterKind> {
    FilterKind::ALL.to_vec()
}
fn default_trials() -> usize {
    1
}
/// Validated scenario with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub radar: RadarConfig,
    pub scene: SceneSource,
    pub constellation: String,
    pub filters: Vec<FilterKind>,
    pub mode: Mode,
    pub srs: Option<SrsConfig>,
    /// Deduplicated, in first-seen order.
    pub snr_in_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub rcmc: RcmcMethod,
    pub ka_mode: KaMode,
    pub reference_range_m: Option<f64>,
    /// ISLR mainlobe half-width in bins; 0 keeps only the peak bin.
    pub mainlobe_halfwidth: usize,
    pub outputs: OutputSelection,
    /// Non-fatal notes produced while parsing.
    pub warnings: Vec<String>,
}

fn field_err(path: &str, msg: impl Into<String>) -> SarError {
    SarError::Field {
        path: path.to_string(),
        msg: msg.into(),
    }
}

/// Parse and validate a JSON scenario; errors name the offending JSON path.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let p = e.path().to_string();
        let path = if p == "." { "$".to_string() } else { format!("$.{p}") };
        field_err(&path, e.inner().to_string())
    })?;
    let mut warnings = Vec::new();
    let sweep = match raw.snr_in_db {
        SnrSweep::One(v) => vec![v],
        SnrSweep::Many(v) => v,
    };
    let mut snr: Vec<f64> = Vec::with_capacity(sweep.len());
    for v in sweep {
        if snr.contains(&v) {
            let w = format!("duplicate snr_in_db entry {v} dropped");
            log::warn!("{w}");
            warnings.push(w);
        } else {
            snr.push(v);
        }
    }
    let mut filters: Vec<FilterKind> = Vec::new();
    for f in raw.filters {
        if !filters.contains(&f) {
            filters.push(f);
        }
    }
    let cfg = ScenarioConfig {
        radar: raw.radar,
        scene: raw.scene.unwrap_or(SceneSource::Inline(Scene::default())),
        constellation: raw.constellation,
        filters,
        mode: raw.mode,
        srs: raw.srs,
        snr_in_db: snr,
        trials: raw.trials,
        seed: raw.seed,
        rcmc: raw.rcmc,
        ka_mode: raw.ka_mode,
        reference_range_m: raw.reference_range_m,
        mainlobe_halfwidth: raw.mainlobe_halfwidth,
        outputs: raw.outputs,
        warnings,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Read a scenario file; relative raster paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let SceneSource::Pgm(p) = &mut cfg.scene {
        if p.pgm.is_relative() {
            if let Some(dir) = path.parent() {
                p.pgm = dir.join(&p.pgm);
            }
        }
    }
    Ok(cfg)
}

/// Command-line overrides applied on top of a parsed file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub filter: Option<FilterKind>,
    pub mode: Option<Mode>,
    pub snr_in_db: Vec<f64>,
}

impl ScenarioConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(f) = o.filter {
            self.filters = vec![f];
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if !o.snr_in_db.is_empty() {
            self.snr_in_db.clear();
            for &v in &o.snr_in_db {
                if !self.snr_in_db.contains(&v) {
                    self.snr_in_db.push(v);
                }
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.radar
            .validate()
            .map_err(|e| field_err("$.radar", e.to_string()))?;
        match (self.mode, &self.srs) {
            (Mode::PilotOnly, None) => {
                return Err(field_err("$.srs", "required when mode is pilot_only"))
            }
            (Mode::PilotOnly, Some(s)) => s
                .validate(self.radar.n_subcarriers)
                .map_err(|e| field_err("$.srs", e.to_string()))?,
            (Mode::DataAided, Some(_)) => {
                return Err(field_err("$.srs", "only valid when mode is pilot_only"))
            }
            (Mode::DataAided, None) => {}
        }
        if self.trials == 0 {
            return Err(field_err("$.trials", "must be >= 1"));
        }
        if self.snr_in_db.is_empty() {
            return Err(field_err("$.snr_in_db", "sweep list must not be empty"));
        }
        if let Some(v) = self.snr_in_db.iter().find(|v| !v.is_finite()) {
            return Err(field_err("$.snr_in_db", format!("non-finite entry {v}")));
        }
        if self.filters.is_empty() {
            return Err(field_err("$.filters", "must list at least one filter"));
        }
        Constellation::by_name(&self.constellation)
            .map_err(|e| field_err("$.constellation", e.to_string()))?;
        if let Some(r) = self.reference_range_m {
            if !(r > 0.0) {
                return Err(field_err("$.reference_range_m", "must be > 0"));
            }
        }
        if !(self.outputs.db_floor < 0.0) {
            return Err(field_err("$.outputs.db_floor", "must be negative"));
        }
        if let SceneSource::Inline(s) = &self.scene {
            s.validate().map_err(|e| field_err("$.scene", e.to_string()))?;
        }
        Ok(())
    }

    /// Radar configuration the chain actually runs on: pilot-only runs keep
    /// exactly the pilot symbols.
    pub fn processing_radar(&self) -> RadarConfig {
        let mut r = self.radar.clone();
        if let (Mode::PilotOnly, Some(s)) = (self.mode, &self.srs) {
            r.azimuth_downsample = s.period_symbols();
        }
        r
    }

    pub fn load_scene(&self) -> Result<Scene> {
        match &self.scene {
            SceneSource::Inline(s) => Ok(s.clone()),
            SceneSource::Pgm(p) => {
                let bytes = fs::read(&p.pgm)?;
                load_scene_pgm(&bytes, p.extent, p.threshold, p.rcs_scale)
            }
        }
    }
}

/// Reference range for chirp rate and migration: mean target range, else
/// the scene centre, else the beam centre.
pub fn default_reference_range(scene: &Scene, radar: &RadarConfig) -> f64 {
    let h = radar.platform.height_m;
    if !scene.is_empty() {
        scene.targets.iter().map(|t| t.closest_range(h)).sum::<f64>() / scene.len() as f64
    } else if let Some(e) = scene.extent {
        (0.5 * (e.x_min + e.x_max)).hypot(h)
    } else {
        h / radar.platform.elevation_angle_rad.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_in_db: f64,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub points: Vec<SweepPoint>,
    pub files: Vec<PathBuf>,
}

fn noise_for(scene: &Scene, snr_db: f64) -> f64 {
    let rcs = scene.total_rcs();
    let rcs = if rcs > 0.0 { rcs } else { 1.0 };
    rcs / db_to_linear(snr_db)
}

/// Stage images of one realisation (trial 0 seeds of the first sweep point).
fn stage_images(
    sc: &ScenarioConfig,
    radar: &RadarConfig,
    scene: &Scene,
    constellation: &Constellation,
    mask: Option<&ndarray::Array2<bool>>,
    filter: FilterSpec,
    opts: &ChainOptions,
) -> Result<(Grid, crate::imaging::ChainProducts)> {
    let base = rng::derive_seed(sc.seed, 0);
    let s = gen_symbol_grid(radar, constellation, rng::derive_seed(base, 0), mask)?;
    let seeds = EchoSeeds::new(rng::derive_seed(base, 1), rng::derive_seed(base, 2));
    let y = synthesize_echo(scene, radar, &s, seeds)?;
    let tf = apply_tf_filter(&y, &s, &filter)?;
    let stages = focus_stages(tf.clone(), radar, opts)?;
    Ok((tf, stages))
}

fn write_profile(path: &Path, values: &[f64], pitch: f64, unit: &str) -> Result<()> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let peak = if peak > 0.0 { peak } else { 1.0 };
    let mut out = format!("bin,{unit},magnitude,db\n");
    for (i, &v) in values.iter().enumerate() {
        let db = if v > 0.0 { 20.0 * (v / peak).log10() } else { f64::NEG_INFINITY };
        out.push_str(&format!("{i},{:.6},{v:.9e},{db:.4}\n", i as f64 * pitch));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Execute every sweep point and filter and write the artifacts into `out_dir`.
pub fn run_scenario(sc: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutcome> {
    sc.validate()?;
    fs::create_dir_all(out_dir)?;
    let scene = sc.load_scene()?;
    let constellation = Constellation::by_name(&sc.constellation)?;
    let mut radar = sc.processing_radar();
    let mask = match (sc.mode, &sc.srs) {
        (Mode::PilotOnly, Some(s)) => Some(srs_mask(&radar, s)?.dense(&radar)),
        _ => None,
    };
    let r_ref = sc
        .reference_range_m
        .unwrap_or_else(|| default_reference_range(&scene, &radar));
    let opts = ChainOptions {
        reference_range_m: r_ref,
        rcmc: sc.rcmc,
        ka_mode: sc.ka_mode,
    };
    let mut points = Vec::new();
    let mut files = Vec::new();
    for &snr_db in &sc.snr_in_db {
        radar.noise_var = noise_for(&scene, snr_db);
        let snr_lin = if scene.total_rcs() > 0.0 {
            scene.total_rcs() / radar.noise_var
        } else {
            db_to_linear(snr_db)
        };
        for &kind in &sc.filters {
            log::info!("snr {snr_db} dB, filter {kind}");
            let spec = EnsembleSpec {
                cfg: &radar,
                scene: &scene,
                constellation: &constellation,
                filter: FilterSpec::of(kind, snr_lin),
                chain: opts,
                mask: mask.as_ref(),
                mode: sc.mode,
                trials: sc.trials,
                seed: sc.seed,
                mainlobe_halfwidth: sc.mainlobe_halfwidth,
                keep_mean_power: false,
            };
            let res = run_ensemble(&spec)?;
            points.push(SweepPoint {
                snr_in_db: snr_db,
                report: res.report,
            });
        }
    }

    let metrics_path = out_dir.join("metrics.json");
    let body = serde_json::to_string_pretty(&MetricsFile {
        points: points.clone(),
    })
    .map_err(|e| SarError::Config(e.to_string()))?;
    fs::write(&metrics_path, body + "\n")?;
    files.push(metrics_path);

    let sweep_path = out_dir.join("nmse_sweep.csv");
    let mut csv = String::from("snr_db,filter,nmse\n");
    for p in &points {
        csv.push_str(&format!("{},{},{:.9e}\n", p.snr_in_db, p.report.filter, p.report.nmse));
    }
    fs::write(&sweep_path, csv)?;
    files.push(sweep_path);

    radar.noise_var = noise_for(&scene, sc.snr_in_db[0]);
    let snr_lin = if scene.total_rcs() > 0.0 {
        scene.total_rcs() / radar.noise_var
    } else {
        db_to_linear(sc.snr_in_db[0])
    };
    let filter = FilterSpec::of(sc.filters[0], snr_lin);
    if !sc.outputs.images.is_empty() || sc.outputs.profiles {
        let (tf, st) = stage_images(sc, &radar, &scene, &constellation, mask.as_ref(), filter, &opts)?;
        for stage in &sc.outputs.images {
            let grid: &Grid = match stage {
                Stage::Tf => &tf,
                Stage::Rc => &st.rc.data,
                Stage::Rd => &st.rd.data,
                Stage::Rcmc => &st.rcmc.data,
                Stage::Ac => &st.ac.data,
            };
            let path = out_dir.join(format!("image_{stage}.pgm"));
            fs::write(&path, emit_pgm(grid, sc.outputs.db_floor)?)?;
            files.push(path);
        }
        if sc.outputs.profiles {
            let ac: &ImageGrid = &st.ac;
            let (k, j) = ac.argmax();
            let range: Vec<f64> = ac.data.column(j).iter().map(|v| v.norm()).collect();
            let az: Vec<f64> = ac.data.row(k).iter().map(|v| v.norm()).collect();
            let rp = out_dir.join("profile_range.csv");
            write_profile(&rp, &range, radar.range_pitch_m(), "range_m")?;
            let ap = out_dir.join("profile_azimuth.csv");
            write_profile(&ap, &az, radar.az_pitch_m(), "azimuth_m")?;
            files.push(rp);
            files.push(ap);
        }
    }
    Ok(ScenarioOutcome { points, files })
}
