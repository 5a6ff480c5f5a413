//! Point scatterers and raster-derived extended scenes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SarError};
use crate::geometry::closest_range;

/// How the complex reflectivity of a target is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMode {
    /// `d ~ CN(0, rcs_var)`, redrawn per realisation.
    #[default]
    Random,
    /// `d = √rcs_var`, e.g. a corner reflector.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTarget {
    #[serde(rename = "x")]
    pub x_m: f64,
    #[serde(rename = "y")]
    pub y_m: f64,
    pub rcs_var: f64,
    #[serde(default, rename = "mode")]
    pub amplitude_mode: AmplitudeMode,
}

impl PointTarget {
    pub fn new(x_m: f64, y_m: f64, rcs_var: f64, amplitude_mode: AmplitudeMode) -> Self {
        Self {
            x_m,
            y_m,
            rcs_var,
            amplitude_mode,
        }
    }

    /// Closest-approach slant range for a platform at `height_m`.
    pub fn closest_range(&self, height_m: f64) -> f64 {
        closest_range(self.x_m, height_m)
    }
}

/// Ground rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extent {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(SarError::InvalidParameter(format!(
                "empty scene extent {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub targets: Vec<PointTarget>,
    #[serde(default)]
    pub extent: Option<Extent>,
}

impl Scene {
    /// Scene without an extent check.
    pub fn from_targets(targets: Vec<PointTarget>) -> Self {
        Self {
            targets,
            extent: None,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `Σ σ²_α` over all targets.
    pub fn total_rcs(&self) -> f64 {
        self.targets.iter().map(|t| t.rcs_var).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = &self.extent {
            e.validate()?;
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.rcs_var > 0.0) {
                return Err(SarError::InvalidParameter(format!(
                    "target {i}: rcs_var must be > 0, got {}",
                    t.rcs_var
                )));
            }
            if let Some(e) = &self.extent {
                if !e.contains(t.x_m, t.y_m) {
                    return Err(SarError::InvalidParameter(format!(
                        "target {i} at ({}, {}) lies outside the scene extent",
                        t.x_m, t.y_m
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parse a JSON scene descriptor `{targets: [{x, y, rcs_var, mode}], extent}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| SarError::Field {
            path: format!("$.{}", e.path()),
            msg: e.inner().to_string(),
        })?;
        scene.validate()?;
        Ok(scene)
    }
}

/// Validated scene from explicit targets.
pub fn make_point_scene(targets: &[PointTarget], extent: Option<Extent>) -> Result<Scene> {
    let s = Scene {
        targets: targets.to_vec(),
        extent,
    };
    s.validate()?;
    Ok(s)
}

/// Affine map between raster pixels and ground coordinates. Columns run along
/// `x` (range), rows along `y` (azimuth); a pixel maps to its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelMap {
    pub extent: Extent,
    pub width: usize,
    pub height: usize,
}

impl PixelMap {
    pub fn to_ground(&self, col: f64, row: f64) -> (f64, f64) {
        let e = &self.extent;
        let dx = (e.x_max - e.x_min) / self.width as f64;
        let dy = (e.y_max - e.y_min) / self.height as f64;
        (e.x_min + (col + 0.5) * dx, e.y_min + (row + 0.5) * dy)
    }

    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let e = &self.extent;
        let dx = (e.x_max - e.x_min) / self.width as f64;
        let dy = (e.y_max - e.y_min) / self.height as f64;
        ((x - e.x_min) / dx - 0.5, (y - e.y_min) / dy - 0.5)
    }
}

/// Decoded 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels.
    pub pixels: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(SarError::Parse {
            offset: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<usize> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(format!("expected {what}"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| self.err(format!("{what} out of range")), Ok)
    }
}

/// Parse a binary (P5) or ASCII (P2) PGM with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    let mut c = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'2' || bytes[1] == b'5') {
        return c.err("missing P2/P5 magic");
    }
    let binary = bytes[1] == b'5';
    c.pos = 2;
    let width = c.uint("width")?;
    let height = c.uint("height")?;
    let maxval = c.uint("maxval")?;
    if maxval != 255 {
        return c.err(format!("maxval must be 255, got {maxval}"));
    }
    if width == 0 || height == 0 {
        return c.err("zero image dimension");
    }
    let count = width
        .checked_mul(height)
        .map_or_else(|| c.err("image dimensions overflow"), Ok)?;
    let pixels = if binary {
        if c.pos >= bytes.len() || !bytes[c.pos].is_ascii_whitespace() {
            return c.err("expected single whitespace before raster");
        }
        c.pos += 1;
        let end = c.pos + count;
        if end > bytes.len() {
            let have = bytes.len() - c.pos;
            c.pos = bytes.len();
            return c.err(format!("truncated raster: need {count} bytes, have {have}"));
        }
        bytes[c.pos..end].to_vec()
    } else {
        let mut px = Vec::with_capacity(count);
        for _ in 0..count {
            let v = c.uint("pixel value")?;
            if v > 255 {
                return c.err(format!("pixel value {v} exceeds maxval"));
            }
            px.push(v as u8);
        }
        px
    };
    Ok(Pgm {
        width,
        height,
        pixels,
    })
}

/// Extended scene from a raster: every pixel brighter than `threshold`
/// becomes a deterministic scatterer of amplitude `pixel/255 · rcs_scale`.
pub fn load_scene_pgm(bytes: &[u8], extent: Extent, threshold: u8, rcs_scale: f64) -> Result<Scene> {
    extent.validate()?;
    if !(rcs_scale > 0.0) {
        return Err(SarError::InvalidParameter(format!(
            "rcs_scale must be > 0, got {rcs_scale}"
        )));
    }
    let img = parse_pgm(bytes)?;
    let map = PixelMap {
        extent,
        width: img.width,
        height: img.height,
    };
    let mut targets = Vec::new();
    for row in 0..img.height {
        for col in 0..img.width {
            let p = img.pixels[row * img.width + col];
            if p > threshold {
                let (x, y) = map.to_ground(col as f64, row as f64);
                let amp = p as f64 / 255.0 * rcs_scale;
                targets.push(PointTarget::new(x, y, amp * amp, AmplitudeMode::Deterministic));
            }
        }
    }
    Ok(Scene {
        targets,
        extent: Some(extent),
    })
}
