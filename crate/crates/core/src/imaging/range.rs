use ndarray::Axis;
use rustfft::FftDirection;

use super::{fft, ImageGrid, Stage};
use crate::error::Result;
use crate::RadarConfig;

/// Unitary inverse DFT over subcarriers for every column.
pub fn range_compress(mut img: ImageGrid, cfg: &RadarConfig) -> Result<ImageGrid> {
    img.expect(Stage::Tf)?;
    fft::unitary_dft_axis(&mut img.data, Axis(0), FftDirection::Inverse);
    img.stage = Stage::Rc;
    img.axes.range_pitch_m = cfg.range_pitch_m();
    Ok(img)
}
