//! Unitary DFTs along grid axes.

use ndarray::Axis;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::Grid;

/// In-place unitary DFT of every lane along `axis`.
pub fn unitary_dft_axis(grid: &mut Grid, axis: Axis, direction: FftDirection) {
    let len = grid.len_of(axis);
    if len == 0 {
        return;
    }
    let fft = FftPlanner::new().plan_fft(len, direction);
    let scale = 1.0 / (len as f64).sqrt();
    let other = Axis(1 - axis.index());
    grid.axis_iter_mut(other).into_par_iter().for_each_init(
        || {
            (
                vec![Complex64::new(0.0, 0.0); len],
                vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            )
        },
        |(buf, scratch), mut lane| {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(buf, scratch);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = b * scale;
            }
        },
    );
}

/// Unitary DFT of a vector.
pub fn unitary_dft(data: &mut [Complex64], direction: FftDirection) {
    let n = data.len();
    if n == 0 {
        return;
    }
    FftPlanner::new().plan_fft(n, direction).process(data);
    let s = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= s);
}

/// Centred bin of natural-order DFT index `i`.
pub fn centered_bin(i: usize, len: usize) -> usize {
    (i + len / 2) % len
}

/// Natural-order DFT index of centred bin `b`.
pub fn natural_index(b: usize, len: usize) -> usize {
    (b + len - len / 2) % len
}

/// Signed frequency index of centred bin `b`.
pub fn signed_index(b: usize, len: usize) -> i64 {
    b as i64 - (len / 2) as i64
}

/// Reorder each lane along `axis` so the zero frequency sits at `len/2`.
pub fn fftshift_axis(grid: &mut Grid, axis: Axis) {
    reorder_axis(grid, axis, centered_bin);
}

/// Inverse of [`fftshift_axis`].
pub fn ifftshift_axis(grid: &mut Grid, axis: Axis) {
    reorder_axis(grid, axis, natural_index);
}

fn reorder_axis(grid: &mut Grid, axis: Axis, dest: fn(usize, usize) -> usize) {
    let len = grid.len_of(axis);
    let other = Axis(1 - axis.index());
    grid.axis_iter_mut(other).into_par_iter().for_each(|mut lane| {
        let src: Vec<Complex64> = lane.iter().copied().collect();
        for (i, v) in src.into_iter().enumerate() {
            lane[dest(i, len)] = v;
        }
    });
}

/// Total energy `Σ|x|²`, summed in a fixed order.
pub fn energy(grid: &Grid) -> f64 {
    grid.iter().map(|v| v.norm_sqr()).sum()
}
