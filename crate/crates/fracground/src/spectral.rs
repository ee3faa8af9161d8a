//! Discrete Fourier transforms on the periodic box.
//!
//! The normalization is the unitary angular-frequency convention: the
//! coefficient at lattice frequency `xi_k = (pi/L) k` approximates
//! `(2 pi)^{-N/2} \int f(x) e^{-i xi x} dx`, so the discrete Parseval
//! identity `h^N sum |f|^2 = (pi/L)^N sum |coeff|^2` holds exactly and the
//! fractional Laplacian is the bare multiplier `|xi|^{2s}`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

use crate::field::{BoxGrid, ScalarField};

/// Fourier coefficients of a field, in FFT layout (axis index `i` holds the
/// signed frequency `i` for `i < M/2` and `i - M` otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: BoxGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiply every coefficient by a function of the frequency vector magnitude squared.
    pub fn apply_multiplier(&mut self, mult: impl Fn(f64) -> f64) {
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            *c *= mult(self.grid.freq2(flat));
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_all_axes(grid: &BoxGrid, data: &mut [Complex64], inverse: bool) {
    let m = grid.points_per_axis();
    let dim = grid.dim();
    let len = grid.len();
    PLANNER.with(|p| {
        let fft = if inverse {
            p.borrow_mut().plan_fft_inverse(m)
        } else {
            p.borrow_mut().plan_fft_forward(m)
        };
        let mut line = vec![Complex64::default(); m];
        for axis in 0..dim {
            // stride between consecutive entries along this axis
            let stride = m.pow((dim - 1 - axis) as u32);
            let block = stride * m;
            let mut o = 0;
            while o < len {
                for i in 0..stride {
                    let start = o + i;
                    for j in 0..m {
                        line[j] = data[start + j * stride];
                    }
                    fft.process(&mut line);
                    for j in 0..m {
                        data[start + j * stride] = line[j];
                    }
                }
                o += block;
            }
        }
    });
}

/// Phase `(-1)^{k_1 + ... + k_N}` accounting for the box being centered at
/// the origin rather than starting at it.
fn center_phase(grid: &BoxGrid, flat: usize) -> f64 {
    let idx = grid.axis_indices(flat);
    let mut s = 0usize;
    for a in 0..grid.dim() {
        s += idx[a];
    }
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn scale_factor(grid: &BoxGrid) -> f64 {
    grid.cell_volume() / (2.0 * std::f64::consts::PI).powf(grid.dim() as f64 / 2.0)
}

pub fn forward_transform(f: &ScalarField) -> SpectralField {
    let grid = *f.grid();
    let mut data: Vec<Complex64> =
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(&grid, &mut data, false);
    let scale = scale_factor(&grid);
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= scale * center_phase(&grid, flat);
    }
    SpectralField { grid, coeffs: data }
}

pub fn inverse_transform(spec: &SpectralField) -> ScalarField {
    let grid = spec.grid;
    let mut data = spec.coeffs.clone();
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= center_phase(&grid, flat);
    }
    fft_all_axes(&grid, &mut data, true);
    let norm = 1.0 / (scale_factor(&grid) * grid.len() as f64);
    let values: Vec<f64> = data.iter().map(|c| c.re * norm).collect();
    ScalarField::new(grid, values).expect("inverse transform produced non-finite values")
}

/// Left-hand side of the discrete Parseval identity, `h^N sum |f|^2`.
pub fn l2_mass(f: &ScalarField) -> f64 {
    f.grid().cell_volume() * f.values().iter().map(|v| v * v).sum::<f64>()
}

/// Right-hand side of the discrete Parseval identity, `(pi/L)^N sum |coeff|^2`.
pub fn spectral_mass(spec: &SpectralField) -> f64 {
    spec.grid.freq_spacing().powi(spec.grid.dim() as i32)
        * spec.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
}
