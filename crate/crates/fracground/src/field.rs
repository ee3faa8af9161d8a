//! Truncated periodic box, real-space fields and quadrature.
//!
//! The whole space is replaced by the periodic box `[-L, L)^N` sampled on a
//! uniform lattice of `M` points per axis. Quadrature is the plain rectangle
//! rule, which is spectrally accurate for smooth periodic integrands. Fields
//! that are meant to model decaying functions must be small near the box
//! boundary; `boundary_mass_ratio` reports how well that holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Uniform periodic lattice on `[-L, L)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    dim: usize,
    points_per_axis: usize,
    half_width: f64,
}

impl BoxGrid {
    pub fn new(dim: usize, points_per_axis: usize, half_width: f64) -> Result<Self> {
        if dim < 1 || dim > MAX_DIM {
            return Err(Error::BadDimension(dim));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::BadGridSize(points_per_axis));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::BadHalfWidth(half_width));
        }
        Ok(BoxGrid { dim, points_per_axis, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Lattice spacing `h = 2L / M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Quadrature weight `h^N` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of lattice points `M^N`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of axis index `i`: `x_i = -L + i h`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Signed frequency index of axis index `i`, in `{-M/2, ..., M/2 - 1}`.
    pub fn signed_index(&self, i: usize) -> i64 {
        let m = self.points_per_axis as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Frequency lattice value `xi_k = (pi / L) k` for axis index `i`.
    pub fn freq(&self, i: usize) -> f64 {
        std::f64::consts::PI / self.half_width * self.signed_index(i) as f64
    }

    /// Spacing of the frequency lattice, `pi / L`.
    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Decompose a flat row-major index (last axis fastest) into axis indices.
    pub fn axis_indices(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.points_per_axis;
            rest /= self.points_per_axis;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize; MAX_DIM]) -> usize {
        let mut flat = 0usize;
        for a in 0..self.dim {
            flat = flat * self.points_per_axis + idx[a];
        }
        flat
    }

    /// Position of a lattice point given its flat index.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.axis_indices(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    /// Squared distance of a lattice point from the origin.
    pub fn radius2(&self, flat: usize) -> f64 {
        let x = self.position(flat);
        x[..self.dim].iter().map(|&c| c * c).sum()
    }

    /// Squared frequency `|xi_k|^2` of a flat coefficient index.
    pub fn freq2(&self, flat: usize) -> f64 {
        let idx = self.axis_indices(flat);
        let mut f2 = 0.0;
        for a in 0..self.dim {
            let xi = self.freq(idx[a]);
            f2 += xi * xi;
        }
        f2
    }
}

/// Construct a grid; rejects bad dimensions and non-power-of-two sizes.
pub fn make_grid(dim: usize, points_per_axis: usize, half_width: f64) -> Result<BoxGrid> {
    BoxGrid::new(dim, points_per_axis, half_width)
}

/// Real-valued samples on a `BoxGrid`, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: BoxGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValues);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: BoxGrid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: BoxGrid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    /// Sample a function of position on the lattice.
    pub fn from_fn(grid: BoxGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|flat| {
                let x = grid.position(flat);
                f(&x[..dim])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// In-place `self += c * other`. Grids must match.
    pub fn axpy(&mut self, c: f64, other: &ScalarField) {
        assert_eq!(self.grid, other.grid, "axpy requires matching grids");
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += c * o;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Ratio of the largest magnitude on the outermost grid shell to the
    /// largest magnitude overall. Dilating a field whose mass touches the
    /// boundary is unreliable.
    pub fn boundary_mass_ratio(&self) -> f64 {
        let m = self.grid.points_per_axis();
        let dim = self.grid.dim();
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for (flat, &v) in self.values.iter().enumerate() {
            let idx = self.grid.axis_indices(flat);
            if idx[..dim].iter().any(|&i| i == 0 || i == m - 1) {
                edge = edge.max(v.abs());
            }
        }
        edge / peak
    }
}

/// Rectangle-rule integral `h^N * sum(values)`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid().cell_volume() * f.values().iter().sum::<f64>()
}

/// Discrete L2 inner product `h^N * sum(f g)`.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> f64 {
    assert_eq!(f.grid(), g.grid(), "inner product requires matching grids");
    f.grid().cell_volume()
        * f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>()
}

/// Samples of `x -> f(x / sigma)` by multilinear interpolation on the lattice.
///
/// Coordinates falling outside the sampled range read the boundary value,
/// so the input must have decayed near the box edge; a warning is logged
/// when the outermost shell carries more than `1e-6` of the peak magnitude.
pub fn resample_dilate(f: &ScalarField, sigma: f64) -> Result<ScalarField> {
    if !(0.5..=2.0).contains(&sigma) {
        return Err(Error::DilationOutOfRange(sigma));
    }
    if f.boundary_mass_ratio() > 1e-6 {
        log::warn!(
            "dilating a field with boundary mass ratio {:.3e}; result may be unreliable",
            f.boundary_mass_ratio()
        );
    }
    if sigma == 1.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let dim = grid.dim();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let l = grid.half_width();
    let inv_sigma = 1.0 / sigma;

    let mut out = vec![0.0; grid.len()];
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0f64; MAX_DIM];
    for (flat, o) in out.iter_mut().enumerate() {
        let x = grid.position(flat);
        for a in 0..dim {
            // float lattice index of the source point, clamped to the box
            let t = ((x[a] * inv_sigma + l) / h).clamp(0.0, (m - 1) as f64);
            let i0 = t.floor() as usize;
            let i0 = i0.min(m - 2);
            base[a] = i0;
            frac[a] = t - i0 as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = [0usize; MAX_DIM];
            for a in 0..dim {
                if corner >> a & 1 == 1 {
                    idx[a] = base[a] + 1;
                    w *= frac[a];
                } else {
                    idx[a] = base[a];
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * f.values()[grid.flat_index(&idx)];
            }
        }
        *o = acc;
    }
    ScalarField::new(grid, out)
}

/// Dilation by an arbitrary positive factor, composed out of per-call
/// steps inside the `[0.5, 2]` clip.
pub fn resample_dilate_composed(f: &ScalarField, sigma: f64) -> Result<ScalarField> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::DilationOutOfRange(sigma));
    }
    let mut steps = 1usize;
    while !(0.5..=2.0).contains(&sigma.powf(1.0 / steps as f64)) {
        steps += 1;
    }
    let step = sigma.powf(1.0 / steps as f64);
    let mut out = f.clone();
    for _ in 0..steps {
        out = resample_dilate(&out, step)?;
    }
    Ok(out)
}

/// Seeded random smooth decayed field: random Fourier amplitudes with a
/// Gaussian spectral envelope, localized by a Gaussian window in space.
pub fn random_smooth_field(grid: BoxGrid, seed: u64, amplitude: f64) -> ScalarField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_width();
    let dim = grid.dim();
    // a handful of random plane waves under a decaying envelope
    let n_modes = 8;
    let modes: Vec<([f64; MAX_DIM], f64, f64)> = (0..n_modes)
        .map(|_| {
            let mut k = [0.0; MAX_DIM];
            for ka in k.iter_mut().take(dim) {
                *ka = rng.gen_range(-4.0..4.0) * std::f64::consts::PI / l;
            }
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = rng.gen_range(0.2..1.0);
            (k, phase, amp)
        })
        .collect();
    let width2 = (l / 4.0) * (l / 4.0);
    let f = ScalarField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|&c| c * c).sum();
        let window = (-r2 / (2.0 * width2)).exp();
        let mut v = 0.0;
        for (k, phase, amp) in &modes {
            let dot: f64 = x.iter().zip(k.iter()).map(|(&xi, &ki)| xi * ki).sum();
            v += amp * (dot + phase).cos();
        }
        amplitude * window * v
    });
    f
}
