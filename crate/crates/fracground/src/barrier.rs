//! The plateau-collar competitor and the constraint normalization that
//! seeds the minimizer.
//!
//! The competitor has height `zeta` on the ball of radius `R`, falls
//! linearly to zero across a unit collar and vanishes beyond. An optional
//! dilation `sigma` rescales its argument; the constraint scan picks
//! `sigma` so that the dilated competitor satisfies `V = 1` on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoxGrid, ScalarField};
use crate::fracops::{constraint_v, l2_norm, seminorm2_spectral, zeta_min};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub zeta: f64,
    pub radius: f64,
    pub sigma: Option<f64>,
}

impl BarrierSpec {
    pub fn new(zeta: f64, radius: f64) -> Self {
        BarrierSpec { zeta, radius, sigma: None }
    }

    pub fn with_sigma(zeta: f64, radius: f64, sigma: f64) -> Self {
        BarrierSpec { zeta, radius, sigma: Some(sigma) }
    }

    /// Plateau-collar profile as a function of |x|.
    pub fn profile(&self, r: f64) -> f64 {
        let t = r / self.sigma.unwrap_or(1.0);
        if t <= self.radius {
            self.zeta
        } else if t < self.radius + 1.0 {
            self.zeta * (self.radius + 1.0 - t)
        } else {
            0.0
        }
    }

    /// Radius beyond which the (dilated) competitor vanishes.
    pub fn support_radius(&self) -> f64 {
        (self.radius + 1.0) * self.sigma.unwrap_or(1.0)
    }
}

/// Sample the competitor on the grid. The support must sit strictly inside
/// the box.
pub fn make_barrier(spec: &BarrierSpec, grid: &BoxGrid) -> Result<ScalarField> {
    if spec.support_radius() >= grid.half_width() {
        return Err(Error::BarrierOutsideBox {
            support: spec.support_radius(),
            half_width: grid.half_width(),
        });
    }
    Ok(ScalarField::from_fn(*grid, |x| {
        let r = x.iter().map(|&c| c * c).sum::<f64>().sqrt();
        spec.profile(r)
    }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeminormScanRow {
    pub radius: f64,
    pub seminorm2: f64,
    pub l2norm2: f64,
    pub hs_norm2: f64,
}

/// Seminorm and norm of the competitor for each radius in the list.
pub fn barrier_seminorm_scan(
    zeta: f64,
    radii: &[f64],
    grid: &BoxGrid,
    s: f64,
) -> Result<Vec<SeminormScanRow>> {
    radii
        .iter()
        .map(|&radius| {
            let w = make_barrier(&BarrierSpec::new(zeta, radius), grid)?;
            let seminorm2 = seminorm2_spectral(&w, s);
            let l2 = l2_norm(&w);
            Ok(SeminormScanRow {
                radius,
                seminorm2,
                l2norm2: l2 * l2,
                hs_norm2: seminorm2 + l2 * l2,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstraintScanRow {
    pub radius: f64,
    pub v: f64,
    pub sigma_star: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintScan {
    pub rows: Vec<ConstraintScanRow>,
    pub r_star: f64,
    pub sigma_star: f64,
    /// Least-squares coefficients of `V(R) ~ c1 R^N - c2 R^{N-1}` over the scan.
    pub growth_fit: (f64, f64),
}

/// Default geometric radius scan `{1, 2, 4, ...}` capped by the box.
pub fn default_radius_scan(grid: &BoxGrid) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r + 1.0 < grid.half_width() {
        radii.push(r);
        r *= 2.0;
    }
    radii
}

/// Scan the competitor family for the smallest radius with positive
/// constraint value, then normalize to `V = 1` by dilation.
pub fn barrier_constraint_scan(p: f64, zeta: f64, grid: &BoxGrid) -> Result<ConstraintScan> {
    let threshold = zeta_min(p);
    if zeta <= threshold {
        return Err(Error::PlateauBelowThreshold { zeta, zeta_min: threshold });
    }
    let radii = default_radius_scan(grid);
    let mut rows = Vec::new();
    let mut first_positive: Option<(f64, f64)> = None;
    for &radius in &radii {
        let w = make_barrier(&BarrierSpec::new(zeta, radius), grid)?;
        let v = constraint_v(&w, p);
        let sigma_star = if v > 0.0 {
            Some(v.powf(-1.0 / grid.dim() as f64))
        } else {
            None
        };
        rows.push(ConstraintScanRow { radius, v, sigma_star });
        if v > 0.0 && first_positive.is_none() {
            first_positive = Some((radius, v));
        }
    }
    let (r_star, v_star) = first_positive.ok_or(Error::NoFeasibleRadius)?;
    let sigma_star = refine_sigma(zeta, r_star, v_star, p, grid)?;

    // fit V(R) = c1 R^N - c2 R^{N-1} over the scan by least squares
    let n = grid.dim() as f64;
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for row in &rows {
        let x1 = row.radius.powf(n);
        let x2 = -row.radius.powf(n - 1.0);
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * row.v;
        b2 += x2 * row.v;
    }
    let det = a11 * a22 - a12 * a12;
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c2 = (b2 * a11 - b1 * a12) / det;

    Ok(ConstraintScan { rows, r_star, sigma_star, growth_fit: (c1, c2) })
}

/// Build the normalized competitor `w_{R*, sigma*}` with `V = 1` on the grid.
pub fn normalized_barrier(p: f64, zeta: f64, grid: &BoxGrid) -> Result<(ScalarField, ConstraintScan)> {
    let scan = barrier_constraint_scan(p, zeta, grid)?;
    let spec = BarrierSpec::with_sigma(zeta, scan.r_star, scan.sigma_star);
    let w = make_barrier(&spec, grid)?;
    Ok((w, scan))
}

/// Start from the continuum scaling estimate `sigma = V^{-1/N}` and refine
/// against the grid quadrature so the sampled dilate satisfies `V = 1`.
///
/// The grid V is continuous but only piecewise smooth in sigma (cells enter
/// and leave the plateau), so a sign-change bracket plus bisection is used
/// instead of a derivative-based iteration. The bracket closest to the
/// continuum estimate wins.
fn refine_sigma(zeta: f64, radius: f64, v: f64, p: f64, grid: &BoxGrid) -> Result<f64> {
    let eval = |sigma: f64| -> Result<f64> {
        let w = make_barrier(&BarrierSpec::with_sigma(zeta, radius, sigma), grid)?;
        Ok(constraint_v(&w, p) - 1.0)
    };
    let estimate = v.powf(-1.0 / grid.dim() as f64);
    let sigma_max = 0.999 * grid.half_width() / (radius + 1.0);
    let lo = (estimate / 16.0).min(sigma_max / 2.0);
    let hi = (estimate * 16.0).min(sigma_max);
    let steps = 256;
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut bracket: Option<(f64, f64)> = None;
    let mut best_dist = f64::INFINITY;
    let mut prev = (lo, eval(lo)?);
    for k in 1..=steps {
        let sigma = lo * ratio.powi(k);
        let f = eval(sigma)?;
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if prev.1.signum() != f.signum() {
            let mid = 0.5 * (prev.0 + sigma);
            let dist = (mid / estimate).ln().abs();
            if dist < best_dist {
                best_dist = dist;
                bracket = Some((prev.0, sigma));
            }
        }
        prev = (sigma, f);
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoFeasibleRadius)?;
    let mut fa = eval(a)?;
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        let fm = eval(mid)?;
        if fm.abs() <= 1e-10 {
            return Ok(mid);
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let mid = 0.5 * (a + b);
    if eval(mid)?.abs() <= 1e-6 {
        Ok(mid)
    } else {
        Err(Error::NoFeasibleRadius)
    }
}
