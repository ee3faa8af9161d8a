//! Constrained minimization of the seminorm on the constraint set `V = 1`,
//! multiplier extraction, rescaling to a PDE solution, an independent
//! fixed-point oracle, and the residual/identity certificate.
//!
//! The descent direction is the constrained gradient: the fractional
//! Laplacian of the iterate with its component along the constraint
//! gradient removed. Feasibility drift is then second order and is repaired
//! by the same dilation scale change that drives the scaling laws, so the
//! dilation factors shrink to 1 as the iteration converges and the
//! interpolation error of the projection vanishes with them.

use serde::Serialize;

use crate::barrier::normalized_barrier;
use crate::error::{Error, Result};
use crate::field::{
    inner_product, make_grid, resample_dilate, BoxGrid, ScalarField,
};
use crate::fracops::{
    constraint_v, frac_laplacian, l2_norm, lp_norm, seminorm2_of_spectrum,
    seminorm2_spectral, Nonlinearity,
};
use crate::params::ProblemParams;
use crate::rearrange::{monotonicity_defect, rearrange_decreasing, shell_average};
use crate::spectral::forward_transform;

/// Constraint slack accepted at every logged iterate.
pub const CONSTRAINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub step_size: f64,
    pub symmetrize_every: usize,
    pub max_iters: usize,
    pub tol_grad: f64,
    pub sigma_clip: (f64, f64),
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_size: 0.05,
            symmetrize_every: 10,
            max_iters: 50_000,
            tol_grad: 1e-8,
            sigma_clip: (0.9, 1.1),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterateRecord {
    pub iter: usize,
    pub t: f64,
    pub v: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AprioriRecord {
    pub l2: f64,
    /// `L^{2N/(N-2s)}` norm, NaN when the exponent degenerates.
    pub l2star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerReport {
    pub params: ProblemParams,
    pub t: f64,
    pub v: f64,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub gradient_norm: f64,
    /// `\int g(u) u dx` of the final iterate, for the multiplier cross-check.
    pub gu_pairing: f64,
    pub converged: bool,
    pub iterations: usize,
    pub iterates: Vec<IterateRecord>,
    pub a_priori: Vec<AprioriRecord>,
}

pub struct MinimizeOutcome {
    pub field: ScalarField,
    pub report: MinimizerReport,
}

fn l2star_norm(f: &ScalarField, params: &ProblemParams) -> f64 {
    let q = params.two_star_s();
    if q.is_finite() {
        lp_norm(f, q)
    } else {
        f64::NAN
    }
}

/// Close the last gap to `V = 1` by a Newton amplitude correction.
///
/// The dilation projection cannot make corrections below roughly 1e-3 on a
/// grid: the resampling interpolation perturbs V by an amount linear in
/// `|sigma - 1|` with a field-dependent sign, so the response of V to sigma
/// is kinked at 1 and a root below the interpolation bias is unreachable.
/// Amplitude scaling has no such floor and V is smooth and locally
/// monotone in it near the constraint set.
fn amplitude_polish(f: ScalarField, p: f64) -> ScalarField {
    let nl = Nonlinearity { p };
    let mut a = 1.0f64;
    for _ in 0..60 {
        let fa = constraint_v(&f.scaled(a), p) - 1.0;
        if fa.abs() <= 1e-12 {
            break;
        }
        let da = inner_product(&f.scaled(a).map(|t| nl.g(t)), &f);
        if !da.is_normal() {
            break;
        }
        a = (a - fa / da).clamp(0.5 * a, 2.0 * a);
    }
    f.scaled(a)
}

/// Restore `V = 1`: a clipped dilation for coarse corrections (the scale
/// change that drives the scaling laws), then the amplitude polish for the
/// sub-grid remainder. Returns the projected field and whether the dilation
/// clip saturated.
fn project_constraint(
    cand: ScalarField,
    p: f64,
    clip: (f64, f64),
) -> Result<(ScalarField, bool)> {
    let dim = cand.grid().dim() as f64;
    let v = constraint_v(&cand, p);
    let mut out = cand;
    let mut saturated = false;
    if (v - 1.0).abs() > 1e-3 && v > 0.0 {
        let sigma_raw = v.powf(-1.0 / dim);
        let sigma = sigma_raw.clamp(clip.0, clip.1);
        saturated = sigma != sigma_raw;
        out = resample_dilate(&out, sigma)?;
    }
    Ok((amplitude_polish(out, p), saturated))
}

/// Gradient descent on the seminorm restricted to `V = 1`, with periodic
/// symmetrization and dilation projection.
pub fn minimize_constrained(
    init: &ScalarField,
    params: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<MinimizeOutcome> {
    if !params.subcritical() {
        return Err(Error::SupercriticalExponent { p: params.p, p_crit: params.p_crit() });
    }
    let v0 = constraint_v(init, params.p);
    if (v0 - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::InfeasibleInit(v0));
    }
    let nl = Nonlinearity::new(params.p)?;
    let s = params.s;

    let mut u = init.clone();
    let mut t = seminorm2_spectral(&u, s);
    let mut v = v0;
    let mut step = cfg.step_size;
    let mut iterates = Vec::new();
    let mut a_priori = Vec::new();
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;
    let mut prev_bb: Option<(ScalarField, ScalarField)> = None; // (u, d) of last accepted step
    let mut iterations = 0;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let au = frac_laplacian(&u, s)?;
        let gu = u.map(|x| nl.g(x));
        let gg = inner_product(&gu, &gu);
        let mu = if gg > 0.0 { inner_product(&au, &gu) / gg } else { 0.0 };
        let mut d = au.clone();
        d.axpy(-mu, &gu);

        let u_l2 = l2_norm(&u);
        grad_norm = l2_norm(&d) / u_l2.max(1e-300);
        if grad_norm < cfg.tol_grad {
            converged = true;
            break;
        }

        // Barzilai-Borwein step estimate from the last accepted pair
        if let Some((pu, pd)) = &prev_bb {
            let mut du = u.clone();
            du.axpy(-1.0, pu);
            let mut dd = d.clone();
            dd.axpy(-1.0, pd);
            let num = inner_product(&du, &dd);
            let den = inner_product(&dd, &dd);
            if den > 0.0 && num != 0.0 {
                step = (num / den).abs().clamp(1e-10, 1e4);
            }
        }

        let mut accepted = false;
        let mut halvings = 0;
        let mut last_saturated;
        while !accepted {
            let mut cand = u.clone();
            cand.axpy(-step, &d);
            let (cand, saturated) = project_constraint(cand, params.p, cfg.sigma_clip)?;
            last_saturated = saturated;
            let v_cand = constraint_v(&cand, params.p);
            let t_cand = seminorm2_spectral(&cand, s);
            // the seminorm sum carries ~1e-13 relative roundoff; demanding
            // strict decrease below that floor rejects every late-stage step
            if (v_cand - 1.0).abs() <= CONSTRAINT_TOL && t_cand <= t * (1.0 + 1e-12) {
                prev_bb = Some((u.clone(), d.clone()));
                u = cand;
                t = t_cand.min(t);
                v = v_cand;
                accepted = true;
            } else {
                log::debug!(
                    "iter {iter} halving {halvings}: step {step:.3e} grad {grad_norm:.3e} t {t:.12e} t_cand {t_cand:.12e} v_cand {v_cand:.3e} sat {saturated}"
                );
                step *= 0.5;
                halvings += 1;
                if halvings > 20 {
                    return if last_saturated {
                        Err(Error::ConstraintEscape(iter))
                    } else {
                        Err(Error::Divergence(iter))
                    };
                }
            }
        }

        if cfg.symmetrize_every > 0 && (iter + 1) % cfg.symmetrize_every == 0 {
            // never increases the seminorm beyond grid slack and preserves V
            // exactly; applied only when it does not break monotonicity
            let r = rearrange_decreasing(&u);
            let t_r = seminorm2_spectral(&r, s);
            if t_r <= t {
                u = r;
                t = t_r;
                v = constraint_v(&u, params.p);
            }
        }

        iterates.push(IterateRecord { iter, t, v, step });
        a_priori.push(AprioriRecord { l2: l2_norm(&u), l2star: l2star_norm(&u, params) });
    }

    let gu_pairing = inner_product(&u.map(|x| nl.g(x)), &u);
    let report = MinimizerReport {
        params: *params,
        t,
        v,
        theta: None,
        lambda: None,
        gradient_norm: grad_norm,
        gu_pairing,
        converged,
        iterations,
        iterates,
        a_priori,
    };
    Ok(MinimizeOutcome { field: u, report })
}

/// Multiplier from dilation stationarity, `theta = (N - 2s) T / N`,
/// cross-checked against the Euler-Lagrange pairing `2T / \int g(u) u`.
pub fn lagrange_multiplier(report: &MinimizerReport) -> Result<f64> {
    let params = &report.params;
    let n = params.dim as f64;
    if n <= 2.0 * params.s {
        return Err(Error::DegenerateOrder { dim: params.dim, s: params.s });
    }
    let theta = (n - 2.0 * params.s) * report.t / n;
    let theta_alt = 2.0 * report.t / report.gu_pairing;
    if (theta / theta_alt - 1.0).abs() > 0.05 {
        return Err(Error::MultiplierMismatch { theta, theta_alt });
    }
    Ok(theta)
}

/// Rescale the minimizer into a solution of the PDE: `v(x) = u(x / lambda)`
/// with `lambda = (theta / 2)^{1/(2s)}`.
///
/// Implemented by reinterpreting the box, `L -> lambda L`: the sample values
/// are unchanged and the dilation is exact, with no interpolation at any
/// scale factor.
pub fn rescale_to_solution(
    u: &ScalarField,
    theta: f64,
    params: &ProblemParams,
) -> Result<(ScalarField, f64)> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::BadRescaleFactor(theta));
    }
    let lambda = (theta / 2.0).powf(1.0 / (2.0 * params.s));
    if !(0.25..=4.0).contains(&lambda) {
        log::warn!("rescale factor {lambda} outside [1/4, 4]; box reinterpretation is still exact");
    }
    let old = u.grid();
    let grid = make_grid(old.dim(), old.points_per_axis(), lambda * old.half_width())?;
    let v = ScalarField::new(grid, u.values().to_vec())?;
    Ok((v, lambda))
}

/// Stabilized fixed-point iteration for the PDE, used as an oracle
/// independent of the constrained minimization route.
pub fn petviashvili_solve(
    init: &ScalarField,
    params: &ProblemParams,
    max_iters: usize,
) -> Result<ScalarField> {
    if init.max_abs() == 0.0 || init.min_value() < 0.0 {
        return Err(Error::InfeasibleInit(0.0));
    }
    let nl = Nonlinearity::new(params.p)?;
    let s = params.s;
    let alpha = params.p / (params.p - 1.0);
    let mut u = init.clone();
    let mut recent: Vec<f64> = Vec::new();
    for _ in 0..max_iters {
        let au = frac_laplacian(&u, s)?;
        let num = inner_product(&u, &au) + inner_product(&u, &u);
        let nl_u = u.map(|x| nl.g1(x));
        let den = inner_product(&u, &nl_u);
        let gamma = num / den;
        if !(gamma > 0.0) {
            return Err(Error::NonpositiveGamma(gamma));
        }
        let mut spec = forward_transform(&nl_u);
        spec.apply_multiplier(|xi2| 1.0 / (xi2.powf(s) + 1.0));
        let next = crate::spectral::inverse_transform(&spec).scaled(gamma.powf(alpha));
        let mut diff = next.clone();
        diff.axpy(-1.0, &u);
        let change = l2_norm(&diff) / l2_norm(&u).max(1e-300);
        u = next;
        if change < 1e-10 {
            return Ok(u);
        }
        recent.push(change);
        if recent.len() > 60 {
            recent.remove(0);
            // oscillation without progress
            if recent[0] <= *recent.last().unwrap() && recent[0] > 1e-8 {
                return Err(Error::FixedPointStalled(max_iters));
            }
        }
    }
    Err(Error::FixedPointStalled(max_iters))
}

/// Relative L2 residual of the strong equation. Absolute for zero fields.
pub fn strong_residual(v: &ScalarField, params: &ProblemParams) -> f64 {
    let nl = Nonlinearity { p: params.p };
    let av = frac_laplacian(v, params.s).expect("order validated");
    let mut res = av;
    res.axpy(1.0, v);
    res.axpy(-1.0, &v.map(|x| nl.g1(x)));
    let denom = l2_norm(v);
    if denom == 0.0 {
        l2_norm(&res)
    } else {
        l2_norm(&res) / denom
    }
}

/// Smooth compactly-supported-in-practice test bumps: Gaussians of three
/// widths at five offsets.
pub fn default_test_bumps(grid: &BoxGrid) -> Vec<ScalarField> {
    let l = grid.half_width();
    let dim = grid.dim();
    let widths = [l / 16.0, l / 8.0, l / 4.0];
    let mut offsets: Vec<[f64; 3]> = vec![[0.0; 3]];
    if dim == 1 {
        for o in [l / 8.0, -l / 8.0, l / 4.0, -l / 4.0] {
            offsets.push([o, 0.0, 0.0]);
        }
    } else {
        for (axis, o) in [(0, l / 4.0), (0, -l / 4.0), (1, l / 4.0), (1, -l / 4.0)] {
            let mut x0 = [0.0; 3];
            x0[axis] = o;
            offsets.push(x0);
        }
    }
    let mut bumps = Vec::new();
    for &w in &widths {
        for x0 in &offsets {
            bumps.push(ScalarField::from_fn(*grid, |x| {
                let r2: f64 = x.iter().zip(x0.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (-r2 / (2.0 * w * w)).exp()
            }));
        }
    }
    bumps
}

/// Weak-form defects `|B(v, phi) + <v, phi> - <g1(v), phi>|` for each test
/// bump, both raw and normalized by `||phi||_{H^s} ||v||_{H^s}`.
pub fn weak_residual(
    v: &ScalarField,
    params: &ProblemParams,
    bumps: &[ScalarField],
) -> Vec<(f64, f64)> {
    let s = params.s;
    let nl = Nonlinearity { p: params.p };
    let spec_v = forward_transform(v);
    let dxi = v.grid().freq_spacing().powi(v.grid().dim() as i32);
    let v_l2 = l2_norm(v);
    let v_hs = (v_l2 * v_l2 + seminorm2_of_spectrum(&spec_v, s)).sqrt();
    let nl_v = v.map(|x| nl.g1(x));
    bumps
        .iter()
        .map(|phi| {
            let spec_phi = forward_transform(phi);
            let pairing: f64 = spec_v
                .coeffs()
                .iter()
                .zip(spec_phi.coeffs())
                .enumerate()
                .map(|(flat, (a, b))| {
                    let xi2 = v.grid().freq2(flat);
                    if xi2 == 0.0 {
                        0.0
                    } else {
                        xi2.powf(s) * (a * b.conj()).re
                    }
                })
                .sum::<f64>()
                * dxi;
            let defect =
                (pairing + inner_product(v, phi) - inner_product(&nl_v, phi)).abs();
            let phi_l2 = l2_norm(phi);
            let phi_hs = (phi_l2 * phi_l2 + seminorm2_of_spectrum(&spec_phi, s)).sqrt();
            let scale = (phi_hs * v_hs).max(1e-300);
            (defect, defect / scale)
        })
        .collect()
}

/// Relative defect of the dilation-stationarity identity
/// `(N - 2s)/2 [v]^2 = N \int G(v)`.
pub fn pohozaev_residual(v: &ScalarField, params: &ProblemParams) -> f64 {
    let t = seminorm2_spectral(v, params.s);
    let nv = params.dim as f64 * constraint_v(v, params.p);
    let lhs = (params.dim as f64 - 2.0 * params.s) / 2.0 * t;
    (lhs - nv).abs() / t.max(nv.abs()).max(1e-30)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeRow {
    /// Amplitude multiplier applied to the feasible field.
    pub scale: f64,
    /// Constraint value before renormalization.
    pub v: f64,
    /// Dilation factor restoring `V = 1` through the scale change.
    pub sigma: f64,
    /// Seminorm of the renormalized dilate.
    pub t: f64,
}

/// Scan the renormalized dilates of a feasible field.
///
/// Each scan entry multiplies the amplitude, then the constraint is brought
/// back to 1 by the dilation `sigma = V^{-1/N}`; the recorded seminorm uses
/// the exact scaling law `T -> sigma^{N-2s} T`. Above the critical exponent
/// the recorded values collapse toward zero; below it they stay bounded
/// away from zero.
pub fn dilation_probe(
    params: &ProblemParams,
    feasible: &ScalarField,
    scales: &[f64],
) -> Result<Vec<ProbeRow>> {
    let v0 = constraint_v(feasible, params.p);
    if (v0 - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::InfeasibleInit(v0));
    }
    let n = params.dim as f64;
    let s = params.s;
    let t0 = seminorm2_spectral(feasible, s);
    let grid = feasible.grid();
    let peak = feasible.max_abs();
    let support_radius = (0..grid.len())
        .filter(|&i| feasible.values()[i].abs() > 1e-8 * peak)
        .map(|i| grid.radius2(i).sqrt())
        .fold(0.0, f64::max);

    let mut rows = Vec::new();
    for &c in scales {
        let scaled = feasible.scaled(c);
        let v = constraint_v(&scaled, params.p);
        if v <= 0.0 {
            continue;
        }
        let sigma = v.powf(-1.0 / n);
        // only a genuinely expanding dilation can push support outside the
        // box; constraint-tolerance jitter around sigma = 1 cannot
        if sigma > 1.0 + CONSTRAINT_TOL && sigma * support_radius >= grid.half_width() {
            return Err(Error::ProbeOutsideBox { sigma });
        }
        let t = sigma.powf(n - 2.0 * s) * c * c * t0;
        rows.push(ProbeRow { scale: c, v, sigma, t });
    }
    Ok(rows)
}

/// Default amplitude scan for the probe, geometric from 1 upward.
pub fn default_probe_scales() -> Vec<f64> {
    (0..9).map(|k| 2.0_f64.powi(k)).collect()
}

pub const STRONG_RESIDUAL_THRESHOLD: f64 = 1e-2;
pub const WEAK_RESIDUAL_THRESHOLD: f64 = 1e-6;
pub const POHOZAEV_THRESHOLD: f64 = 1e-2;
pub const POSITIVITY_THRESHOLD: f64 = 1e-8;
pub const MONOTONICITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SolutionCertificate {
    pub strong_residual: f64,
    /// Normalized weak defects, one per default test bump.
    pub weak_residuals: Vec<f64>,
    pub pohozaev_residual: f64,
    pub positivity_min: f64,
    pub monotonicity_defect: f64,
    pub peak: f64,
    pub pass: bool,
}

pub fn certify(v: &ScalarField, params: &ProblemParams) -> SolutionCertificate {
    let bumps = default_test_bumps(v.grid());
    let weak: Vec<f64> = weak_residual(v, params, &bumps)
        .into_iter()
        .map(|(_, normalized)| normalized)
        .collect();
    let strong = strong_residual(v, params);
    let pohozaev = pohozaev_residual(v, params);
    let positivity_min = v.min_value();
    let defect = monotonicity_defect(v);
    let peak = v.max_abs();
    let pass = strong < STRONG_RESIDUAL_THRESHOLD
        && weak.iter().all(|&w| w < WEAK_RESIDUAL_THRESHOLD)
        && pohozaev < POHOZAEV_THRESHOLD
        && positivity_min >= -POSITIVITY_THRESHOLD * peak
        && defect <= MONOTONICITY_THRESHOLD * peak;
    SolutionCertificate {
        strong_residual: strong,
        weak_residuals: weak,
        pohozaev_residual: pohozaev,
        positivity_min,
        monotonicity_defect: defect,
        peak,
        pass,
    }
}

/// The full pipeline: seed from the normalized barrier, minimize, extract
/// the multiplier, rescale, certify.
pub struct GroundState {
    /// Rescaled solution of the unit-multiplier equation.
    pub solution: ScalarField,
    /// Constrained minimizer on the original grid, `V = 1`.
    pub minimizer: ScalarField,
    pub report: MinimizerReport,
    pub certificate: SolutionCertificate,
}

pub fn solve_ground_state(
    params: &ProblemParams,
    grid: &BoxGrid,
    cfg: &SolverConfig,
) -> Result<GroundState> {
    let zeta = 2.0 * Nonlinearity::new(params.p)?.zeta_min();
    let (init, _scan) = normalized_barrier(params.p, zeta, grid)?;
    let outcome = minimize_constrained(&init, params, cfg)?;
    let mut report = outcome.report;
    let theta = lagrange_multiplier(&report)?;
    // Translations are zero modes of the energy, so the converged iterate can
    // carry a sub-grid off-centering that the descent cannot remove. The
    // rearrangement erases it (preserving V exactly); the shell average then
    // removes the residual in-shell tie-ordering spread, leaving an exactly
    // radial non-increasing field. At the minimizer both change T only at
    // second order in the removed asymmetry.
    let mut field = outcome.field;
    let radial = shell_average(&rearrange_decreasing(&field));
    if seminorm2_spectral(&radial, params.s) <= report.t * (1.0 + 1e-6) {
        field = radial;
    }
    // Rescale with the Euler-Lagrange pairing form of the multiplier: the
    // final iterate satisfies the discrete stationarity equation with that
    // value to solver tolerance, so the rescaled field solves the unit-
    // multiplier equation to the same accuracy. The two forms agree within
    // the lagrange_multiplier cross-check; the residual difference is pure
    // discretization error and shrinks with the grid spacing.
    let theta_el = 2.0 * report.t / report.gu_pairing;
    let (solution, lambda) = rescale_to_solution(&field, theta_el, params)?;
    report.theta = Some(theta);
    report.lambda = Some(lambda);
    let certificate = certify(&solution, params);
    Ok(GroundState { solution, minimizer: field, report, certificate })
}

/// Shift the peak of a field to the origin by a periodic lattice roll.
/// The problem is translation invariant; discrete comparisons are not.
pub fn recenter_peak(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let m = grid.points_per_axis();
    let dim = grid.dim();
    let (peak_flat, _) = f
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v.abs() > acc.1 {
                (i, v.abs())
            } else {
                acc
            }
        });
    let peak_idx = grid.axis_indices(peak_flat);
    let center = m / 2;
    let mut out = vec![0.0; grid.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let idx = grid.axis_indices(flat);
        let mut src = [0usize; 3];
        for a in 0..dim {
            src[a] = (idx[a] + peak_idx[a] + m - center) % m;
        }
        *o = f.values()[grid.flat_index(&src)];
    }
    ScalarField::new(grid, out).expect("roll preserves finiteness")
}
