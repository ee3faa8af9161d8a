//! Acceptance gate: one test per criterion, each printing a single
//! `acceptance <n> <name>: pass|FAIL` line. The end-to-end ground state is
//! computed once and shared by the criteria that consume it.

use std::sync::OnceLock;
use std::time::Instant;

use fracground::barrier::{make_barrier, normalized_barrier, BarrierSpec};
use fracground::config::RunConfig;
use fracground::field::{random_smooth_field, resample_dilate};
use fracground::fracops::{
    constraint_v, l2_norm, seminorm2_direct, seminorm2_spectral, zeta_min,
};
use fracground::minimize::{
    default_probe_scales, dilation_probe, minimize_constrained, petviashvili_solve,
    recenter_peak, solve_ground_state, GroundState, SolverConfig, MONOTONICITY_THRESHOLD,
    POHOZAEV_THRESHOLD, POSITIVITY_THRESHOLD, STRONG_RESIDUAL_THRESHOLD,
    WEAK_RESIDUAL_THRESHOLD,
};
use fracground::rearrange::{polya_szego_gap, radial_bound_check};
use fracground::{make_grid, ProblemParams, ScalarField};

fn report(tag: &str, pass: bool, detail: &str) {
    println!("acceptance {tag}: {}", if pass { "pass" } else { "FAIL" });
    assert!(pass, "{tag}: {detail}");
}

fn gaussian(grid: fracground::BoxGrid, amplitude: f64, width: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        amplitude * (-r2 / (2.0 * width * width)).exp()
    })
}

/// Shared end-to-end run on the library defaults.
fn ground_state() -> &'static (GroundState, f64) {
    static STATE: OnceLock<(GroundState, f64)> = OnceLock::new();
    STATE.get_or_init(|| {
        let cfg = RunConfig::default();
        let start = Instant::now();
        let state = solve_ground_state(
            &cfg.params().unwrap(),
            &cfg.make_grid().unwrap(),
            &cfg.solver,
        )
        .expect("default pipeline must converge");
        (state, start.elapsed().as_secs_f64())
    })
}

#[test]
fn acceptance_1_seminorm_equivalence() {
    let start = Instant::now();
    let s = 0.5;
    // e^{-x^2/2} has spectral seminorm^2 exactly 1 for s = 1/2 in 1d.
    // The lattice sum of |xi| g(xi) undershoots the integral by the kink
    // constant (d xi)^2 g(0) / 6, so the pinned grid carries a fixed defect
    // and the 1e-4 match needs the wider box.
    let coarse = seminorm2_spectral(&gaussian(make_grid(1, 256, 16.0).unwrap(), 1.0, 1.0), s);
    let kink = (std::f64::consts::PI / 16.0).powi(2) / 6.0;
    let fine = seminorm2_spectral(&gaussian(make_grid(1, 4096, 256.0).unwrap(), 1.0, 1.0), s);

    // Gagliardo-to-spectral ratio 2 A(1, 1/2) = 2 pi, on a grid fine and
    // wide enough that the O(h) diagonal band and the O(1/L) periodic tail
    // of the direct double sum sit below the 5% budget.
    let g = gaussian(make_grid(1, 2048, 64.0).unwrap(), 1.0, 1.0);
    let ratio = seminorm2_direct(&g, s).unwrap() / seminorm2_spectral(&g, s);
    let two_pi = 2.0 * std::f64::consts::PI;

    let elapsed = start.elapsed().as_secs_f64();
    let pass = (coarse - 1.0).abs() < 1e-2
        && ((1.0 - coarse) / kink - 1.0).abs() < 0.02
        && (fine - 1.0).abs() < 1e-4
        && (ratio / two_pi - 1.0).abs() < 0.05
        && elapsed < 10.0;
    report(
        "1 seminorm-equivalence",
        pass,
        &format!("coarse {coarse}, fine {fine}, ratio {ratio} vs {two_pi}, {elapsed:.1}s"),
    );
}

#[test]
fn acceptance_2_polya_szego() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = f64::INFINITY;
    for dim in [1usize, 2] {
        let m = if dim == 1 { 256 } else { 64 };
        let grid = make_grid(dim, m, 16.0).unwrap();
        for s in [0.25, 0.5, 0.75] {
            for seed in 0..34 {
                let f = random_smooth_field(grid, 1000 * dim as u64 + seed, 1.0);
                let t = seminorm2_spectral(&f, s);
                let gap = polya_szego_gap(&f, s);
                worst = worst.min(gap / t.max(1e-300));
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = checked >= 200 && worst >= -1e-3 && elapsed < 120.0;
    report(
        "2 polya-szego",
        pass,
        &format!("{checked} fields, worst normalized gap {worst}, {elapsed:.1}s"),
    );
}

#[test]
fn acceptance_3_scaling_laws() {
    let sigma = 1.1f64;
    let p = 2.0;
    let mut detail = String::new();
    let mut pass = true;
    for dim in [1usize, 2] {
        let m = if dim == 1 { 512 } else { 256 };
        let grid = make_grid(dim, m, 16.0).unwrap();
        let f = gaussian(grid, 3.0, 2.0);
        let fs = resample_dilate(&f, sigma).unwrap();
        let v_ratio = constraint_v(&fs, p) / constraint_v(&f, p);
        for s in [0.25, 0.5, 0.75] {
            let t_ratio = seminorm2_spectral(&fs, s) / seminorm2_spectral(&f, s);
            let t_law = sigma.powf(dim as f64 - 2.0 * s);
            if (t_ratio / t_law - 1.0).abs() >= 0.02 {
                pass = false;
                detail.push_str(&format!("T law N={dim} s={s}: {t_ratio} vs {t_law}; "));
            }
        }
        let v_law = sigma.powi(dim as i32);
        if (v_ratio / v_law - 1.0).abs() >= 0.02 {
            pass = false;
            detail.push_str(&format!("V law N={dim}: {v_ratio} vs {v_law}; "));
        }
    }
    report("3 scaling-laws", pass, &detail);
}

#[test]
fn acceptance_4_barrier_suite() {
    let s = 0.5;
    let spec = BarrierSpec::new(1.0, 1.0);

    // finiteness stable under M-doubling
    let t64 = seminorm2_spectral(&make_barrier(&spec, &make_grid(2, 64, 16.0).unwrap()).unwrap(), s);
    let t128 =
        seminorm2_spectral(&make_barrier(&spec, &make_grid(2, 128, 16.0).unwrap()).unwrap(), s);
    let doubling = (t128 / t64 - 1.0).abs();

    // zeta homogeneity of the seminorm, exact for the linear profile
    let grid = make_grid(2, 128, 16.0).unwrap();
    let w1 = make_barrier(&BarrierSpec::new(1.0, 1.5), &grid).unwrap();
    let w2 = make_barrier(&BarrierSpec::new(2.0, 1.5), &grid).unwrap();
    let homogeneity = (seminorm2_spectral(&w2, s) / (4.0 * seminorm2_spectral(&w1, s)) - 1.0).abs();

    // constraint scan normalizes V for both exponents
    let scan_grid = make_grid(2, 256, 16.0).unwrap();
    let v_defect = [2.0f64, 3.0]
        .iter()
        .map(|&p| {
            let (w, _) = normalized_barrier(p, 2.0 * zeta_min(p), &scan_grid).unwrap();
            (constraint_v(&w, p) - 1.0).abs()
        })
        .fold(0.0, f64::max);

    // analytic mass of the unit barrier in 2d
    let w = make_barrier(&spec, &scan_grid).unwrap();
    let mass = l2_norm(&w).powi(2);
    let mass_exact = 11.0 * std::f64::consts::PI / 6.0;

    let pass = doubling < 0.05
        && homogeneity < 1e-10
        && v_defect < 1e-6
        && (mass / mass_exact - 1.0).abs() < 0.02;
    report(
        "4 barrier-suite",
        pass,
        &format!(
            "doubling {doubling}, homogeneity {homogeneity}, V defect {v_defect}, mass {mass} vs {mass_exact}"
        ),
    );
}

#[test]
fn acceptance_5_end_to_end_ground_state() {
    let (state, elapsed) = ground_state();
    let c = &state.certificate;
    let weak_max = c.weak_residuals.iter().cloned().fold(0.0, f64::max);
    let pass = state.report.converged
        && c.strong_residual < STRONG_RESIDUAL_THRESHOLD
        && weak_max < WEAK_RESIDUAL_THRESHOLD
        && c.pohozaev_residual < POHOZAEV_THRESHOLD
        && c.positivity_min >= -POSITIVITY_THRESHOLD * c.peak
        && c.monotonicity_defect <= MONOTONICITY_THRESHOLD * c.peak
        && c.pass
        && *elapsed < 300.0;
    report(
        "5 end-to-end-ground-state",
        pass,
        &format!(
            "strong {}, weak {}, pohozaev {}, positivity {}, monotonicity {}, {elapsed:.0}s",
            c.strong_residual, weak_max, c.pohozaev_residual, c.positivity_min, c.monotonicity_defect
        ),
    );
}

#[test]
fn acceptance_6_cross_oracle() {
    let (state, _) = ground_state();
    let params = ProblemParams::new(2, 0.5, 2.0).unwrap();
    // independent route on the solution's own lattice
    let seed = gaussian(*state.solution.grid(), 3.0, 1.0);
    let osc = petviashvili_solve(&seed, &params, 5000).unwrap();
    let a = recenter_peak(&state.solution);
    let b = recenter_peak(&osc);
    let mut diff = a.clone();
    diff.axpy(-1.0, &b);
    let rel = l2_norm(&diff) / l2_norm(&a);
    let theta = state.report.theta.unwrap();
    let theta_alt = 2.0 * state.report.t / state.report.gu_pairing;
    let mismatch = (theta / theta_alt - 1.0).abs();
    let pass = rel < 0.01 && mismatch < 0.05;
    report(
        "6 cross-oracle",
        pass,
        &format!("L2 disagreement {rel}, multiplier mismatch {mismatch}"),
    );
}

#[test]
fn acceptance_7_criticality_probe() {
    let (state, _) = ground_state();
    let scales = default_probe_scales();

    // subcritical: bounded below along the scan
    let params2 = ProblemParams::new(2, 0.5, 2.0).unwrap();
    let rows2 = dilation_probe(&params2, &state.minimizer, &scales).unwrap();
    let t0 = rows2[0].t;
    let t_min = rows2.iter().map(|r| r.t).fold(f64::INFINITY, f64::min);

    // supercritical: collapse by at least 10x. The steep p = 4 density needs
    // a fine grid before the barrier scan can reach V = 1 at all (a single
    // occupied cell already carries h^2 G(zeta) > 1 at h = 1/2).
    let grid = make_grid(2, 256, 16.0).unwrap();
    let (feasible4, _) = normalized_barrier(4.0, 2.0 * zeta_min(4.0), &grid).unwrap();
    let params4 = ProblemParams::new(2, 0.5, 4.0).unwrap();
    let rows4 = dilation_probe(&params4, &feasible4, &scales).unwrap();
    let collapse = rows4.first().unwrap().t / rows4.last().unwrap().t;

    let pass = t_min > 0.5 * t0 && collapse >= 10.0;
    report(
        "7 criticality-probe",
        pass,
        &format!("subcritical floor {t_min} vs {t0}, supercritical collapse {collapse}x"),
    );
}

#[test]
fn acceptance_8_radial_lemma() {
    let (state, _) = ground_state();
    let mut corpus: Vec<ScalarField> = Vec::new();
    for dim in [1usize, 2] {
        let grid = make_grid(dim, 128, 16.0).unwrap();
        for width in [1.0, 2.0, 4.0] {
            corpus.push(gaussian(grid, 1.0, width));
            corpus.push(gaussian(grid, 5.0, width));
        }
        for radius in [1.0, 2.0] {
            corpus.push(make_barrier(&BarrierSpec::new(1.0, radius), &grid).unwrap());
        }
        // slowly decaying radial profiles stress the bound away from r = 0
        corpus.push(ScalarField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|a| a * a).sum();
            (1.0 + r2).powi(-2)
        }));
        corpus.push(ScalarField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|a| a * a).sum();
            3.0 * (-r2.sqrt()).exp()
        }));
    }
    corpus.push(state.solution.clone());

    let mut worst = f64::INFINITY;
    for f in &corpus {
        let rep = radial_bound_check(f).unwrap();
        worst = worst.min(rep.min_margin / rep.l2.max(1e-300));
    }
    let pass = worst >= -1e-6;
    report(
        "8 radial-lemma",
        pass,
        &format!("{} fields, worst normalized margin {worst}", corpus.len()),
    );
}

#[test]
fn acceptance_9_determinism() {
    let grid = make_grid(2, 128, 16.0).unwrap();
    let params = ProblemParams::new(2, 0.5, 2.0).unwrap();
    let cfg = SolverConfig { seed: 7, ..SolverConfig::default() };
    let run = || {
        let (init, scan) = normalized_barrier(params.p, 2.0 * zeta_min(params.p), &grid).unwrap();
        let outcome = minimize_constrained(&init, &params, &cfg).unwrap();
        (
            serde_json::to_vec(&outcome.report).unwrap(),
            serde_json::to_vec(&scan).unwrap(),
        )
    };
    let (r1, s1) = run();
    let (r2, s2) = run();
    let pass = r1 == r2 && s1 == s2;
    report("9 determinism", pass, "reports differ between identical runs");
}
