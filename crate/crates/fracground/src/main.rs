use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracground::barrier::{barrier_seminorm_scan, default_radius_scan, normalized_barrier};
use fracground::config::{load_config, OutputFormat, RunConfig};
use fracground::error::Error;
use fracground::fracops::{constraint_v, l2_norm, seminorm2_spectral, Nonlinearity};
use fracground::io::{read_field, write_field};
use fracground::minimize::{certify, solve_ground_state, GroundState};

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGENCE: u8 = 2;
const EXIT_CERTIFICATE: u8 = 3;

#[derive(Parser)]
#[command(name = "fracground", version, about = "fractional ground state solver")]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. --set problem.s=0.25 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format (overrides config)
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Force bit-reproducible runs (the solver is deterministic either way)
    #[arg(long, global = true)]
    deterministic: Option<bool>,
    /// Seed for the seeded initializers (overrides config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize, rescale, certify; write solution and reports
    Solve,
    /// Certify an existing solution file against the configured equation
    Verify {
        /// FSF1 field file
        input: PathBuf,
    },
    /// Scan the barrier family and write the normalized competitor
    Barrier {
        /// Plateau height; default is twice the positivity threshold
        #[arg(long)]
        zeta: Option<f64>,
    },
    /// Print metadata and norms of a field file
    Inspect {
        /// FSF1 field file
        input: PathBuf,
    },
}

fn effective_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = load_config(cli.config.as_deref(), &cli.sets)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    if let Some(fmt) = &cli.format {
        cfg.format = if fmt == "csv" { OutputFormat::Csv } else { OutputFormat::Json };
    }
    if let Some(d) = cli.deterministic {
        cfg.deterministic = d;
    }
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Error> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn write_iterates_csv(dir: &Path, state: &GroundState) -> Result<(), Error> {
    let mut text = String::from("iter,t,v,step\n");
    for row in &state.report.iterates {
        text.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", row.iter, row.t, row.v, row.step));
    }
    fs::write(dir.join("iterates.csv"), text)?;
    Ok(())
}

fn run_solve(cfg: &RunConfig) -> Result<bool, Error> {
    let params = cfg.params()?;
    let grid = cfg.make_grid()?;
    let state = solve_ground_state(&params, &grid, &cfg.solver)?;
    let dir = Path::new(&cfg.output_dir);
    fs::create_dir_all(dir)?;
    write_field(&state.solution, &dir.join("solution.fsf"), Some(params.s))?;
    write_json(dir, "report.json", &state.report)?;
    write_json(dir, "certificate.json", &state.certificate)?;
    if cfg.format == OutputFormat::Csv {
        write_iterates_csv(dir, &state)?;
    }
    println!(
        "solve: T={:.12e} theta={:.12e} lambda={:.12e} iterations={} certificate={}",
        state.report.t,
        state.report.theta.unwrap_or(f64::NAN),
        state.report.lambda.unwrap_or(f64::NAN),
        state.report.iterations,
        if state.certificate.pass { "pass" } else { "FAIL" },
    );
    Ok(state.certificate.pass)
}

fn run_verify(cfg: &RunConfig, input: &Path) -> Result<bool, Error> {
    let file = read_field(input)?;
    let mut params = cfg.params()?;
    if let Some(s) = file.s {
        params = fracground::ProblemParams::new(file.field.grid().dim(), s, params.p)?;
    }
    let cert = certify(&file.field, &params);
    let dir = Path::new(&cfg.output_dir);
    fs::create_dir_all(dir)?;
    write_json(dir, "certificate.json", &cert)?;
    println!(
        "verify: strong={:.3e} weak_max={:.3e} pohozaev={:.3e} certificate={}",
        cert.strong_residual,
        cert.weak_residuals.iter().cloned().fold(0.0, f64::max),
        cert.pohozaev_residual,
        if cert.pass { "pass" } else { "FAIL" },
    );
    Ok(cert.pass)
}

fn run_barrier(cfg: &RunConfig, zeta: Option<f64>) -> Result<(), Error> {
    let params = cfg.params()?;
    let grid = cfg.make_grid()?;
    let zeta = zeta.unwrap_or_else(|| 2.0 * Nonlinearity { p: params.p }.zeta_min());
    let radii = default_radius_scan(&grid);
    let seminorms = barrier_seminorm_scan(zeta, &radii, &grid, params.s)?;
    let (field, scan) = normalized_barrier(params.p, zeta, &grid)?;
    let dir = Path::new(&cfg.output_dir);
    fs::create_dir_all(dir)?;
    write_field(&field, &dir.join("barrier.fsf"), Some(params.s))?;
    write_json(dir, "barrier_seminorms.json", &seminorms)?;
    write_json(dir, "barrier_constraints.json", &scan)?;
    if cfg.format == OutputFormat::Csv {
        let mut text = String::from("radius,v,sigma_star\n");
        for row in &scan.rows {
            let sigma = row.sigma_star.map_or(String::new(), |s| format!("{s:.17e}"));
            text.push_str(&format!("{:.17e},{:.17e},{sigma}\n", row.radius, row.v));
        }
        fs::write(dir.join("barrier_constraints.csv"), text)?;
    }
    println!(
        "barrier: zeta={zeta:.6} r_star={:.6} sigma_star={:.12} V={:.12e}",
        scan.r_star,
        scan.sigma_star,
        constraint_v(&field, params.p),
    );
    Ok(())
}

fn run_inspect(cfg: &RunConfig, input: &Path) -> Result<(), Error> {
    let file = read_field(input)?;
    let grid = file.field.grid();
    let summary = serde_json::json!({
        "dim": grid.dim(),
        "points_per_axis": grid.points_per_axis(),
        "half_width": grid.half_width(),
        "s": file.s,
        "l2": l2_norm(&file.field),
        "max_abs": file.field.max_abs(),
        "min_value": file.field.min_value(),
        "seminorm2": file.s.map(|s| seminorm2_spectral(&file.field, s)),
        "v": constraint_v(&file.field, cfg.problem.p),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Divergence(_)
        | Error::ConstraintEscape(_)
        | Error::FixedPointStalled(_)
        | Error::MultiplierMismatch { .. } => EXIT_DIVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(raw) = std::env::var("FRACGROUND_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => log::info!("thread cap {n} accepted; computation is single threaded"),
            _ => {
                eprintln!("error: FRACGROUND_THREADS must be a positive integer, got '{raw}'");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    let cli = Cli::parse();
    let cfg = match effective_config(&cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::Config(list) = &err {
                for item in list {
                    eprintln!("  - {item}");
                }
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Solve => run_solve(&cfg),
        Cmd::Verify { input } => run_verify(&cfg, input),
        Cmd::Barrier { zeta } => run_barrier(&cfg, zeta.to_owned()).map(|()| true),
        Cmd::Inspect { input } => run_inspect(&cfg, input).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CERTIFICATE),
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::Config(list) = &err {
                for item in list {
                    eprintln!("  - {item}");
                }
            }
            ExitCode::from(exit_for(&err))
        }
    }
}
