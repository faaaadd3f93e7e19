//! `riccati-dyn`: simulate, verify and plot second-order Riccati systems.

mod args;
mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use riccati_dyn::{integrate, State, Status, System1D, Trajectory};

use args::{axis_start, IntegrationArgs, SystemArgs, SystemKind};
use verify::{Suite, VerifyContext};

#[derive(Debug, Parser)]
#[command(name = "riccati-dyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Integrate a family of 1D trajectories for a phase portrait.
    Portrait(PortraitArgs),
    /// Integrate a 2D orbit and write its (x, y) curve.
    Lissajous(LissajousArgs),
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    integration: IntegrationArgs,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    /// Write this many uniform dense samples instead of the step nodes.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG of x against t next to `--out`.
    #[arg(long, requires = "out")]
    svg: bool,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    integration: IntegrationArgs,
    /// Integration window. The dissipative suite integrates over `[-T, T]`.
    #[arg(long = "T")]
    window: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PortraitArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    integration: IntegrationArgs,
    /// Defaults to one period `2π/w` for the oscillator and 10 otherwise.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    x_max: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    v_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    v_max: f64,
    /// Grid points per axis; the grid has `density²` seeds.
    #[arg(long, default_value_t = 5)]
    density: usize,
    /// Seed one trajectory per energy level instead of a grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    energies: Option<Vec<f64>>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
struct LissajousArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    integration: IntegrationArgs,
    /// Half-width of the symmetric window for 2d-cubic.
    #[arg(long = "T", default_value_t = 50.0)]
    window: f64,
    /// Number of common periods for 2d-oscillator.
    #[arg(long, default_value_t = 1)]
    periods: u32,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => run_verify(a),
        Command::Portrait(a) => portrait(a),
        Command::Lissajous(a) => lissajous(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn status_code(status: &Status) -> u8 {
    if status.is_completed() {
        0
    } else {
        2
    }
}

fn rows(traj: &Trajectory, samples: Option<usize>) -> Result<Vec<(f64, Vec<f64>)>> {
    match samples {
        Some(n) => Ok(traj.sample_uniform(n)?),
        None => Ok(traj.nodes.iter().map(|n| (n.t, n.y.clone())).collect()),
    }
}

fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let spec = a.system.spec()?;
    let s0 = a.system.initial_state()?;
    let config = a.integration.config()?;
    let traj = integrate(&spec, &s0, a.t_end, &config)?;
    let rows = rows(&traj, a.samples)?;
    output::emit(a.out.as_deref(), &output::csv_string(&rows, 2 * spec.dof()))?;
    if a.svg {
        let out = a.out.as_deref().expect("clap enforces --out");
        let pts: Vec<_> = rows.iter().map(|(t, y)| (*t, y[0])).collect();
        output::emit(Some(&svg_path(out)), &output::svg_polyline(&pts, "t", "x"))?;
    }
    eprintln!("status: {}", traj.status);
    Ok(status_code(&traj.status))
}

fn seed() -> Result<u64> {
    match std::env::var("RICCATI_DYN_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("RICCATI_DYN_SEED must be an unsigned integer, got {s:?}")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(e).context("reading RICCATI_DYN_SEED"),
    }
}

fn run_verify(a: VerifyArgs) -> Result<u8> {
    let Some(suite) = <Suite as clap::ValueEnum>::from_str(&a.suite, false).ok() else {
        let names: Vec<_> = <Suite as clap::ValueEnum>::value_variants()
            .iter()
            .filter_map(|s| clap::ValueEnum::to_possible_value(s).map(|p| p.get_name().to_string()))
            .collect();
        bail!("unknown suite {:?}; expected one of {}", a.suite, names.join(", "));
    };
    let default_window = match suite {
        Suite::SuperintDissipative => 50.0,
        _ => 10.0,
    };
    let mut config = a.integration.config()?;
    if suite == Suite::SuperintDissipative && a.integration.rtol == 1e-10 && a.integration.atol == 1e-12 {
        config = config.with_tolerances(1e-12, 1e-14);
    }
    let ctx = VerifyContext {
        system: &a.system,
        config,
        window: a.window.unwrap_or(default_window),
        seed: seed()?,
    };
    let report = verify::run(suite, &ctx)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    output::emit(a.out.as_deref(), &json)?;
    Ok(if report.pass() { 0 } else { 2 })
}

struct Seed {
    x0: f64,
    v0: f64,
}

fn portrait(a: PortraitArgs) -> Result<u8> {
    if a.system.is_2d() {
        bail!("portraits are drawn for 1D systems; use lissajous for 2D systems");
    }
    if !(a.x_min <= a.x_max && a.v_min <= a.v_max) {
        bail!("grid bounds must satisfy min <= max");
    }
    let spec = a.system.spec()?;
    let axis = *spec.as_single()?;
    let config = a.integration.config()?;
    let t_end = a.t_end.unwrap_or(match axis {
        System1D::NonlinearOscillator { w, .. } => std::f64::consts::TAU / w,
        _ => 10.0,
    });

    let seeds: Vec<Seed> = match &a.energies {
        Some(levels) => levels
            .iter()
            .map(|&e| {
                axis_start(&axis, Some(e), a.system.phi, a.system.x0, None, a.system.branch.into())
                    .map(|(x0, v0)| Seed { x0, v0 })
                    .with_context(|| format!("energy {e}"))
            })
            .collect::<Result<_>>()?,
        None => {
            let lerp = |lo: f64, hi: f64, i: usize| {
                if a.density == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (a.density - 1) as f64
                }
            };
            (0..a.density * a.density)
                .map(|i| Seed {
                    x0: lerp(a.x_min, a.x_max, i / a.density),
                    v0: lerp(a.v_min, a.v_max, i % a.density),
                })
                .collect()
        }
    };

    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let runs: Vec<(usize, Status, f64)> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> Result<(usize, Status, f64)> {
            let traj = integrate(&spec, &State::new_1d(0.0, s.x0, s.v0), t_end, &config)?;
            let rows = rows(&traj, None)?;
            output::emit(Some(&a.out_dir.join(seed_file(i))), &output::csv_string(&rows, 2))?;
            Ok((i, traj.status, traj.t_range().1))
        })
        .collect::<Result<_>>()?;

    let mut index = String::from("id,file,x0,v0,status,t_final\n");
    for (i, status, t_final) in runs {
        let s = &seeds[i];
        index.push_str(&format!(
            "{i},{},{:.16e},{:.16e},{},{:.16e}\n",
            seed_file(i),
            s.x0,
            s.v0,
            status_tag(&status),
            t_final
        ));
    }
    output::emit(Some(&a.out_dir.join("index.csv")), &index)?;
    Ok(0)
}

fn seed_file(i: usize) -> String {
    format!("traj_{i:04}.csv")
}

fn status_tag(status: &Status) -> &'static str {
    match status {
        Status::Completed => "completed",
        Status::Singular { .. } => "singular",
        Status::BlowUp { .. } => "blow-up",
        Status::MaxSteps => "max-steps",
    }
}

fn lissajous(a: LissajousArgs) -> Result<u8> {
    let spec = a.system.spec()?;
    let s0 = a.system.initial_state()?;
    let config = a.integration.config()?;
    let traj = match a.system.system {
        SystemKind::Cubic2d => {
            if !(a.window > 0.0) {
                bail!("--T must be positive");
            }
            let fwd = integrate(&spec, &s0, a.window, &config)?;
            let bwd = integrate(&spec, &s0, -a.window, &config)?;
            Trajectory::join(bwd, fwd)?
        }
        SystemKind::Oscillator2d => {
            let osc = a.system.resonant()?;
            let t_end = a.periods as f64 * std::f64::consts::TAU / osc.w0;
            integrate(&spec, &s0, t_end, &config)?
        }
        _ => bail!("lissajous needs --system 2d-cubic or 2d-oscillator"),
    };
    let rows = rows(&traj, a.samples)?;
    output::emit(a.out.as_deref(), &output::csv_string(&rows, 4))?;
    if a.svg {
        let out = a.out.as_deref().expect("clap enforces --out");
        let pts: Vec<_> = rows.iter().map(|(_, y)| (y[0], y[2])).collect();
        output::emit(Some(&svg_path(out)), &output::svg_polyline(&pts, "x", "y"))?;
    }
    eprintln!("status: {}", traj.status);
    Ok(status_code(&traj.status))
}
