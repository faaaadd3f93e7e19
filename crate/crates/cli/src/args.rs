use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use riccati_dyn::analytic::{oscillator_solution, velocity_branches, Branch};
use riccati_dyn::conserved::ResonantOscillator;
use riccati_dyn::{IntegratorConfig, QuadraticU, State, System1D, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    Cubic,
    Oscillator,
    GeneralU,
    #[value(name = "2d-cubic")]
    Cubic2d,
    #[value(name = "2d-oscillator")]
    Oscillator2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

/// System definition and initial conditions.
///
/// An initial state is given either explicitly (`--x0 --v0`, plus `--y0 --vy0`
/// in 2D) or by energy. Cubic axes started by energy begin at the origin with
/// `v = -2/E`. Oscillator energies are the `I_XW` level of the closed-form
/// solution, placed at phase `--phi`. General-U energies use the velocity
/// branch `--branch` at `--x0`.
#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value = "cubic")]
    pub system: SystemKind,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w0: f64,
    #[arg(long, default_value_t = 1)]
    pub n1: u32,
    #[arg(long, default_value_t = 1)]
    pub n2: u32,
    /// Coefficients of U(x) = c0 + c1 x + c2 x^2 for general-u.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c2: f64,
    #[arg(long = "E", allow_negative_numbers = true)]
    pub e: Option<f64>,
    #[arg(long = "E1", allow_negative_numbers = true)]
    pub e1: Option<f64>,
    #[arg(long = "E2", allow_negative_numbers = true)]
    pub e2: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vy0: Option<f64>,
    #[arg(long, value_enum, default_value = "minus")]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrationArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 500_000)]
    pub max_steps: usize,
}

impl IntegrationArgs {
    pub fn config(&self) -> Result<IntegratorConfig> {
        let mut config = IntegratorConfig::default().with_tolerances(self.rtol, self.atol);
        config.max_steps = self.max_steps;
        config.validate()?;
        Ok(config)
    }
}

impl SystemArgs {
    pub fn is_2d(&self) -> bool {
        matches!(self.system, SystemKind::Cubic2d | SystemKind::Oscillator2d)
    }

    pub fn resonant(&self) -> Result<ResonantOscillator> {
        Ok(ResonantOscillator::new(self.k1, self.k2, self.w0, self.n1, self.n2)?)
    }

    pub fn spec(&self) -> Result<SystemSpec> {
        Ok(match self.system {
            SystemKind::Cubic => SystemSpec::cubic(self.k),
            SystemKind::Oscillator => SystemSpec::oscillator(self.k, self.w),
            SystemKind::GeneralU => SystemSpec::general_u(QuadraticU::new(self.c0, self.c1, self.c2), self.k),
            SystemKind::Cubic2d => SystemSpec::product(
                System1D::CubicRiccati { k: self.k1 },
                System1D::CubicRiccati { k: self.k2 },
            ),
            SystemKind::Oscillator2d => self.resonant()?.spec(),
        })
    }

    pub fn initial_state(&self) -> Result<State> {
        let spec = self.spec()?;
        match spec {
            SystemSpec::Single(axis) => {
                let (x, v) = axis_start(&axis, self.e, self.phi, self.x0, self.v0, self.branch.into())?;
                Ok(State::new_1d(0.0, x, v))
            }
            SystemSpec::Product2D(a, b) => {
                let (x, vx) = axis_start(&a, self.e1, self.phi1, self.x0, self.v0, self.branch.into())
                    .context("first axis")?;
                let (y, vy) = axis_start(&b, self.e2, self.phi2, self.y0, self.vy0, self.branch.into())
                    .context("second axis")?;
                Ok(State::new_2d(0.0, x, vx, y, vy))
            }
        }
    }
}

/// Initial `(x, v)` of one axis from an explicit state or an energy level.
pub fn axis_start(
    axis: &System1D,
    energy: Option<f64>,
    phi: f64,
    x0: Option<f64>,
    v0: Option<f64>,
    branch: Branch,
) -> Result<(f64, f64)> {
    match (energy, x0, v0) {
        (None, Some(x), Some(v)) => Ok((x, v)),
        (None, _, _) => bail!("give either an energy or both an initial position and velocity"),
        (Some(_), _, Some(_)) => bail!("an energy and an initial velocity cannot both be given"),
        (Some(e), x, None) => match *axis {
            System1D::CubicRiccati { .. } if x.is_none() => {
                if e == 0.0 {
                    bail!("a cubic axis started at the origin needs a nonzero energy");
                }
                Ok((0.0, -2.0 / e))
            }
            System1D::NonlinearOscillator { k, w } => {
                if x.is_some() {
                    bail!("oscillator energies are placed by phase, not position");
                }
                Ok(oscillator_solution(k, w, e, phi, 0.0)?)
            }
            _ => {
                let x = x.unwrap_or(0.0);
                let (vp, vm) = velocity_branches(axis, x, e)?;
                Ok((x, if branch == Branch::Plus { vp } else { vm }))
            }
        },
    }
}
