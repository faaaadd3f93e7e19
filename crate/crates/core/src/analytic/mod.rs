//! Closed-form solutions, quadrature timing and the linearisation oracle.
//!
//! The cubic system `x'' + 3kxx' + k²x³ = 0` started at the origin follows
//! `x = 2t/(kt² − E)`; the oscillator follows
//! `x = w√E sin θ / (1 − k√E cos θ)` with `θ = wt + φ`. Both are used as
//! ground truth for the integrator.

mod ince;
pub mod quadrature;

pub use ince::{ince_linearization_oracle, InceOptions, InceReport, ThirdOrderLinear};

use crate::conserved::{axis_energy, xw_pair};
use crate::error::{Error, Result};
use crate::model::{QuadraticU, State, System1D, DEFAULT_DENOM_EPSILON};

/// Relative tolerance of [`quadrature_time`].
pub const QUADRATURE_RTOL: f64 = 1e-10;

const QUADRATURE_MAX_PANELS: usize = 20_000;

/// `x = 2t/(kt² − E)`.
pub fn cubic_solution(k: f64, e: f64, t: f64) -> Result<f64> {
    let den = cubic_denominator(k, e, t)?;
    Ok(2.0 * t / den)
}

/// `dx/dt = −2(kt² + E)/(kt² − E)²`.
pub fn cubic_velocity(k: f64, e: f64, t: f64) -> Result<f64> {
    let den = cubic_denominator(k, e, t)?;
    Ok(-2.0 * (k * t * t + e) / (den * den))
}

fn cubic_denominator(k: f64, e: f64, t: f64) -> Result<f64> {
    let den = k * t * t - e;
    if den.abs() < DEFAULT_DENOM_EPSILON {
        return Err(Error::SingularTime { t });
    }
    Ok(den)
}

/// The cubic solution of energy `E`, shifted so that it passes through a
/// given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSolution {
    pub k: f64,
    pub e: f64,
    /// Physical time minus normalised time.
    pub shift: f64,
}

impl CubicSolution {
    pub fn normalized(k: f64, e: f64) -> Self {
        Self { k, e, shift: 0.0 }
    }

    /// Solution through `(x0, v0)` at `t0`.
    ///
    /// The normalised time of `x0` is one of `(1 ± √(1 + kEx0²))/(kx0)`; the
    /// root whose velocity matches `v0` is taken.
    pub fn through(k: f64, x0: f64, v0: f64, t0: f64) -> Result<Self> {
        let e = axis_energy(&System1D::CubicRiccati { k }, x0, v0, DEFAULT_DENOM_EPSILON)?;
        let tau = normalized_time(k, e, x0, v0)?;
        Ok(Self { k, e, shift: t0 - tau })
    }

    pub fn position(&self, t: f64) -> Result<f64> {
        cubic_solution(self.k, self.e, t - self.shift)
    }

    pub fn velocity(&self, t: f64) -> Result<f64> {
        cubic_velocity(self.k, self.e, t - self.shift)
    }

    pub fn state(&self, t: f64) -> Result<State> {
        Ok(State::new_1d(t, self.position(t)?, self.velocity(t)?))
    }

    /// Physical times at which `kt² = E`.
    pub fn singular_times(&self) -> Vec<f64> {
        let r = self.e / self.k;
        if !(r > 0.0 && r.is_finite()) {
            return Vec::new();
        }
        let s = r.sqrt();
        vec![self.shift - s, self.shift + s]
    }
}

fn normalized_time(k: f64, e: f64, x: f64, v: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let candidates: Vec<f64> = if k == 0.0 {
        vec![-e * x / 2.0]
    } else {
        let disc = 1.0 + k * e * x * x;
        if disc < 0.0 {
            return Err(Error::OutsideAllowedRegion { x, discriminant: disc });
        }
        let s = disc.sqrt();
        // Rationalised forms avoid cancellation in 1 − s.
        vec![(1.0 + s) / (k * x), -e * x / (1.0 + s)]
    };
    candidates
        .into_iter()
        .filter(|t| t.is_finite())
        .filter_map(|t| cubic_velocity(k, e, t).ok().map(|vt| (t, (vt - v).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .ok_or(Error::SingularTime { t: f64::NAN })
}

/// `(x, dx/dt)` of the oscillator at phase `wt + φ`.
pub fn oscillator_solution(k: f64, w: f64, e: f64, phi: f64, t: f64) -> Result<(f64, f64)> {
    if !(e >= 0.0) {
        return Err(Error::InvalidConfig(format!("oscillator energy must be non-negative, got {e}")));
    }
    let s = e.sqrt();
    let (sin, cos) = (w * t + phi).sin_cos();
    let den = 1.0 - k * s * cos;
    if den.abs() < DEFAULT_DENOM_EPSILON {
        return Err(Error::SingularTime { t });
    }
    let x = w * s * sin / den;
    let v = w * w * s * (cos - k * s) / (den * den);
    Ok((x, v))
}

/// The oscillator solution through a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSolution {
    pub k: f64,
    pub w: f64,
    pub e: f64,
    pub phi: f64,
}

impl OscillatorSolution {
    pub fn through(k: f64, w: f64, x0: f64, v0: f64, t0: f64) -> Result<Self> {
        let (xx, ww) = xw_pair(k, w, x0, v0, DEFAULT_DENOM_EPSILON)?;
        let e = ww * ww + w * w * xx * xx;
        let theta = (w * xx).atan2(ww);
        Ok(Self { k, w, e, phi: theta - w * t0 })
    }

    pub fn state(&self, t: f64) -> Result<State> {
        let (x, v) = oscillator_solution(self.k, self.w, self.e, self.phi, t)?;
        Ok(State::new_1d(t, x, v))
    }

    /// `2π/w`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.w
    }
}

/// `I_XW` of an oscillator with Lagrangian energy `E_L`: `(w/k)² E_L + 1/k²`.
pub fn oscillator_ixw_from_energy(k: f64, w: f64, e_l: f64) -> f64 {
    (w / k).powi(2) * e_l + 1.0 / (k * k)
}

/// Inverse of [`oscillator_ixw_from_energy`].
pub fn oscillator_energy_from_ixw(k: f64, w: f64, ixw: f64) -> f64 {
    (ixw - 1.0 / (k * k)) * (k / w).powi(2)
}

/// Sign in `v = [−(1 + kEU) ± √(1 + kEU)]/E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

struct Reduced {
    u: QuadraticU,
    k: f64,
    e: f64,
}

impl Reduced {
    fn new(spec: &System1D, e: f64) -> Result<Self> {
        let (u, k, scale) = spec.reciprocal_form()?;
        if !u.is_time_independent() {
            return Err(Error::Unsupported("energy branches of a time-dependent U"));
        }
        if e == 0.0 {
            return Err(Error::ZeroEnergy);
        }
        Ok(Self { u, k, e: e / scale })
    }

    fn discriminant(&self, x: f64) -> f64 {
        1.0 + self.k * self.e * self.u.value(x)
    }

    // v₊ = s(1 − s)/E is rewritten as −s kU/(1 + s) to avoid cancellation.
    fn velocity(&self, x: f64, branch: Branch) -> f64 {
        let u = self.u.value(x);
        let s = (1.0 + self.k * self.e * u).max(0.0).sqrt();
        match branch {
            Branch::Plus => -s * self.k * u / (1.0 + s),
            Branch::Minus => -s * (1.0 + s) / self.e,
        }
    }
}

/// Both branch velocities at `x` on the energy level `E`.
pub fn velocity_branches(spec: &System1D, x: f64, e: f64) -> Result<(f64, f64)> {
    let r = Reduced::new(spec, e)?;
    let g = r.discriminant(x);
    if g < 0.0 {
        return Err(Error::OutsideAllowedRegion { x, discriminant: g });
    }
    Ok((r.velocity(x, Branch::Plus), r.velocity(x, Branch::Minus)))
}

/// Travel time from `x0` to `x1` along one velocity branch, `∫ dx / v(x)`.
///
/// The result is negative when the branch velocity points away from `x1`.
/// Turning points are allowed at the ends of the interval only.
pub fn quadrature_time(spec: &System1D, e: f64, x0: f64, x1: f64, branch: Branch) -> Result<f64> {
    if x0 == x1 {
        return Ok(0.0);
    }
    let r = Reduced::new(spec, e)?;
    let (a, b) = (x0.min(x1), x0.max(x1));
    check_interval(&r, a, b, branch)?;

    // x = a + (b − a)(3s² − 2s³) flattens square-root singularities at both ends.
    let width = b - a;
    let integrand = |s: f64| {
        let x = a + width * s * s * (3.0 - 2.0 * s);
        let jac = 6.0 * width * s * (1.0 - s);
        jac / r.velocity(x, branch)
    };
    let span = quadrature::integrate(integrand, 0.0, 1.0, QUADRATURE_RTOL, 1e-15, QUADRATURE_MAX_PANELS)?;
    Ok(if x1 > x0 { span } else { -span })
}

fn check_interval(r: &Reduced, a: f64, b: f64, branch: Branch) -> Result<()> {
    let tol = 1e-12;
    for x in [a, b] {
        let g = r.discriminant(x);
        if g < -tol {
            return Err(Error::OutsideAllowedRegion { x, discriminant: g });
        }
    }
    // 1 + kEU is quadratic in x; its interior extremum is the only other
    // place it can dip to zero.
    let curv = r.k * r.e * r.u.c2;
    if curv != 0.0 {
        let vertex = -r.u.c1 / (2.0 * r.u.c2);
        if vertex > a && vertex < b {
            let g = r.discriminant(vertex);
            if g < -tol {
                return Err(Error::OutsideAllowedRegion { x: vertex, discriminant: g });
            }
            if g <= tol {
                return Err(Error::SingularIntegrand { x: vertex });
            }
        }
    }
    if branch == Branch::Plus {
        if r.k == 0.0 {
            return Err(Error::SingularIntegrand { x: a });
        }
        if let Some(x) = quadratic_roots(&r.u).into_iter().find(|x| *x >= a && *x <= b) {
            return Err(Error::SingularIntegrand { x });
        }
    }
    Ok(())
}

fn quadratic_roots(u: &QuadraticU) -> Vec<f64> {
    let (c0, c1, c2) = (u.c0, u.c1, u.c2);
    if c2 == 0.0 {
        return if c1 == 0.0 { Vec::new() } else { vec![-c0 / c1] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / c2, c0 / q]
}
