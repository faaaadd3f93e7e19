//! Hamiltonian pictures and the canonical map to the linear oscillator.
//!
//! For `L = 1/(v + kU)` the momentum is `p = −1/D²`, and on the `D > 0` branch
//! `√(−p) = 1/D`, giving `H = −2√(−p) − kU p`.
//!
//! The oscillator Hamiltonian is generated by the rescaled Lagrangian
//! `L̃ = (w/k)² L − 1/k²`, so `p = ∂L̃/∂v = −w²/(k D²)` with
//! `D = kv + k²x² + w²` and `√(−kp) = w/D`. Its value is `I_XW`, and
//!
//! ```text
//! Q = (√2/w) x √(−kp) = √2 X,    P = (√2/k)(1 − w √(−kp)) = √2 W
//! ```
//!
//! maps it to `(P² + w²Q²)/2`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::fd;
use crate::integrate::OdeSystem;
use crate::model::{QuadraticU, State, System1D, SystemSpec};

/// Hamiltonian coordinates, with the oscillator's `(Q, P)` when available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPoint {
    pub x: f64,
    pub p: f64,
    pub qp: Option<(f64, f64)>,
}

impl CanonicalPoint {
    /// Legendre image of a state on the `D > 0` branch.
    pub fn from_state(spec: &SystemSpec, state: &State, eps: f64) -> Result<Self> {
        let axis = spec.as_single()?;
        state.check_arity(spec)?;
        let (x, v) = state.axis(0);
        if axis.checked_denominator(x, v, eps)? < 0.0 {
            return Err(Error::NegativeBranch);
        }
        let p = momentum(spec, state, eps)?;
        let qp = match *axis {
            System1D::NonlinearOscillator { k, w } => Some(canonical_qp(k, w, x, p)?),
            _ => None,
        };
        Ok(Self { x, p, qp })
    }

    /// `H(x, p)` of the system the point belongs to.
    pub fn hamiltonian(&self, axis: &System1D) -> Result<f64> {
        match *axis {
            System1D::GeneralU { u, k } => hamiltonian_u(&u, k, self.x, self.p),
            System1D::CubicRiccati { k } => hamiltonian_u(&QuadraticU::new(0.0, 0.0, 1.0), k, self.x, self.p),
            System1D::NonlinearOscillator { k, w } => hamiltonian_osc(k, w, self.x, self.p),
        }
    }
}

/// `p = ∂L/∂v`, with the rescaled convention for the oscillator.
pub fn momentum(spec: &SystemSpec, state: &State, eps: f64) -> Result<f64> {
    let axis = spec.as_single()?;
    state.check_arity(spec)?;
    let (x, v) = state.axis(0);
    let d = axis.checked_denominator(x, v, eps)?;
    Ok(match *axis {
        System1D::NonlinearOscillator { k, w } => -w * w / (k * d * d),
        _ => -1.0 / (d * d),
    })
}

/// `H = −2√(−p) − kU(x) p`.
pub fn hamiltonian_u(u: &QuadraticU, k: f64, x: f64, p: f64) -> Result<f64> {
    if !(p < 0.0) {
        return Err(Error::PositiveMomentum { p });
    }
    Ok(-2.0 * (-p).sqrt() - k * u.value(x) * p)
}

fn root(k: f64, p: f64) -> Result<f64> {
    let arg = -k * p;
    if !(arg > 0.0) {
        return Err(Error::RootDomain { value: arg });
    }
    Ok(arg.sqrt())
}

/// `H = −[(2w/k²)√(−kp) + (kx² + w²/k) p] + 1/k²`.
pub fn hamiltonian_osc(k: f64, w: f64, x: f64, p: f64) -> Result<f64> {
    let r = root(k, p)?;
    Ok(-(2.0 * w / (k * k) * r + (k * x * x + w * w / k) * p) + 1.0 / (k * k))
}

/// `(Q, P) = ((√2/w) x √(−kp), (√2/k)(1 − w√(−kp)))`.
pub fn canonical_qp(k: f64, w: f64, x: f64, p: f64) -> Result<(f64, f64)> {
    let r = root(k, p)?;
    Ok((SQRT_2 / w * x * r, SQRT_2 / k * (1.0 - w * r)))
}

/// `{Q, P}` in `(x, p)` by fourth-order central differences with steps
/// `fd_step·max(1, |x|)` and `fd_step·max(1, |p|)`.
pub fn poisson_bracket_check(k: f64, w: f64, x: f64, p: f64, fd_step: f64) -> Result<f64> {
    let hx = fd::scaled_step(fd_step, x);
    let hp = fd::scaled_step(fd_step, p);
    let q_of = |x: f64, p: f64| canonical_qp(k, w, x, p).map(|c| c.0);
    let p_of = |x: f64, p: f64| canonical_qp(k, w, x, p).map(|c| c.1);
    let dq_dx = fd::derivative(|s| q_of(s, p), x, hx)?;
    let dq_dp = fd::derivative(|s| q_of(x, s), p, hp)?;
    let dp_dx = fd::derivative(|s| p_of(s, p), x, hx)?;
    let dp_dp = fd::derivative(|s| p_of(x, s), p, hp)?;
    Ok(dq_dx * dp_dp - dq_dp * dp_dx)
}

/// Hamilton's equations of [`hamiltonian_osc`] on `y = (x, p)`:
/// `ẋ = (w/k)/√(−kp) − kx² − w²/k`, `ṗ = 2kxp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorHamiltonFlow {
    pub k: f64,
    pub w: f64,
}

impl OdeSystem for OscillatorHamiltonFlow {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (k, w) = (self.k, self.w);
        let (x, p) = (y[0], y[1]);
        dy[0] = (w / k) / (-k * p).sqrt() - k * x * x - w * w / k;
        dy[1] = 2.0 * k * x * p;
    }

    fn guards(&self, _t: f64, y: &[f64]) -> [Option<f64>; 2] {
        [Some(-self.k * y[1]), None]
    }
}
