//! Dynamical systems generated by reciprocal (non-natural) Lagrangians.
//!
//! Every one-dimensional system here comes from a Lagrangian of the form
//! `L = 1 / D(x, v)` with `D` affine in the velocity:
//!
//! | system                  | `D`                       | acceleration                        |
//! |-------------------------|---------------------------|-------------------------------------|
//! | general `U`             | `v + k U(x)`              | `-(3/2 k U' v + 1/2 k² U U' + k U_t)` |
//! | cubic Riccati           | `v + k x²`                | `-(3 k x v + k² x³)`                |
//! | nonlinear oscillator    | `k v + k² x² + w²`        | `-(3 k x v + k² x³ + w² x)`          |
//!
//! Two-dimensional systems are uncoupled products of two of these.

use crate::error::{Axis, Error, Result};
use crate::fd;

/// Default threshold below which `|D|` is treated as a pole of the Lagrangian.
pub const DEFAULT_DENOM_EPSILON: f64 = 1e-12;

/// `U(x) = c0 + c1 x + c2 x²`, optionally with the time derivatives of the
/// coefficients at the evaluation instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadraticU {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub dc0: f64,
    pub dc1: f64,
    pub dc2: f64,
}

impl QuadraticU {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self {
            c0,
            c1,
            c2,
            dc0: 0.0,
            dc1: 0.0,
            dc2: 0.0,
        }
    }

    pub const fn with_time_derivatives(self, dc0: f64, dc1: f64, dc2: f64) -> Self {
        Self {
            dc0,
            dc1,
            dc2,
            ..self
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * x * x
    }

    /// `dU/dx`.
    pub fn slope(&self, x: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * x
    }

    /// `∂U/∂t` built from the coefficient derivatives.
    pub fn time_derivative(&self, x: f64) -> f64 {
        self.dc0 + self.dc1 * x + self.dc2 * x * x
    }

    pub fn is_time_independent(&self) -> bool {
        self.dc0 == 0.0 && self.dc1 == 0.0 && self.dc2 == 0.0
    }
}

/// A one-degree-of-freedom member of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System1D {
    GeneralU { u: QuadraticU, k: f64 },
    CubicRiccati { k: f64 },
    NonlinearOscillator { k: f64, w: f64 },
}

impl System1D {
    pub fn k(&self) -> f64 {
        match *self {
            System1D::GeneralU { k, .. }
            | System1D::CubicRiccati { k }
            | System1D::NonlinearOscillator { k, .. } => k,
        }
    }

    /// Denominator `D(x, v)` of the Lagrangian.
    pub fn denominator(&self, x: f64, v: f64) -> f64 {
        match *self {
            System1D::GeneralU { u, k } => v + k * u.value(x),
            System1D::CubicRiccati { k } => v + k * x * x,
            System1D::NonlinearOscillator { k, w } => k * v + k * k * x * x + w * w,
        }
    }

    /// Denominator, rejected when `|D| < eps`.
    pub fn checked_denominator(&self, x: f64, v: f64, eps: f64) -> Result<f64> {
        let d = self.denominator(x, v);
        if d.abs() < eps || !d.is_finite() {
            return Err(Error::SingularDenominator {
                axis: None,
                value: d,
            });
        }
        Ok(d)
    }

    pub fn acceleration(&self, x: f64, v: f64) -> f64 {
        match *self {
            System1D::GeneralU { u, k } => {
                let slope = u.slope(x);
                -(1.5 * k * slope * v + 0.5 * k * k * u.value(x) * slope + k * u.time_derivative(x))
            }
            System1D::CubicRiccati { k } => -(3.0 * k * x * v + k * k * x * x * x),
            System1D::NonlinearOscillator { k, w } => {
                -(3.0 * k * x * v + k * k * x * x * x + w * w * x)
            }
        }
    }

    /// Rewrites the system as `L = scale / (v + k U_eff(x))`.
    ///
    /// The oscillator maps to `U_eff = x² + w²/k²` with `scale = 1/k`, which
    /// requires `k ≠ 0`.
    pub fn reciprocal_form(&self) -> Result<(QuadraticU, f64, f64)> {
        match *self {
            System1D::GeneralU { u, k } => Ok((u, k, 1.0)),
            System1D::CubicRiccati { k } => Ok((QuadraticU::new(0.0, 0.0, 1.0), k, 1.0)),
            System1D::NonlinearOscillator { k, w } => {
                if k == 0.0 {
                    return Err(Error::Unsupported("reciprocal form of the k = 0 oscillator"));
                }
                Ok((QuadraticU::new(w * w / (k * k), 0.0, 1.0), k, 1.0 / k))
            }
        }
    }
}

/// A system specification: one axis or an uncoupled product of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSpec {
    Single(System1D),
    Product2D(System1D, System1D),
}

impl SystemSpec {
    pub fn cubic(k: f64) -> Self {
        SystemSpec::Single(System1D::CubicRiccati { k })
    }

    pub fn oscillator(k: f64, w: f64) -> Self {
        SystemSpec::Single(System1D::NonlinearOscillator { k, w })
    }

    pub fn general_u(u: QuadraticU, k: f64) -> Self {
        SystemSpec::Single(System1D::GeneralU { u, k })
    }

    pub fn product(first: System1D, second: System1D) -> Self {
        SystemSpec::Product2D(first, second)
    }

    pub fn dof(&self) -> usize {
        match self {
            SystemSpec::Single(_) => 1,
            SystemSpec::Product2D(..) => 2,
        }
    }

    pub fn axis(&self, i: usize) -> Option<&System1D> {
        match (self, i) {
            (SystemSpec::Single(s), 0) => Some(s),
            (SystemSpec::Product2D(a, _), 0) => Some(a),
            (SystemSpec::Product2D(_, b), 1) => Some(b),
            _ => None,
        }
    }

    pub fn axes(&self) -> impl Iterator<Item = &System1D> {
        (0..self.dof()).filter_map(move |i| self.axis(i))
    }

    pub fn as_single(&self) -> Result<&System1D> {
        match self {
            SystemSpec::Single(s) => Ok(s),
            SystemSpec::Product2D(..) => Err(Error::ArityMismatch {
                expected: 1,
                found: 2,
            }),
        }
    }

    pub fn as_product(&self) -> Result<(&System1D, &System1D)> {
        match self {
            SystemSpec::Product2D(a, b) => Ok((a, b)),
            SystemSpec::Single(_) => Err(Error::ArityMismatch {
                expected: 2,
                found: 1,
            }),
        }
    }

    /// Phase-vector acceleration: `phase = [x, v_x, (y, v_y)]`, writes `[v_x, a_x, ...]`.
    pub fn phase_velocity(&self, phase: &[f64], out: &mut [f64]) {
        for (i, axis) in self.axes().enumerate() {
            let (x, v) = (phase[2 * i], phase[2 * i + 1]);
            out[2 * i] = v;
            out[2 * i + 1] = axis.acceleration(x, v);
        }
    }

    /// Signed Lagrangian denominators, one per axis.
    pub fn denominators(&self, phase: &[f64]) -> [Option<f64>; 2] {
        let mut out = [None, None];
        for (i, axis) in self.axes().enumerate() {
            out[i] = Some(axis.denominator(phase[2 * i], phase[2 * i + 1]));
        }
        out
    }
}

/// A phase point with its time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new_1d(t: f64, x: f64, v: f64) -> Self {
        Self {
            t,
            q: vec![x],
            v: vec![v],
        }
    }

    pub fn new_2d(t: f64, x: f64, vx: f64, y: f64, vy: f64) -> Self {
        Self {
            t,
            q: vec![x, y],
            v: vec![vx, vy],
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    /// Interleaved `[x, v_x, y, v_y]`.
    pub fn phase(&self) -> Vec<f64> {
        self.q
            .iter()
            .zip(&self.v)
            .flat_map(|(&q, &v)| [q, v])
            .collect()
    }

    pub fn from_phase(t: f64, phase: &[f64]) -> Self {
        Self {
            t,
            q: phase.iter().step_by(2).copied().collect(),
            v: phase.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    /// `(x, v)` of the given axis.
    pub fn axis(&self, i: usize) -> (f64, f64) {
        (self.q[i], self.v[i])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.v).all(|c| c.is_finite())
    }

    pub(crate) fn check_arity(&self, spec: &SystemSpec) -> Result<()> {
        if self.q.len() != self.v.len() || self.q.len() != spec.dof() {
            return Err(Error::ArityMismatch {
                expected: spec.dof(),
                found: self.q.len().max(self.v.len()),
            });
        }
        Ok(())
    }
}

pub(crate) fn axis_tag(spec: &SystemSpec, i: usize) -> Option<Axis> {
    match (spec.dof(), i) {
        (1, _) => None,
        (_, 0) => Some(Axis::X),
        _ => Some(Axis::Y),
    }
}

/// `L = 1/D` of a one-dimensional system.
pub fn lagrangian_value(spec: &System1D, state: &State, eps: f64) -> Result<f64> {
    let (x, v) = state.axis(0);
    Ok(1.0 / spec.checked_denominator(x, v, eps)?)
}

/// Acceleration vector of the equations of motion.
pub fn force(spec: &SystemSpec, state: &State) -> Result<Vec<f64>> {
    state.check_arity(spec)?;
    Ok(spec
        .axes()
        .enumerate()
        .map(|(i, axis)| axis.acceleration(state.q[i], state.v[i]))
        .collect())
}

/// First-order reduction `(v, F)` flattened as `[v_x, a_x, v_y, a_y]`.
pub fn rhs(spec: &SystemSpec, state: &State) -> Result<Vec<f64>> {
    state.check_arity(spec)?;
    let mut out = vec![0.0; 2 * spec.dof()];
    spec.phase_velocity(&state.phase(), &mut out);
    Ok(out)
}

/// Coefficients of `x'' + (b0 + b1 x) x' + a0 + a1 x + a2 x² + a3 x³ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b0: f64,
    pub b1: f64,
    /// `b0` from the generic constraint `a2/√a3 − a3'/(2 a3)`; `None` when `a3 = 0`.
    pub b0_from_constraint: Option<f64>,
}

impl RiccatiCoefficients {
    /// `b0_from_constraint − b0`, the disagreement between the two `b0` forms.
    pub fn b0_discrepancy(&self) -> Option<f64> {
        self.b0_from_constraint.map(|b| b - self.b0)
    }

    /// Left-hand side of the Riccati equation with the acceleration moved out:
    /// returns the acceleration it implies.
    pub fn acceleration(&self, x: f64, v: f64) -> f64 {
        -((self.b0 + self.b1 * x) * v + self.a0 + x * (self.a1 + x * (self.a2 + x * self.a3)))
    }
}

/// Riccati coefficients of the `k = 1` quadratic-`U` equation.
pub fn riccati_coefficients(u: &QuadraticU) -> RiccatiCoefficients {
    let QuadraticU {
        c0,
        c1,
        c2,
        dc0,
        dc1,
        dc2,
    } = *u;
    let a2 = 1.5 * c1 * c2 + dc2;
    let a3 = c2 * c2;
    let b0_from_constraint = (a3 > 0.0).then(|| {
        let da3 = 2.0 * c2 * dc2;
        a2 / a3.sqrt() - da3 / (2.0 * a3)
    });
    RiccatiCoefficients {
        a0: 0.5 * c0 * c1 + dc0,
        a1: c0 * c2 + 0.5 * c1 * c1 + dc1,
        a2,
        a3,
        b0: 1.5 * c1,
        b1: 3.0 * c2,
        b0_from_constraint,
    }
}

/// `√(2v + kU)`, the alternative Lagrangian producing the same motion as `1/(v + kU)`.
///
/// The oscillator is handled through its reciprocal form.
pub fn alternative_lagrangian(spec: &System1D, x: f64, v: f64) -> Result<f64> {
    let (u, k, _) = spec.reciprocal_form()?;
    let radicand = 2.0 * v + k * u.value(x);
    if radicand <= 0.0 {
        return Err(Error::SingularDenominator {
            axis: None,
            value: radicand,
        });
    }
    Ok(radicand.sqrt())
}

/// `d/dt(∂L/∂v) − ∂L/∂x` at `(x, v)` for the motion with acceleration `accel`.
///
/// All partials are fourth-order central differences. `∂L/∂v` uses the step
/// `fd_step·max(1,|v|)`; its time derivative is taken along the tangent line
/// `(x + v τ, v + a τ)` with the coarser step `√fd_step / max(1,|v|,|a|)`,
/// which keeps the nested difference clear of round-off.
pub fn euler_lagrange_residual<L>(lagrangian: L, state: &State, accel: f64, fd_step: f64) -> Result<f64>
where
    L: Fn(f64, f64) -> Result<f64>,
{
    let (x, v) = state.axis(0);
    let hv = fd::scaled_step(fd_step, v);
    let hx = fd::scaled_step(fd_step, x);
    let momentum = |xx: f64, vv: f64| fd::derivative(|s| lagrangian(xx, s), vv, hv);
    let tau = fd_step.sqrt() / v.abs().max(accel.abs()).max(1.0);
    let dp_dt = fd::derivative(|s| momentum(x + v * s, v + accel * s), 0.0, tau)?;
    let dl_dx = fd::derivative(|s| lagrangian(s, v), x, hx)?;
    Ok(dp_dt - dl_dx)
}
