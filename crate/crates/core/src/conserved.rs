//! First integrals, generators of integrals and time-dependent constants of
//! motion, plus drift reports along integrated trajectories.
//!
//! Notation used below, per axis:
//!
//! * cubic system: `M = v + k x²`, `T1 = 1/M`, `T2 = x/M`. Along the motion
//!   `dT2/dt = 1` and `dT1/dt = k T2`, so `J1 = T2 − t` and
//!   `J2 = T1 − k t T2 + k t²/2` are constant.
//! * oscillator: `D = k v + k² x² + w²`, `X = x/D`, `W = (v + k x²)/D`. The
//!   pair evolves as a linear oscillator, `X' = W`, `W' = −w² X`, and
//!   `I_XW = W² + w² X²` is conserved.
//! * resonant 2D oscillator (`w_j = n_j w0`): `K_j = W_j + i n_j w0 X_j`
//!   rotates as `K_j' = i n_j w0 K_j`, so `K_12 = K_1^{n2} (K_2^*)^{n1}` is a
//!   complex constant. Its real and imaginary parts are the integrals
//!   `I4` and `I3`.

use num_complex::Complex64;

use crate::error::{Axis, Error, Result};
use crate::fd;
use crate::integrate::{dense_eval, Trajectory};
use crate::model::{axis_tag, State, System1D, SystemSpec};

/// Names of the evaluable integrals and generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegralId {
    /// Total Lagrangian energy (sum over axes).
    EnergyEL,
    EnergyI1,
    EnergyI2,
    Tx1,
    Tx2,
    Ty1,
    Ty2,
    Jx1t,
    Jx2t,
    Jy1t,
    Jy2t,
    I3Dissipative,
    I4Dissipative,
    Ixw,
    X,
    W,
    /// `|K_1|²`.
    K1,
    /// `|K_2|²`.
    K2,
    Kij(u32, u32),
    I3Osc(u32, u32),
    I4Osc(u32, u32),
}

impl IntegralId {
    /// Whether the quantity is a constant of motion (generators and `X`, `W` are not).
    pub fn is_conserved(&self) -> bool {
        !matches!(
            self,
            IntegralId::Tx1
                | IntegralId::Tx2
                | IntegralId::Ty1
                | IntegralId::Ty2
                | IntegralId::X
                | IntegralId::W
        )
    }
}

impl std::fmt::Display for IntegralId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegralId::Kij(a, b) => write!(f, "K12({a},{b})"),
            IntegralId::I3Osc(a, b) => write!(f, "I3osc({a},{b})"),
            IntegralId::I4Osc(a, b) => write!(f, "I4osc({a},{b})"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralValue {
    Real(f64),
    Complex(Complex64),
}

impl IntegralValue {
    pub fn distance(&self, other: &IntegralValue) -> f64 {
        match (self, other) {
            (IntegralValue::Real(a), IntegralValue::Real(b)) => (a - b).abs(),
            (a, b) => (a.as_complex() - b.as_complex()).norm(),
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        match *self {
            IntegralValue::Real(r) => Complex64::new(r, 0.0),
            IntegralValue::Complex(c) => c,
        }
    }

    pub fn real(&self) -> f64 {
        self.as_complex().re
    }
}

fn tagged(err: Error, axis: Option<Axis>) -> Error {
    match err {
        Error::SingularDenominator { value, .. } => Error::SingularDenominator { axis, value },
        other => other,
    }
}

fn check(d: f64, eps: f64) -> Result<f64> {
    if d.abs() < eps || !d.is_finite() {
        Err(Error::SingularDenominator {
            axis: None,
            value: d,
        })
    } else {
        Ok(d)
    }
}

/// Lagrangian energy `Δ(L) − L` of one axis.
pub fn axis_energy(axis: &System1D, x: f64, v: f64, eps: f64) -> Result<f64> {
    let d = axis.checked_denominator(x, v, eps)?;
    let numerator = match *axis {
        System1D::GeneralU { u, k } => 2.0 * v + k * u.value(x),
        System1D::CubicRiccati { k } => 2.0 * v + k * x * x,
        System1D::NonlinearOscillator { k, w } => 2.0 * k * v + k * k * x * x + w * w,
    };
    Ok(-numerator / (d * d))
}

/// Energy of a one-dimensional system.
pub fn energy(spec: &SystemSpec, state: &State, eps: f64) -> Result<f64> {
    let axis = spec.as_single()?;
    state.check_arity(spec)?;
    let (x, v) = state.axis(0);
    axis_energy(axis, x, v, eps)
}

/// `(E_total, I1, I2)` of a product system.
pub fn energy_2d(spec: &SystemSpec, state: &State, eps: f64) -> Result<(f64, f64, f64)> {
    let (a, b) = spec.as_product()?;
    state.check_arity(spec)?;
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let i1 = axis_energy(a, x, vx, eps).map_err(|e| tagged(e, Some(Axis::X)))?;
    let i2 = axis_energy(b, y, vy, eps).map_err(|e| tagged(e, Some(Axis::Y)))?;
    Ok((i1 + i2, i1, i2))
}

/// `(T1, T2) = (1/(v + k x²), x/(v + k x²))`.
pub fn t_generators(k: f64, x: f64, v: f64, eps: f64) -> Result<(f64, f64)> {
    let m = check(v + k * x * x, eps)?;
    Ok((1.0 / m, x / m))
}

/// Time-dependent integrals `(T2 − t, T1 − k t T2 + k t²/2)`.
pub fn j_integrals(k: f64, x: f64, v: f64, t: f64, eps: f64) -> Result<(f64, f64)> {
    let (t1, t2) = t_generators(k, x, v, eps)?;
    Ok((t2 - t, t1 - k * t * t2 + 0.5 * k * t * t))
}

/// `I3 = T_x2 − T_y2`, `I4 = k2 T_x1 + k1 T_y1 − k1 k2 T_x2 T_y2`.
pub fn i3_i4_dissipative(k1: f64, k2: f64, state: &State, eps: f64) -> Result<(f64, f64)> {
    if state.dof() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: state.dof(),
        });
    }
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let (tx1, tx2) = t_generators(k1, x, vx, eps).map_err(|e| tagged(e, Some(Axis::X)))?;
    let (ty1, ty2) = t_generators(k2, y, vy, eps).map_err(|e| tagged(e, Some(Axis::Y)))?;
    Ok((tx2 - ty2, k2 * tx1 + k1 * ty1 - k1 * k2 * tx2 * ty2))
}

/// `(X, W) = (x, v + k x²) / (k v + k² x² + w²)`.
pub fn xw_pair(k: f64, w: f64, x: f64, v: f64, eps: f64) -> Result<(f64, f64)> {
    let d = check(k * v + k * k * x * x + w * w, eps)?;
    Ok((x / d, (v + k * x * x) / d))
}

/// `I_XW = W² + w² X²`.
pub fn ixw(k: f64, w: f64, x: f64, v: f64, eps: f64) -> Result<f64> {
    let (xx, ww) = xw_pair(k, w, x, v, eps)?;
    Ok(ww * ww + w * w * xx * xx)
}

/// `Δ(L̃) − L̃` for the rescaled oscillator Lagrangian `L̃ = (w/k)² L − 1/k²`,
/// written out from `∂L̃/∂v = −w²/(k D²)`.
pub fn rescaled_oscillator_energy(k: f64, w: f64, x: f64, v: f64, eps: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::Unsupported("rescaled energy at k = 0"));
    }
    let d = check(k * v + k * k * x * x + w * w, eps)?;
    let scale = (w / k).powi(2);
    let l_tilde = scale / d - 1.0 / (k * k);
    let dl_dv = -scale * k / (d * d);
    Ok(v * dl_dv - l_tilde)
}

/// A 2D oscillator with commensurate frequencies `w1 = n1 w0`, `w2 = n2 w0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantOscillator {
    pub k1: f64,
    pub k2: f64,
    pub w0: f64,
    pub n1: u32,
    pub n2: u32,
}

impl ResonantOscillator {
    pub fn new(k1: f64, k2: f64, w0: f64, n1: u32, n2: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidConfig("resonance numbers must be positive".into()));
        }
        Ok(Self { k1, k2, w0, n1, n2 })
    }

    /// Recovers the resonance from a product spec, checking `w2/w1 = n2/n1`.
    pub fn from_spec(spec: &SystemSpec, n1: u32, n2: u32) -> Result<Self> {
        let (a, b) = spec.as_product()?;
        match (*a, *b) {
            (
                System1D::NonlinearOscillator { k: k1, w: w1 },
                System1D::NonlinearOscillator { k: k2, w: w2 },
            ) => {
                if n1 == 0 || n2 == 0 {
                    return Err(Error::InvalidConfig("resonance numbers must be positive".into()));
                }
                let w0 = w1 / n1 as f64;
                let expected = n2 as f64 * w0;
                if (w2 - expected).abs() > 1e-12 * w2.abs().max(expected.abs()).max(1e-300) {
                    return Err(Error::IncommensurateFrequencies { w1, w2, n1, n2 });
                }
                Ok(Self { k1, k2, w0, n1, n2 })
            }
            _ => Err(Error::Unsupported("K-functions outside the 2D oscillator")),
        }
    }

    pub fn w1(&self) -> f64 {
        self.n1 as f64 * self.w0
    }

    pub fn w2(&self) -> f64 {
        self.n2 as f64 * self.w0
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec::product(
            System1D::NonlinearOscillator {
                k: self.k1,
                w: self.w1(),
            },
            System1D::NonlinearOscillator {
                k: self.k2,
                w: self.w2(),
            },
        )
    }
}

/// `K_j = W_j + i n_j w0 X_j` for both axes.
pub fn k_functions(osc: &ResonantOscillator, state: &State, eps: f64) -> Result<(Complex64, Complex64)> {
    if state.dof() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: state.dof(),
        });
    }
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let (w1, w2) = (osc.w1(), osc.w2());
    let (x1, ww1) = xw_pair(osc.k1, w1, x, vx, eps).map_err(|e| tagged(e, Some(Axis::X)))?;
    let (x2, ww2) = xw_pair(osc.k2, w2, y, vy, eps).map_err(|e| tagged(e, Some(Axis::Y)))?;
    Ok((Complex64::new(ww1, w1 * x1), Complex64::new(ww2, w2 * x2)))
}

fn ipow(z: Complex64, n: u32) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, _| acc * z)
}

/// `K_12 = K_1^{n2} (K_2^*)^{n1}`; `Re = I4`, `Im = I3`.
pub fn kij_constant(k1: Complex64, k2: Complex64, n1: u32, n2: u32) -> Complex64 {
    ipow(k1, n2) * ipow(k2.conj(), n1)
}

/// Rational closed forms of `(I3, I4)` for the isotropic case `w1 = w2 = w0`,
/// with `I3 = X1 W2 − X2 W1` and `I4 = W1 W2 + w0² X1 X2`.
pub fn isotropic_integrals(k1: f64, k2: f64, w0: f64, state: &State) -> (f64, f64) {
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let w2 = w0 * w0;
    let den = (k1 * vx + k1 * k1 * x * x + w2) * (k2 * vy + k2 * k2 * y * y + w2);
    let i3 = ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y) / den;
    let i4 = ((vx + k1 * x * x) * (vy + k2 * y * y) + w2 * x * y) / den;
    (i3, i4)
}

/// Rational closed forms of `(I3, I4)` for `w1 = w0`, `w2 = 2 w0`, with
/// `I3 = (X1 W2 − X2 W1) W1 + w0² X1² X2` and `I4 = W1² W2 + w0² (4 X2 W1 − X1 W2) X1`.
pub fn anisotropic_1_2_integrals(k1: f64, k2: f64, w0: f64, state: &State) -> (f64, f64) {
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let w2 = w0 * w0;
    let d1 = k1 * vx + k1 * k1 * x * x + w2;
    let d2 = k2 * vy + k2 * k2 * y * y + 4.0 * w2;
    let den = d1 * d1 * d2;
    let mx = vx + k1 * x * x;
    let my = vy + k2 * y * y;
    let i3 = (mx * ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y) + w2 * x * x * y) / den;
    let i4 = (mx * mx * my + w2 * (4.0 * y * vx - x * vy + (4.0 * k1 * x - k2 * y) * x * y) * x) / den;
    (i3, i4)
}

/// `k → 0` forms: `((x v_y − y v_x), (v_x v_y + w0² x y)) / w0⁴`.
pub fn small_k_limit_integrals(w0: f64, state: &State) -> (f64, f64) {
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let w4 = w0.powi(4);
    ((x * vy - y * vx) / w4, (vx * vy + w0 * w0 * x * y) / w4)
}

/// `w0 → 0` forms: `I3 → [(x v_y − y v_x) + (k2 y − k1 x) x y] / (k1 k2 M_x M_y)`,
/// `I4 → 1/(k1 k2)`.
pub fn small_w_limit_integrals(k1: f64, k2: f64, state: &State) -> (f64, f64) {
    let (x, vx) = state.axis(0);
    let (y, vy) = state.axis(1);
    let i3 = ((x * vy - y * vx) + (k2 * y - k1 * x) * x * y)
        / (k1 * k2 * (vx + k1 * x * x) * (vy + k2 * y * y));
    (i3, 1.0 / (k1 * k2))
}

/// Parameters of a limit comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    /// `k1 = k2 = k → 0` at fixed `w0`.
    SmallK { k: f64, w0: f64 },
    /// `w0 → 0` at fixed `k1`, `k2`.
    SmallW { w0: f64, k1: f64, k2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub i3_full: f64,
    pub i3_limit: f64,
    pub i3_deviation: f64,
    pub i4_full: f64,
    pub i4_limit: f64,
    pub i4_deviation: f64,
}

fn relative_deviation(full: f64, limit: f64) -> f64 {
    let diff = (full - limit).abs();
    if limit == 0.0 {
        diff
    } else {
        diff / limit.abs()
    }
}

/// Compares the isotropic integrals (via `K_12`) with their limiting forms.
pub fn limit_checks(limit: Limit, state: &State, eps: f64) -> Result<LimitReport> {
    let (param, k1, k2, w0) = match limit {
        Limit::SmallK { k, w0 } => (k, k, k, w0),
        Limit::SmallW { w0, k1, k2 } => (w0, k1, k2, w0),
    };
    if !(param > 0.0 && param <= 1e-3) {
        return Err(Error::InvalidConfig("limit parameter must lie in (0, 1e-3]".into()));
    }
    let osc = ResonantOscillator::new(k1, k2, w0, 1, 1)?;
    let (ka, kb) = k_functions(&osc, state, eps)?;
    let k12 = kij_constant(ka, kb, 1, 1);
    let (i3_full, i4_full) = (k12.im / w0, k12.re);
    let (i3_limit, i4_limit) = match limit {
        Limit::SmallK { w0, .. } => small_k_limit_integrals(w0, state),
        Limit::SmallW { k1, k2, .. } => small_w_limit_integrals(k1, k2, state),
    };
    Ok(LimitReport {
        i3_full,
        i3_limit,
        i3_deviation: relative_deviation(i3_full, i3_limit),
        i4_full,
        i4_limit,
        i4_deviation: relative_deviation(i4_full, i4_limit),
    })
}

fn cubic_k(axis: Option<&System1D>) -> Result<f64> {
    match axis {
        Some(System1D::CubicRiccati { k }) => Ok(*k),
        Some(_) => Err(Error::Unsupported("cubic generators on a non-cubic axis")),
        None => Err(Error::ArityMismatch {
            expected: 2,
            found: 1,
        }),
    }
}

fn oscillator_kw(axis: Option<&System1D>) -> Result<(f64, f64)> {
    match axis {
        Some(System1D::NonlinearOscillator { k, w }) => Ok((*k, *w)),
        Some(_) => Err(Error::Unsupported("oscillator functions on a non-oscillator axis")),
        None => Err(Error::ArityMismatch {
            expected: 2,
            found: 1,
        }),
    }
}

/// Evaluates one integral at a state. Axis-specific oscillator quantities
/// (`Ixw`, `X`, `W`) refer to the first axis.
pub fn evaluate_integral(id: IntegralId, spec: &SystemSpec, state: &State, eps: f64) -> Result<IntegralValue> {
    use IntegralValue::Real;
    state.check_arity(spec)?;
    let on_axis = |i: usize, r: Result<f64>| r.map_err(|e| tagged(e, axis_tag(spec, i)));
    let axis_state = |i: usize| state.axis(i);
    match id {
        IntegralId::EnergyEL => {
            let mut total = 0.0;
            for (i, axis) in spec.axes().enumerate() {
                let (x, v) = axis_state(i);
                total += on_axis(i, axis_energy(axis, x, v, eps))?;
            }
            Ok(Real(total))
        }
        IntegralId::EnergyI1 | IntegralId::EnergyI2 => {
            let i = usize::from(id == IntegralId::EnergyI2);
            let axis = spec.axis(i).ok_or(Error::ArityMismatch {
                expected: 2,
                found: 1,
            })?;
            let (x, v) = axis_state(i);
            on_axis(i, axis_energy(axis, x, v, eps)).map(Real)
        }
        IntegralId::Tx1 | IntegralId::Tx2 | IntegralId::Ty1 | IntegralId::Ty2 => {
            let i = usize::from(matches!(id, IntegralId::Ty1 | IntegralId::Ty2));
            let k = cubic_k(spec.axis(i))?;
            let (x, v) = axis_state(i);
            let (t1, t2) = t_generators(k, x, v, eps).map_err(|e| tagged(e, axis_tag(spec, i)))?;
            Ok(Real(if matches!(id, IntegralId::Tx1 | IntegralId::Ty1) { t1 } else { t2 }))
        }
        IntegralId::Jx1t | IntegralId::Jx2t | IntegralId::Jy1t | IntegralId::Jy2t => {
            let i = usize::from(matches!(id, IntegralId::Jy1t | IntegralId::Jy2t));
            let k = cubic_k(spec.axis(i))?;
            let (x, v) = axis_state(i);
            let (j1, j2) = j_integrals(k, x, v, state.t, eps).map_err(|e| tagged(e, axis_tag(spec, i)))?;
            Ok(Real(if matches!(id, IntegralId::Jx1t | IntegralId::Jy1t) { j1 } else { j2 }))
        }
        IntegralId::I3Dissipative | IntegralId::I4Dissipative => {
            let k1 = cubic_k(spec.axis(0))?;
            let k2 = cubic_k(spec.axis(1))?;
            let (i3, i4) = i3_i4_dissipative(k1, k2, state, eps)?;
            Ok(Real(if id == IntegralId::I3Dissipative { i3 } else { i4 }))
        }
        IntegralId::Ixw | IntegralId::X | IntegralId::W => {
            let (k, w) = oscillator_kw(spec.axis(0))?;
            let (x, v) = axis_state(0);
            let tag = axis_tag(spec, 0);
            match id {
                IntegralId::Ixw => ixw(k, w, x, v, eps).map(Real).map_err(|e| tagged(e, tag)),
                _ => {
                    let (xx, ww) = xw_pair(k, w, x, v, eps).map_err(|e| tagged(e, tag))?;
                    Ok(Real(if id == IntegralId::X { xx } else { ww }))
                }
            }
        }
        IntegralId::K1 | IntegralId::K2 => {
            let i = usize::from(id == IntegralId::K2);
            let (k, w) = oscillator_kw(spec.axis(i))?;
            let (x, v) = axis_state(i);
            on_axis(i, ixw(k, w, x, v, eps)).map(Real)
        }
        IntegralId::Kij(n1, n2) | IntegralId::I3Osc(n1, n2) | IntegralId::I4Osc(n1, n2) => {
            let osc = ResonantOscillator::from_spec(spec, n1, n2)?;
            let (ka, kb) = k_functions(&osc, state, eps)?;
            let k12 = kij_constant(ka, kb, n1, n2);
            Ok(match id {
                IntegralId::Kij(..) => IntegralValue::Complex(k12),
                IntegralId::I3Osc(..) => Real(k12.im),
                _ => Real(k12.re),
            })
        }
    }
}

/// Time series of one integral along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedReport {
    pub integral: IntegralId,
    /// `(t, value)` at every evaluable node, in increasing `t`.
    pub samples: Vec<(f64, IntegralValue)>,
    /// Node times at which the integral was singular.
    pub gaps: Vec<f64>,
    /// `max |value(t) − value(t_first)|`.
    pub drift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConservedReport {
    pub fn initial_value(&self) -> Option<IntegralValue> {
        self.samples.first().map(|s| s.1)
    }
}

/// Samples `integral` at every node of `trajectory` and measures its drift
/// from the first sample. A report with singular gaps never passes.
pub fn drift_report(integral: IntegralId, trajectory: &Trajectory<SystemSpec>, tolerance: f64) -> Result<ConservedReport> {
    drift_report_with_eps(integral, trajectory, tolerance, crate::model::DEFAULT_DENOM_EPSILON)
}

pub fn drift_report_with_eps(
    integral: IntegralId,
    trajectory: &Trajectory<SystemSpec>,
    tolerance: f64,
    eps: f64,
) -> Result<ConservedReport> {
    let spec = &trajectory.system;
    let mut samples = Vec::with_capacity(trajectory.nodes.len());
    let mut gaps = Vec::new();
    for state in trajectory.states() {
        match evaluate_integral(integral, spec, &state, eps) {
            Ok(v) => samples.push((state.t, v)),
            Err(Error::SingularDenominator { .. }) => gaps.push(state.t),
            Err(e) => return Err(e),
        }
    }
    let drift = match samples.first() {
        Some(&(_, first)) => samples
            .iter()
            .map(|(_, v)| v.distance(&first))
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    Ok(ConservedReport {
        integral,
        pass: gaps.is_empty() && drift <= tolerance,
        samples,
        gaps,
        drift,
        tolerance,
    })
}

/// `d/dt f(state(t))` by a fourth-order central difference on dense output.
pub fn rate_along<F>(trajectory: &Trajectory<SystemSpec>, t: f64, h: f64, f: F) -> Result<f64>
where
    F: Fn(&State) -> Result<f64>,
{
    fd::derivative(|s| f(&dense_eval(trajectory, s)?), t, h)
}

/// `d²/dt² f(state(t))`. The inner rate is taken along the exact phase
/// velocity at each dense-output state, the outer one across dense output,
/// since the interpolant's own second derivative is only second-order accurate.
pub fn second_rate_along<F>(trajectory: &Trajectory<SystemSpec>, t: f64, h: f64, f: F) -> Result<f64>
where
    F: Fn(&State) -> Result<f64>,
{
    let spec = &trajectory.system;
    let tangent_rate = |s: &State| {
        let phase = s.phase();
        let mut dphase = vec![0.0; phase.len()];
        spec.phase_velocity(&phase, &mut dphase);
        let along = |tau: f64| {
            let moved: Vec<f64> = phase.iter().zip(&dphase).map(|(y, dy)| y + tau * dy).collect();
            f(&State::from_phase(s.t + tau, &moved))
        };
        fd::derivative(along, 0.0, h)
    };
    fd::derivative(|s| tangent_rate(&dense_eval(trajectory, s)?), t, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_DENOM_EPSILON as EPS;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn energy_examples() {
        let e = |spec: SystemSpec, x, v| energy(&spec, &State::new_1d(0.0, x, v), EPS).unwrap();
        assert_eq!(e(SystemSpec::cubic(1.0), 0.0, -2.0), 1.0);
        assert_eq!(e(SystemSpec::cubic(1.0), 1.0, 0.0), -1.0);
        assert_eq!(e(SystemSpec::oscillator(1.0, 1.0), 0.0, 1.0), -0.75);
        let err = energy(&SystemSpec::cubic(1.0), &State::new_1d(0.0, 0.0, 0.0), EPS).unwrap_err();
        assert!(matches!(err, Error::SingularDenominator { axis: None, .. }));
    }

    #[test]
    fn energy_2d_examples() {
        let c = System1D::CubicRiccati { k: 1.0 };
        let spec = SystemSpec::product(c, c);
        let (e, i1, i2) = energy_2d(&spec, &State::new_2d(0.0, 0.0, -2.0, 0.0, -0.4), EPS).unwrap();
        assert_eq!(i1, 1.0);
        assert!(close(i2, 5.0, 1e-14));
        assert!(close(e, 6.0, 1e-14));
        assert_eq!(e - i1 - i2, 0.0);
        let (_, a, b) = energy_2d(&spec, &State::new_2d(0.0, 0.3, 0.7, 0.3, 0.7), EPS).unwrap();
        assert_eq!(a, b);
        let err = energy_2d(&spec, &State::new_2d(0.0, 0.3, 0.7, 0.0, 0.0), EPS).unwrap_err();
        assert!(matches!(err, Error::SingularDenominator { axis: Some(Axis::Y), .. }));
    }

    #[test]
    fn generator_examples() {
        assert_eq!(t_generators(1.0, 0.0, 2.0, EPS).unwrap(), (0.5, 0.0));
        assert_eq!(t_generators(1.0, 1.0, 1.0, EPS).unwrap(), (0.5, 0.5));
        assert_eq!(j_integrals(1.0, 0.3, 0.2, 0.0, EPS).unwrap(), {
            let (a, b) = t_generators(1.0, 0.3, 0.2, EPS).unwrap();
            (b, a)
        });
        assert_eq!(j_integrals(1.0, 1.0, 1.0, 2.0, EPS).unwrap(), (-1.5, 1.5));
        assert!(t_generators(1.0, 1.0, -1.0, EPS).is_err());
    }

    #[test]
    fn dissipative_integral_examples() {
        let (i3, i4) = i3_i4_dissipative(1.0, 1.0, &State::new_2d(0.0, 1.0, 1.0, 0.0, 2.0), EPS).unwrap();
        assert_eq!((i3, i4), (0.5, 1.0));
        let (i3, _) = i3_i4_dissipative(0.7, 0.7, &State::new_2d(0.0, 0.4, 0.9, 0.4, 0.9), EPS).unwrap();
        assert_eq!(i3, 0.0);
    }

    #[test]
    fn xw_examples() {
        assert_eq!(xw_pair(1.0, 1.0, 0.0, 1.0, EPS).unwrap(), (0.0, 0.5));
        assert_eq!(xw_pair(1.0, 1.0, 1.0, 0.0, EPS).unwrap(), (0.5, 0.5));
        assert_eq!(ixw(1.0, 1.0, 0.0, 1.0, EPS).unwrap(), 0.25);
        for &(k, w, x, v) in &[(1.0, 1.0, 0.3, -0.2), (0.4, 2.5, -1.7, 3.1), (-1.2, 0.3, 0.8, 0.05)] {
            let (xx, ww) = xw_pair(k, w, x, v, EPS).unwrap();
            let lhs = w * w * xx + k * x * ww;
            assert!((lhs - x).abs() <= 1e-14 * x.abs().max(1e-300), "{lhs} vs {x}");
        }
    }

    #[test]
    fn rescaled_energy_matches_ixw() {
        for &(k, w, x, v) in &[(1.0, 1.0, 0.3, -0.2), (0.4, 2.5, -1.7, 3.1), (2.0, 0.5, 0.2, 0.4)] {
            let a = rescaled_oscillator_energy(k, w, x, v, EPS).unwrap();
            let b = ixw(k, w, x, v, EPS).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn k_function_examples() {
        let osc = ResonantOscillator::new(1.0, 1.0, 1.0, 1, 1).unwrap();
        let (ka, kb) = k_functions(&osc, &State::new_2d(0.0, 0.0, 1.0, 0.0, 1.0), EPS).unwrap();
        assert_eq!(ka, Complex64::new(0.5, 0.0));
        assert_eq!(kb, Complex64::new(0.5, 0.0));
        let k12 = kij_constant(ka, ka, 1, 1);
        assert_eq!(k12.im, 0.0);
        assert!(close(k12.re, ka.norm_sqr(), 1e-16));
        let osc = ResonantOscillator::new(0.6, 1.1, 0.8, 1, 2).unwrap();
        let s = State::new_2d(0.0, 0.3, -0.4, -0.2, 0.5);
        let (ka, kb) = k_functions(&osc, &s, EPS).unwrap();
        let i1 = ixw(0.6, 0.8, 0.3, -0.4, EPS).unwrap();
        let i2 = ixw(1.1, 1.6, -0.2, 0.5, EPS).unwrap();
        assert!(close(ka.norm_sqr(), i1, 1e-15));
        assert!(close(kb.norm_sqr(), i2, 1e-15));
    }

    #[test]
    fn incommensurate_spec_is_rejected() {
        let spec = SystemSpec::product(
            System1D::NonlinearOscillator { k: 1.0, w: 1.0 },
            System1D::NonlinearOscillator { k: 1.0, w: 1.5 },
        );
        assert!(matches!(
            ResonantOscillator::from_spec(&spec, 1, 2),
            Err(Error::IncommensurateFrequencies { .. })
        ));
        assert!(ResonantOscillator::from_spec(&spec, 2, 3).is_ok());
    }

    #[test]
    fn small_k_limit_formula_is_finite_at_zero() {
        let s = State::new_2d(0.0, 0.2, 0.5, -0.3, 0.1);
        let (i3, _) = small_k_limit_integrals(1.0, &s);
        assert_eq!(i3, 0.2 * 0.1 - (-0.3) * 0.5);
    }

    #[test]
    fn limit_parameter_range_is_enforced() {
        let s = State::new_2d(0.0, 0.2, 0.5, -0.3, 0.1);
        assert!(limit_checks(Limit::SmallK { k: 0.1, w0: 1.0 }, &s, EPS).is_err());
        assert!(limit_checks(Limit::SmallK { k: 0.0, w0: 1.0 }, &s, EPS).is_err());
        assert!(limit_checks(Limit::SmallK { k: 1e-4, w0: 1.0 }, &s, EPS).is_ok());
    }

    #[test]
    fn evaluate_rejects_wrong_system() {
        let s = State::new_1d(0.0, 0.1, 0.2);
        let err = evaluate_integral(IntegralId::Ixw, &SystemSpec::cubic(1.0), &s, EPS).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let err = evaluate_integral(IntegralId::EnergyI2, &SystemSpec::cubic(1.0), &s, EPS).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { .. }));
    }
}
