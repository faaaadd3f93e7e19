//! Adaptive Dormand–Prince 5(4) integration with cubic Hermite dense output.
//!
//! The marcher uses the FSAL property (the last stage of an accepted step is
//! the derivative at the new node), a PI step-size controller and two kinds
//! of termination events:
//!
//! * a model guard (the Lagrangian denominator per axis) dropping below
//!   `denom_epsilon` or changing sign; the event time is bracketed by
//!   bisection of the step size to `EVENT_TIME_TOL`;
//! * a state component exceeding `blowup_bound`. When the growth matches a
//!   movable pole `x ~ A (t* − t)^(−p)` the pole time is extrapolated from
//!   `x, x', x''` and reported as [`Status::Singular`]; otherwise the run ends
//!   with [`Status::BlowUp`].

use crate::error::{Error, Result};
use crate::model::{State, SystemSpec, DEFAULT_DENOM_EPSILON};

/// Event bracketing resolution in `t`.
pub const EVENT_TIME_TOL: f64 = 1e-10;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Fifth-order weights minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Signed quantities whose zero set is singular for the model.
    fn guards(&self, _t: f64, _y: &[f64]) -> [Option<f64>; 2] {
        [None, None]
    }

    /// `(position, velocity)` component pairs used to extrapolate pole times.
    fn position_velocity_pairs(&self) -> Vec<(usize, usize)> {
        Vec::new()
    }
}

impl OdeSystem for SystemSpec {
    fn dim(&self) -> usize {
        2 * self.dof()
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.phase_velocity(y, dy);
    }

    fn guards(&self, _t: f64, y: &[f64]) -> [Option<f64>; 2] {
        self.denominators(y)
    }

    fn position_velocity_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.dof()).map(|i| (2 * i, 2 * i + 1)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Defaults to `1e-4·|t_end − t0|`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    pub blowup_bound: f64,
    pub denom_epsilon: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 500_000,
            blowup_bound: 1e8,
            denom_epsilon: DEFAULT_DENOM_EPSILON,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1");
        }
        if !(self.h_max > 0.0) {
            return bad("h_max must be positive");
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h.is_finite()) {
                return bad("h_init must be positive and finite");
            }
        }
        if !(self.blowup_bound > 0.0) || !(self.denom_epsilon >= 0.0) {
            return bad("blowup_bound must be positive and denom_epsilon non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    /// A singular time: a model guard vanished or the solution ran into a pole.
    Singular { t: f64 },
    /// A component exceeded the bound without a recognisable pole.
    BlowUp { t: f64 },
    MaxSteps,
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Completed => f.write_str("completed"),
            Status::Singular { t } => write!(f, "singular at t = {t}"),
            Status::BlowUp { t } => write!(f, "blow-up at t = {t}"),
            Status::MaxSteps => f.write_str("max steps reached"),
        }
    }
}

/// A stored integration node: time, state and `f(t, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integration output. Nodes are sorted by increasing `t` whatever the
/// integration direction; `t_start` is the initial time.
#[derive(Debug, Clone)]
pub struct Trajectory<S = SystemSpec> {
    pub system: S,
    pub t_start: f64,
    pub nodes: Vec<Node>,
    pub status: Status,
    pub stats: Stats,
}

impl<S> Trajectory<S> {
    pub fn t_range(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    /// Node at the initial time.
    pub fn initial_node(&self) -> &Node {
        if self.nodes[0].t == self.t_start {
            &self.nodes[0]
        } else {
            &self.nodes[self.nodes.len() - 1]
        }
    }

    /// Cubic Hermite interpolation between the bracketing nodes.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let (start, end) = self.t_range();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let idx = self.nodes.partition_point(|n| n.t <= t);
        let right = idx.min(self.nodes.len() - 1);
        let left = right.saturating_sub(1);
        for i in [left, right] {
            if self.nodes[i].t == t {
                return Ok(self.nodes[i].y.clone());
            }
        }
        Ok(hermite(&self.nodes[left], &self.nodes[right], t))
    }

    /// `n ≥ 2` evenly spaced dense-output samples over the covered range.
    pub fn sample_uniform(&self, n: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let (start, end) = self.t_range();
        if n < 2 {
            return Ok(vec![(start, self.nodes[0].y.clone())]);
        }
        (0..n)
            .map(|i| {
                let t = if i == n - 1 {
                    end
                } else {
                    start + (end - start) * i as f64 / (n - 1) as f64
                };
                self.interpolate(t).map(|y| (t, y))
            })
            .collect()
    }

    /// Joins a backward run and a forward run that share their initial node.
    pub fn join(backward: Trajectory<S>, forward: Trajectory<S>) -> Result<Trajectory<S>> {
        if backward.t_start != forward.t_start || backward.initial_node() != forward.initial_node() {
            return Err(Error::InvalidConfig(
                "joined trajectories must share their initial node".into(),
            ));
        }
        let mut nodes = backward.nodes;
        let forward_from_start = if forward.nodes[0].t == forward.t_start {
            forward.nodes.into_iter().skip(1)
        } else {
            return Err(Error::InvalidConfig(
                "second trajectory must run forward in time".into(),
            ));
        };
        if nodes.last().map(|n| n.t) != Some(backward.t_start) {
            return Err(Error::InvalidConfig(
                "first trajectory must run backward in time".into(),
            ));
        }
        nodes.extend(forward_from_start);
        let status = if !backward.status.is_completed() {
            backward.status
        } else {
            forward.status
        };
        let stats = Stats {
            accepted: backward.stats.accepted + forward.stats.accepted,
            rejected: backward.stats.rejected + forward.stats.rejected,
            evaluations: backward.stats.evaluations + forward.stats.evaluations,
        };
        Ok(Trajectory {
            system: forward.system,
            t_start: forward.t_start,
            nodes,
            status,
            stats,
        })
    }
}

impl Trajectory<SystemSpec> {
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        self.nodes.iter().map(|n| State::from_phase(n.t, &n.y))
    }
}

/// Dense output of a system trajectory at time `t`.
pub fn dense_eval(trajectory: &Trajectory<SystemSpec>, t: f64) -> Result<State> {
    trajectory
        .interpolate(t)
        .map(|phase| State::from_phase(t, &phase))
}

fn hermite(a: &Node, b: &Node, t: f64) -> Vec<f64> {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..a.y.len())
        .map(|i| h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i])
        .collect()
}

/// One embedded step.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedStep {
    /// Fifth-order solution.
    pub y: Vec<f64>,
    /// `f(t + h, y)`, reused as the first stage of the next step.
    pub dy: Vec<f64>,
    /// Raw difference between the fifth- and fourth-order solutions.
    pub error: Vec<f64>,
    /// `max_i |error_i| / (atol + rtol·max(|y_i|, |y_new_i|))`.
    pub error_norm: f64,
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

fn dopri_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    dy0: &[f64],
    h: f64,
    rtol: f64,
    atol: f64,
    st: &mut Stages,
) -> Result<EmbeddedStep> {
    let n = y.len();
    st.k[0].copy_from_slice(dy0);
    let rows: [(f64, &[f64]); 6] = [
        (C2, &[A21]),
        (C3, &[A31, A32]),
        (C4, &[A41, A42, A43]),
        (C5, &[A51, A52, A53, A54]),
        (1.0, &[A61, A62, A63, A64, A65]),
        (1.0, &[A71, 0.0, A73, A74, A75, A76]),
    ];
    for (stage, (c, a)) in rows.iter().enumerate() {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, aij) in a.iter().enumerate() {
                acc += aij * st.k[j][i];
            }
            st.tmp[i] = y[i] + h * acc;
        }
        sys.eval(t + c * h, &st.tmp, &mut st.k[stage + 1]);
        if st.k[stage + 1].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteStage);
        }
    }
    // The seventh stage was evaluated at the fifth-order solution.
    let y_new = st.tmp.clone();
    let k = &st.k;
    let mut error = vec![0.0; n];
    let mut norm: f64 = 0.0;
    for i in 0..n {
        let e = h
            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                + E7 * k[6][i]);
        error[i] = e;
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        norm = norm.max(e.abs() / scale);
    }
    if y_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteStage);
    }
    Ok(EmbeddedStep {
        y: y_new,
        dy: k[6].clone(),
        error,
        error_norm: norm,
    })
}

/// A single Dormand–Prince step of size `h` from `(t, y)`.
pub fn step_system<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    h: f64,
    config: &IntegratorConfig,
) -> Result<EmbeddedStep> {
    if !(h != 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig("step size must be non-zero and finite".into()));
    }
    let mut dy0 = vec![0.0; y.len()];
    sys.eval(t, y, &mut dy0);
    if dy0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteStage);
    }
    let mut st = Stages::new(y.len());
    dopri_step(sys, t, y, &dy0, h, config.rtol, config.atol, &mut st)
}

/// One embedded 5(4) step of a model system, returning the new state and the
/// scaled error norm.
pub fn step_embedded(
    spec: &SystemSpec,
    state: &State,
    h: f64,
    config: &IntegratorConfig,
) -> Result<(State, f64)> {
    state.check_arity(spec)?;
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("step size must be positive".into()));
    }
    let step = step_system(spec, state.t, &state.phase(), h, config)?;
    Ok((State::from_phase(state.t + h, &step.y), step.error_norm))
}

/// Integrates a model system from `state0` to `t_end` (either direction).
pub fn integrate(
    spec: &SystemSpec,
    state0: &State,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory<SystemSpec>> {
    state0.check_arity(spec)?;
    integrate_system(*spec, state0.t, &state0.phase(), t_end, config)
}

fn guard_event(
    before: &[Option<f64>; 2],
    after: &[Option<f64>; 2],
    eps: f64,
) -> bool {
    before.iter().zip(after).any(|(b, a)| match (b, a) {
        (Some(b), Some(a)) => a.abs() < eps || !a.is_finite() || (a.signum() != b.signum()),
        _ => false,
    })
}

/// Estimates the pole time from a position `x`, velocity and acceleration,
/// assuming `x ~ A (t* − t)^(−p)`.
fn extrapolate_pole(t: f64, x: f64, xd: f64, xdd: f64, dir: f64) -> Option<f64> {
    if xd == 0.0 || !(x.is_finite() && xd.is_finite() && xdd.is_finite()) {
        return None;
    }
    let ratio = x * xdd / (xd * xd);
    let p = 1.0 / (ratio - 1.0);
    if !(p.is_finite() && p > 0.1 && p < 10.0) {
        return None;
    }
    let t_star = t + p * x / xd;
    ((t_star - t) * dir >= 0.0).then_some(t_star)
}

fn classify_escape<S: OdeSystem>(sys: &S, t: f64, y: &[f64], dy: &[f64], dir: f64) -> Status {
    let pairs = sys.position_velocity_pairs();
    let dominant = pairs
        .iter()
        .max_by(|a, b| y[a.0].abs().total_cmp(&y[b.0].abs()));
    match dominant.and_then(|&(p, v)| extrapolate_pole(t, y[p], y[v], dy[v], dir)) {
        Some(t_star) => Status::Singular { t: t_star },
        None => Status::BlowUp { t },
    }
}

/// Generic adaptive march; see the module docs for the event semantics.
pub fn integrate_system<S: OdeSystem>(
    sys: S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory<S>> {
    config.validate()?;
    if y0.len() != sys.dim() {
        return Err(Error::ArityMismatch {
            expected: sys.dim(),
            found: y0.len(),
        });
    }
    if !(t0.is_finite() && t_end.is_finite()) || t_end == t0 {
        return Err(Error::InvalidConfig("t_end must be finite and differ from t0".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("initial state must be finite".into()));
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let eps = config.denom_epsilon;
    let h_max = config.h_max.min(span);
    let mut h = config.h_init.unwrap_or(1e-4 * span).min(h_max);

    let mut stats = Stats::default();
    let mut dy0 = vec![0.0; y0.len()];
    sys.eval(t0, y0, &mut dy0);
    stats.evaluations += 1;
    let mut nodes = vec![Node {
        t: t0,
        y: y0.to_vec(),
        dy: dy0,
    }];
    let mut guards = sys.guards(t0, y0);
    let finish = |mut nodes: Vec<Node>, status, stats, sys| {
        if dir < 0.0 {
            nodes.reverse();
        }
        Ok(Trajectory {
            system: sys,
            t_start: t0,
            nodes,
            status,
            stats,
        })
    };
    if guards.iter().flatten().any(|g| g.abs() < eps) {
        return finish(nodes, Status::Singular { t: t0 }, stats, sys);
    }
    if nodes[0].dy.iter().any(|v| !v.is_finite()) {
        return finish(nodes, Status::BlowUp { t: t0 }, stats, sys);
    }

    let mut st = Stages::new(y0.len());
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let status = loop {
        if stats.accepted >= config.max_steps {
            break Status::MaxSteps;
        }
        let node = nodes.last().expect("nonempty");
        let (t, y, dy) = (node.t, node.y.clone(), node.dy.clone());
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            break classify_escape(&sys, t, &y, &dy, dir);
        }
        let attempt = dopri_step(&sys, t, &y, &dy, dir * h, config.rtol, config.atol, &mut st);
        stats.evaluations += 6;
        let step = match attempt {
            Ok(step) if step.error_norm <= 1.0 => step,
            Ok(step) => {
                stats.rejected += 1;
                let fac11 = step.error_norm.powf(ALPHA);
                h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
                last_rejected = true;
                continue;
            }
            Err(_) => {
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        let t_new = if last { t_end } else { t + dir * h };

        if step.y.iter().any(|c| c.abs() > config.blowup_bound) {
            break classify_escape(&sys, t_new, &step.y, &step.dy, dir);
        }

        let guards_new = sys.guards(t_new, &step.y);
        if guard_event(&guards, &guards_new, eps) {
            // Bisect the step size from the current node.
            let (mut lo, mut hi) = (0.0, h);
            let mut lo_step: Option<EmbeddedStep> = None;
            while hi - lo > EVENT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let probe = dopri_step(&sys, t, &y, &dy, dir * mid, config.rtol, config.atol, &mut st);
                stats.evaluations += 6;
                match probe {
                    Ok(p) if !guard_event(&guards, &sys.guards(t + dir * mid, &p.y), eps) => {
                        lo = mid;
                        lo_step = Some(p);
                    }
                    _ => hi = mid,
                }
            }
            if let Some(p) = lo_step {
                stats.accepted += 1;
                nodes.push(Node {
                    t: t + dir * lo,
                    y: p.y,
                    dy: p.dy,
                });
            }
            break Status::Singular { t: t + dir * hi };
        }

        stats.accepted += 1;
        nodes.push(Node {
            t: t_new,
            y: step.y,
            dy: step.dy,
        });
        guards = guards_new;
        if last {
            break Status::Completed;
        }

        let err = step.error_norm;
        let fac11 = err.powf(ALPHA);
        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;
        if last_rejected {
            h_new = h_new.min(h);
        }
        fac_old = err.max(1e-4);
        last_rejected = false;
        h = h_new.min(h_max);
    };
    finish(nodes, status, stats, sys)
}
