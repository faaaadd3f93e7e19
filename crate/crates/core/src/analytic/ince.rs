//! Linearisation of `w'' + 3ww' + w³ = q(t)` through `w = u'/u`, `u''' = q u`.

use crate::error::{Error, Result};
use crate::integrate::{integrate_system, IntegratorConfig, OdeSystem};

/// `(u, u', u'')' = (u', u'', q(t) u)`.
pub struct ThirdOrderLinear<'a, Q> {
    pub q: &'a Q,
}

impl<Q> Clone for ThirdOrderLinear<'_, Q> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<Q> Copy for ThirdOrderLinear<'_, Q> {}

impl<Q: Fn(f64) -> f64> OdeSystem for ThirdOrderLinear<'_, Q> {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = (self.q)(t) * y[0];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InceOptions {
    /// Uniform sample count over the window, endpoints included.
    pub samples: usize,
    pub exclusion_radius: f64,
    pub config: IntegratorConfig,
}

impl Default for InceOptions {
    fn default() -> Self {
        Self {
            samples: 401,
            exclusion_radius: 1e-3,
            config: IntegratorConfig::default().with_tolerances(1e-12, 1e-14),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InceReport {
    /// Max residual with `w''` from the exact derivative cascade.
    pub cascade_residual: f64,
    /// Max residual with `w'` and `w''` from finite differences of the `w` samples.
    /// `None` when no sample has a full stencil clear of the zeros of `u`.
    pub fd_residual: Option<f64>,
    pub zeros: Vec<f64>,
    pub samples: Vec<InceSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InceSample {
    pub t: f64,
    pub u: [f64; 3],
    pub excluded: bool,
}

/// Integrates `u''' = q u` from `u0` over `tspan` and checks that `w = u'/u`
/// solves the nonlinear equation.
pub fn ince_linearization_oracle<Q>(q: Q, u0: [f64; 3], tspan: (f64, f64), options: &InceOptions) -> Result<InceReport>
where
    Q: Fn(f64) -> f64,
{
    let (t0, t1) = tspan;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidConfig("window must satisfy t0 < t1".into()));
    }
    if options.samples < 5 {
        return Err(Error::InvalidConfig("at least 5 samples are required".into()));
    }
    let n = options.samples;
    let delta = (t1 - t0) / (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|i| if i + 1 == n { t1 } else { t0 + delta * i as f64 }).collect();

    let sys = ThirdOrderLinear { q: &q };
    let mut samples = vec![InceSample { t: t0, u: u0, excluded: false }];
    for pair in times.windows(2) {
        let prev = samples.last().expect("nonempty").u;
        let traj = integrate_system(sys, pair[0], &prev, pair[1], &options.config)?;
        if !traj.status.is_completed() {
            return Err(Error::InvalidConfig(format!(
                "linear integration stopped: {}",
                traj.status
            )));
        }
        let last = traj.nodes.last().expect("nonempty");
        samples.push(InceSample {
            t: pair[1],
            u: [last.y[0], last.y[1], last.y[2]],
            excluded: false,
        });
    }

    let zeros = locate_zeros(&samples);
    for s in &mut samples {
        s.excluded = zeros.iter().any(|z| (s.t - z).abs() < options.exclusion_radius);
    }
    if samples.iter().all(|s| s.excluded) {
        return Err(Error::ZeroCrossing { t: zeros[0] });
    }

    let w: Vec<f64> = samples.iter().map(|s| s.u[1] / s.u[0]).collect();
    let mut cascade = 0.0_f64;
    for (s, &wi) in samples.iter().zip(&w) {
        if s.excluded {
            continue;
        }
        let qt = q(s.t);
        let ratio2 = s.u[2] / s.u[0];
        let w1 = ratio2 - wi * wi;
        // w'' = u'''/u − (u''/u) w − 2 w w', with u''' = q u.
        let w2 = qt - ratio2 * wi - 2.0 * wi * w1;
        cascade = cascade.max((w2 + 3.0 * wi * w1 + wi * wi * wi - qt).abs());
    }

    let mut fd: Option<f64> = None;
    for i in 2..n - 2 {
        if samples[i - 2..=i + 2].iter().any(|s| s.excluded) {
            continue;
        }
        let w1 = (-w[i + 2] + 8.0 * w[i + 1] - 8.0 * w[i - 1] + w[i - 2]) / (12.0 * delta);
        let w2 = (-w[i + 2] + 16.0 * w[i + 1] - 30.0 * w[i] + 16.0 * w[i - 1] - w[i - 2]) / (12.0 * delta * delta);
        let r = (w2 + 3.0 * w[i] * w1 + w[i].powi(3) - q(samples[i].t)).abs();
        fd = Some(fd.map_or(r, |m| m.max(r)));
    }

    Ok(InceReport {
        cascade_residual: cascade,
        fd_residual: fd,
        zeros,
        samples,
    })
}

// Zeros of u from sign changes between samples, refined by bisection on the
// cubic Hermite interpolant of (u, u').
fn locate_zeros(samples: &[InceSample]) -> Vec<f64> {
    let mut zeros = Vec::new();
    for (i, pair) in samples.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if a.u[0] == 0.0 {
            zeros.push(a.t);
            continue;
        }
        if i + 2 == samples.len() && b.u[0] == 0.0 {
            zeros.push(b.t);
        }
        if a.u[0] * b.u[0] >= 0.0 {
            continue;
        }
        let h = b.t - a.t;
        let hermite = |t: f64| {
            let s = (t - a.t) / h;
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            h00 * a.u[0] + h10 * h * a.u[1] + h01 * b.u[0] + h11 * h * b.u[1]
        };
        let (mut lo, mut hi) = (a.t, b.t);
        let lo_sign = a.u[0].signum();
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hermite(mid).signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(0.5 * (lo + hi));
    }
    zeros
}
