use anyhow::Result;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use riccati_dyn::analytic::{ince_linearization_oracle, InceOptions};
use riccati_dyn::conserved::{
    anisotropic_1_2_integrals, drift_report, energy, isotropic_integrals, ixw, k_functions, kij_constant, rate_along,
    t_generators, IntegralId, IntegralValue, ResonantOscillator,
};
use riccati_dyn::hamiltonian::{
    canonical_qp, hamiltonian_osc, hamiltonian_u, momentum, poisson_bracket_check, OscillatorHamiltonFlow,
};
use riccati_dyn::integrate::{dense_eval, integrate_system};
use riccati_dyn::model::{alternative_lagrangian, euler_lagrange_residual};
use riccati_dyn::{integrate, IntegratorConfig, QuadraticU, State, System1D, SystemSpec, Trajectory};

use crate::args::{SystemArgs, SystemKind};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Energy,
    Generators,
    SuperintDissipative,
    SuperintOscillator,
    Hamiltonian,
    Linearization,
    AltLagrangian,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

pub struct VerifyContext<'a> {
    pub system: &'a SystemArgs,
    pub config: IntegratorConfig,
    pub window: f64,
    pub seed: u64,
}

pub fn run(suite: Suite, ctx: &VerifyContext) -> Result<Report> {
    let checks = match suite {
        Suite::Energy => energy_suite(ctx)?,
        Suite::Generators => generators_suite(ctx)?,
        Suite::SuperintDissipative => dissipative_suite(ctx)?,
        Suite::SuperintOscillator => oscillator_suite(ctx)?,
        Suite::Hamiltonian => hamiltonian_suite(ctx)?,
        Suite::Linearization => linearization_suite()?,
        Suite::AltLagrangian => alt_lagrangian_suite(ctx)?,
    };
    let suite = suite.to_possible_value().expect("named suite").get_name().to_string();
    Ok(Report { suite, checks })
}

fn drift(id: IntegralId, traj: &Trajectory) -> Result<f64> {
    let r = drift_report(id, traj, f64::INFINITY)?;
    Ok(if r.gaps.is_empty() { r.drift } else { f64::INFINITY })
}

fn energy_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut cases: Vec<(&str, SystemSpec, State)> = Vec::new();
    while cases.len() < 5 {
        let k = rng.gen_range(0.5..2.0);
        let (x, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..2.0));
        if v + k * x * x > 0.3 && 2.0 * v + k * x * x > 0.1 {
            cases.push(("cubic", SystemSpec::cubic(k), State::new_1d(0.0, x, v)));
        }
    }
    while cases.len() < 10 {
        let (k, w) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..2.0));
        let (x, v) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let regular = ixw(k, w, x, v, EPS).map(|e| e * k * k < 0.8).unwrap_or(false);
        if regular && k * v + k * k * x * x + w * w > 0.2 {
            cases.push(("oscillator", SystemSpec::oscillator(k, w), State::new_1d(0.0, x, v)));
        }
    }
    while cases.len() < 15 {
        let u = QuadraticU::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        let k = rng.gen_range(0.5..1.5);
        let (x, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..1.5));
        if v + k * u.value(x) > 0.3 && 2.0 * v + k * u.value(x) > 0.1 {
            cases.push(("general-u", SystemSpec::general_u(u, k), State::new_1d(0.0, x, v)));
        }
    }
    while cases.len() < 20 {
        let (k1, k2) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5));
        let spec = SystemSpec::product(System1D::CubicRiccati { k: k1 }, System1D::CubicRiccati { k: k2 });
        let s = State::new_2d(
            0.0,
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.3..2.0),
        );
        cases.push(("2d-cubic", spec, s));
    }

    let mut checks = Vec::new();
    for (i, (kind, spec, s0)) in cases.iter().enumerate() {
        let traj = integrate(spec, s0, ctx.window, &ctx.config)?;
        if !traj.status.is_completed() {
            continue;
        }
        let mut worst = drift(IntegralId::EnergyEL, &traj)?;
        if spec.dof() == 2 {
            worst = worst.max(drift(IntegralId::EnergyI1, &traj)?).max(drift(IntegralId::EnergyI2, &traj)?);
        }
        checks.push(check(format!("energy drift, case {i} ({kind})"), worst, 1e-8));
    }
    if checks.is_empty() {
        checks.push(check("completed trajectories", f64::INFINITY, 0.0));
    }
    Ok(checks)
}

fn generators_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let k = ctx.system.k;
    let spec = SystemSpec::cubic(k);
    let h = 1e-4;
    let (mut rate2, mut rate1, mut j1, mut j2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for &(x0, v0) in &[(0.0, 2.0), (0.5, 0.3), (-1.0, 1.5)] {
        let traj = integrate(&spec, &State::new_1d(0.0, x0, v0), ctx.window, &ctx.config)?;
        let (lo, hi) = traj.t_range();
        let gen = |s: &State| t_generators(k, s.q[0], s.v[0], EPS);
        for t in traj.nodes.iter().map(|n| n.t).filter(|t| *t - 2.0 * h > lo && *t + 2.0 * h < hi) {
            let here = gen(&dense_eval(&traj, t)?)?;
            let d2 = rate_along(&traj, t, h, |s| gen(s).map(|g| g.1))?;
            let d1 = rate_along(&traj, t, h, |s| gen(s).map(|g| g.0))?;
            rate2 = rate2.max((d2 - 1.0).abs());
            rate1 = rate1.max((d1 - k * here.1).abs());
        }
        j1 = j1.max(drift(IntegralId::Jx1t, &traj)?);
        j2 = j2.max(drift(IntegralId::Jx2t, &traj)?);
    }
    Ok(vec![
        check("|dTx2/dt - 1|", rate2, 1e-6),
        check("|dTx1/dt - k Tx2|", rate1, 1e-6),
        check("Jx1t drift", j1, 1e-7),
        check("Jx2t drift", j2, 1e-7),
    ])
}

fn dissipative_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let mut args = ctx.system.clone();
    args.system = SystemKind::Cubic2d;
    if args.x0.is_none() && args.v0.is_none() {
        args.e1 = args.e1.or(Some(-1.0));
    }
    if args.y0.is_none() && args.vy0.is_none() {
        args.e2 = args.e2.or(Some(-5.0));
    }
    let spec = args.spec()?;
    let s0 = args.initial_state()?;
    let fwd = integrate(&spec, &s0, ctx.window, &ctx.config)?;
    let bwd = integrate(&spec, &s0, -ctx.window, &ctx.config)?;
    let completed = fwd.status.is_completed() && bwd.status.is_completed();
    let traj = Trajectory::join(bwd, fwd)?;
    let ends = [&traj.nodes[0].y, &traj.nodes[traj.nodes.len() - 1].y]
        .iter()
        .flat_map(|y| [y[0].abs(), y[2].abs()])
        .fold(0.0, f64::max);
    let mut checks = vec![check(
        "trajectory completed",
        if completed { 0.0 } else { 1.0 },
        0.0,
    )];
    for (name, id) in [
        ("I1 drift", IntegralId::EnergyI1),
        ("I2 drift", IntegralId::EnergyI2),
        ("I3 drift", IntegralId::I3Dissipative),
        ("I4 drift", IntegralId::I4Dissipative),
    ] {
        checks.push(check(name, drift(id, &traj)?, 1e-7));
    }
    let end_check = Check {
        name: "max |x|,|y| at window ends".into(),
        value: ends,
        tolerance: 0.05,
        pass: ends < 0.05,
    };
    checks.push(end_check);
    Ok(checks)
}

fn component_drift(id: IntegralId, traj: &Trajectory) -> Result<(f64, f64)> {
    let r = drift_report(id, traj, f64::INFINITY)?;
    if !r.gaps.is_empty() || r.samples.is_empty() {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let first = r.samples[0].1.as_complex();
    Ok(r.samples.iter().fold((0.0, 0.0), |(re, im), (_, v): &(f64, IntegralValue)| {
        let z = v.as_complex();
        (f64::max(re, (z.re - first.re).abs()), f64::max(im, (z.im - first.im).abs()))
    }))
}

fn regular_state(rng: &mut ChaCha8Rng, osc: &ResonantOscillator) -> State {
    loop {
        let s = State::new_2d(
            0.0,
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        );
        let ok = [(osc.k1, osc.w1(), 0), (osc.k2, osc.w2(), 1)].iter().all(|&(k, w, i)| {
            let (x, v) = s.axis(i);
            k * v + k * k * x * x + w * w > 0.2 && ixw(k, w, x, v, EPS).map(|e| e * k * k < 0.8).unwrap_or(false)
        });
        if ok {
            return s;
        }
    }
}

fn oscillator_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let mut args = ctx.system.clone();
    args.system = SystemKind::Oscillator2d;
    if args.x0.is_none() && args.v0.is_none() {
        args.e1 = args.e1.or(Some(0.2));
    }
    if args.y0.is_none() && args.vy0.is_none() {
        args.e2 = args.e2.or(Some(0.2));
    }
    let osc = args.resonant()?;
    let s0 = args.initial_state()?;
    let period = std::f64::consts::TAU / osc.w0;
    let traj = integrate(&osc.spec(), &s0, 2.0 * period, &ctx.config)?;
    let (n1, n2) = (osc.n1, osc.n2);
    let mut checks = vec![check(
        "trajectory completed",
        if traj.status.is_completed() { 0.0 } else { 1.0 },
        0.0,
    )];
    let (re, im) = component_drift(IntegralId::Kij(n1, n2), &traj)?;
    checks.push(check(format!("Re K_{n1}{n2} drift (I4)"), re, 1e-7));
    checks.push(check(format!("Im K_{n1}{n2} drift (I3)"), im, 1e-7));
    for (name, id) in [
        ("|K1|^2 drift", IntegralId::K1),
        ("|K2|^2 drift", IntegralId::K2),
        ("I1 drift", IntegralId::EnergyI1),
        ("I2 drift", IntegralId::EnergyI2),
    ] {
        checks.push(check(name, drift(id, &traj)?, 1e-7));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    type Printed = fn(f64, f64, f64, &State) -> (f64, f64);
    let printed: [(&str, u32, Printed); 2] = [
        ("isotropic", 1, isotropic_integrals),
        ("1:2", 2, anisotropic_1_2_integrals),
    ];
    for (label, m, formula) in printed {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (k1, k2, w0) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5));
            let osc = ResonantOscillator::new(k1, k2, w0, 1, m)?;
            let s = regular_state(&mut rng, &osc);
            let (a, b) = k_functions(&osc, &s, EPS)?;
            let kij = kij_constant(a, b, 1, m);
            let (i3, i4) = formula(k1, k2, w0, &s);
            worst = worst
                .max((i4 - kij.re).abs() / i4.abs().max(1.0))
                .max((i3 - kij.im / (m as f64 * w0)).abs() / i3.abs().max(1.0));
        }
        checks.push(check(format!("printed {label} I3/I4 vs K_1{m}"), worst, 1e-12));
    }
    Ok(checks)
}

fn hamiltonian_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut h_u, mut h_osc, mut qp, mut bracket): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut n = 0;
    while n < 200 {
        let u = QuadraticU::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let k = rng.gen_range(0.5..2.0);
        let (x, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..2.0));
        if v + k * u.value(x) < 0.2 {
            continue;
        }
        let spec = SystemSpec::general_u(u, k);
        let s = State::new_1d(0.0, x, v);
        let p = momentum(&spec, &s, EPS)?;
        let e = energy(&spec, &s, EPS)?;
        h_u = h_u.max((hamiltonian_u(&u, k, x, p)? - e).abs() / e.abs().max(1.0));
        n += 1;
    }
    n = 0;
    while n < 200 {
        let (k, w) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let (x, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if k * v + k * k * x * x + w * w < 0.2 {
            continue;
        }
        let p = momentum(&SystemSpec::oscillator(k, w), &State::new_1d(0.0, x, v), EPS)?;
        let h = hamiltonian_osc(k, w, x, p)?;
        h_osc = h_osc.max((h - ixw(k, w, x, v, EPS)?).abs() / h.abs().max(1.0));
        let (q, pp) = canonical_qp(k, w, x, p)?;
        qp = qp.max((0.5 * (pp * pp + w * w * q * q) - h).abs() / h.abs().max(1.0));
        if n < 100 {
            bracket = bracket.max((poisson_bracket_check(k, w, x, p, 1e-6)? - 1.0).abs());
        }
        n += 1;
    }

    let (k, w) = (1.0, 1.0);
    let spec = SystemSpec::oscillator(k, w);
    let start = State::new_1d(0.0, 0.0, 1.0);
    let p0 = momentum(&spec, &start, EPS)?;
    let period = std::f64::consts::TAU / w;
    let ham = integrate_system(OscillatorHamiltonFlow { k, w }, 0.0, &[0.0, p0], period, &ctx.config)?;
    let lag = integrate(&spec, &start, period, &ctx.config)?;
    let mut track: f64 = if ham.status.is_completed() && lag.status.is_completed() { 0.0 } else { f64::INFINITY };
    for i in 0..=100 {
        let t = period * i as f64 / 100.0;
        track = track.max((ham.interpolate(t)?[0] - dense_eval(&lag, t)?.q[0]).abs());
    }

    Ok(vec![
        check("|H_U(x, p(x, v)) - E_L|", h_u, 1e-12),
        check("|H_osc(x, p(x, v)) - I_XW|", h_osc, 1e-12),
        check("|(P^2 + w^2 Q^2)/2 - H_osc|", qp, 1e-12),
        check("|{Q, P} - 1|", bracket, 1e-6),
        check("Hamilton vs Lagrange flow, max |dx| over one period", track, 1e-6),
    ])
}

fn linearization_suite() -> Result<Vec<Check>> {
    let opts = InceOptions::default();
    let runs: [(&str, &dyn Fn(f64) -> f64, [f64; 3]); 3] = [
        ("q = 0", &|_| 0.0, [1.0, 0.0, 0.0]),
        ("q = 1", &|_| 1.0, [1.0, 1.0, 1.0]),
        ("q = cos t", &f64::cos, [1.0, 0.0, 0.0]),
    ];
    let mut checks = Vec::new();
    for (label, q, u0) in runs {
        let r = ince_linearization_oracle(q, u0, (0.0, 2.0), &opts)?;
        checks.push(check(format!("{label}: cascade residual"), r.cascade_residual, 1e-6));
        checks.push(check(
            format!("{label}: finite-difference residual"),
            r.fd_residual.unwrap_or(f64::INFINITY),
            1e-6,
        ));
    }
    Ok(checks)
}

fn alt_lagrangian_suite(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let axis = System1D::CubicRiccati { k: ctx.system.k };
    let spec = SystemSpec::Single(axis);
    let mut checks = Vec::new();
    for &(x0, v0) in &[(0.0, 2.0), (0.5, 0.3), (-1.0, 1.5)] {
        let traj = integrate(&spec, &State::new_1d(0.0, x0, v0), ctx.window.min(5.0), &ctx.config)?;
        let mut worst: f64 = 0.0;
        for s in traj.states() {
            let a = axis.acceleration(s.q[0], s.v[0]);
            let r = euler_lagrange_residual(|x, v| alternative_lagrangian(&axis, x, v), &s, a, 1e-5)?;
            worst = worst.max(r.abs());
        }
        checks.push(check(format!("L2 Euler-Lagrange residual from ({x0}, {v0})"), worst, 1e-6));
    }
    Ok(checks)
}
