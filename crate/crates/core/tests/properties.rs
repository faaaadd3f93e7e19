use proptest::prelude::*;

use riccati_dyn::analytic::{
    cubic_solution, cubic_velocity, oscillator_solution, quadrature_time, velocity_branches, Branch, CubicSolution,
};
use riccati_dyn::conserved::{
    axis_energy, energy_2d, evaluate_integral, ixw, k_functions, kij_constant, rescaled_oscillator_energy, xw_pair,
    IntegralId, ResonantOscillator,
};
use riccati_dyn::hamiltonian::{canonical_qp, hamiltonian_osc, hamiltonian_u, momentum, poisson_bracket_check};
use riccati_dyn::integrate::{integrate, step_embedded, IntegratorConfig};
use riccati_dyn::model::{
    euler_lagrange_residual, riccati_coefficients, QuadraticU, State, System1D, SystemSpec,
};

const EPS: f64 = 1e-12;

fn quadratic() -> impl Strategy<Value = QuadraticU> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| QuadraticU::new(a, b, c))
}

fn cubic_accel(k: f64, e: f64, t: f64) -> f64 {
    let d = k * t * t - e;
    4.0 * k * t * (k * t * t + 3.0 * e) / (d * d * d)
}

proptest! {
    #[test]
    fn riccati_map_reproduces_force(u in quadratic(), x in -2.0..2.0f64, v in -2.0..2.0f64) {
        let c = riccati_coefficients(&u);
        let sys = System1D::GeneralU { u, k: 1.0 };
        let a = sys.acceleration(x, v);
        prop_assert!((c.acceleration(x, v) - a).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn oscillator_is_a_general_u_member(k in 0.2..2.0f64, w in 0.2..2.0f64, x in -2.0..2.0f64, v in -2.0..2.0f64) {
        let osc = System1D::NonlinearOscillator { k, w };
        let (u, kk, _) = osc.reciprocal_form().unwrap();
        let general = System1D::GeneralU { u, k: kk };
        let a = osc.acceleration(x, v);
        prop_assert!((general.acceleration(x, v) - a).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn reciprocal_lagrangian_satisfies_euler_lagrange(u in quadratic(), k in 0.3..1.5f64, x in -1.0..1.0f64, v in -1.0..2.0f64) {
        let sys = System1D::GeneralU { u, k };
        prop_assume!(sys.denominator(x, v).abs() > 0.5);
        let lag = |xx: f64, vv: f64| Ok(1.0 / sys.denominator(xx, vv));
        let d = sys.denominator(x, v);
        let r = euler_lagrange_residual(lag, &State::new_1d(0.0, x, v), sys.acceleration(x, v), 1e-5).unwrap();
        prop_assert!(r.abs() <= 1e-6 * (1.0 + 1.0 / (d * d * d).abs()), "{r}");
    }

    #[test]
    fn energy_total_is_sum(x in -1.0..1.0f64, vx in 0.5..2.0f64, y in -1.0..1.0f64, vy in 0.5..2.0f64) {
        let spec = SystemSpec::product(System1D::CubicRiccati { k: 1.0 }, System1D::CubicRiccati { k: 0.5 });
        let (e, i1, i2) = energy_2d(&spec, &State::new_2d(0.0, x, vx, y, vy), EPS).unwrap();
        prop_assert_eq!(e, i1 + i2);
    }

    #[test]
    fn xw_linear_relation(k in 0.2..2.0f64, w in 0.2..2.0f64, x in -2.0..2.0f64, v in -2.0..2.0f64) {
        prop_assume!((k * v + k * k * x * x + w * w).abs() > 1e-3);
        let (xx, ww) = xw_pair(k, w, x, v, EPS).unwrap();
        prop_assert!((w * w * xx + k * x * ww - x).abs() <= 1e-14 * (1.0 + x.abs()) * 8.0);
    }

    #[test]
    fn rescaled_energy_is_ixw(k in 0.3..2.0f64, w in 0.3..2.0f64, x in -1.0..1.0f64, v in -1.0..1.0f64) {
        prop_assume!((k * v + k * k * x * x + w * w).abs() > 0.1);
        let a = rescaled_oscillator_energy(k, w, x, v, EPS).unwrap();
        let b = ixw(k, w, x, v, EPS).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + 1.0 / (k * k)) * 10.0, "{a} {b}");
    }

    #[test]
    fn k_modulus_is_axis_ixw(x in -0.5..0.5f64, vx in -0.5..0.5f64, y in -0.5..0.5f64, vy in -0.5..0.5f64) {
        let osc = ResonantOscillator::new(1.0, 0.8, 1.0, 1, 2).unwrap();
        let s = State::new_2d(0.0, x, vx, y, vy);
        let (a, b) = k_functions(&osc, &s, EPS).unwrap();
        prop_assert!((a.norm_sqr() - ixw(1.0, 1.0, x, vx, EPS).unwrap()).abs() < 1e-14);
        prop_assert!((b.norm_sqr() - ixw(0.8, 2.0, y, vy, EPS).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn isotropic_k12_swap_antisymmetry(x in -0.5..0.5f64, vx in -0.5..0.5f64, y in -0.5..0.5f64, vy in -0.5..0.5f64) {
        let osc = ResonantOscillator::new(1.0, 1.0, 1.0, 1, 1).unwrap();
        let (a, b) = k_functions(&osc, &State::new_2d(0.0, x, vx, y, vy), EPS).unwrap();
        let (c, d) = k_functions(&osc, &State::new_2d(0.0, y, vy, x, vx), EPS).unwrap();
        prop_assert!((kij_constant(a, b, 1, 1).im + kij_constant(c, d, 1, 1).im).abs() < 1e-15);
        let (e, f) = k_functions(&osc, &State::new_2d(0.0, x, vx, x, vx), EPS).unwrap();
        prop_assert_eq!(kij_constant(e, f, 1, 1).im, 0.0);
    }

    #[test]
    fn cubic_closed_form_solves_equation(t in -5.0..5.0f64, case in 0usize..3) {
        let (k, e) = [(1.0, -1.0), (-1.0, 1.0), (2.0, -3.0)][case];
        let x = cubic_solution(k, e, t).unwrap();
        let v = cubic_velocity(k, e, t).unwrap();
        let a = cubic_accel(k, e, t);
        prop_assert!((a + 3.0 * k * x * v + k * k * x * x * x).abs() <= 1e-10);
        let en = axis_energy(&System1D::CubicRiccati { k }, x, v, EPS).unwrap();
        prop_assert!((en - e).abs() <= 1e-10);
    }

    #[test]
    fn oscillator_closed_form_is_periodic(k in 0.3..1.5f64, w in 0.3..2.0f64, frac in 0.05..0.95f64, phi in -3.0..3.0f64, t in -5.0..5.0f64) {
        let e = frac / (k * k);
        let (x, v) = oscillator_solution(k, w, e, phi, t).unwrap();
        let (x2, v2) = oscillator_solution(k, w, e, phi, t + std::f64::consts::TAU / w).unwrap();
        let scale = 1.0 + x.abs() + v.abs();
        prop_assert!((x - x2).abs() <= 1e-12 * scale * 10.0 && (v - v2).abs() <= 1e-12 * scale * 10.0);
        let a = riccati_dyn::fd::derivative(|s| oscillator_solution(k, w, e, phi, s).map(|p| p.1), t, 1e-3).unwrap();
        let sys = System1D::NonlinearOscillator { k, w };
        let res = a - sys.acceleration(x, v);
        prop_assert!(res.abs() <= 1e-6 * (1.0 + a.abs()), "{res}");
        prop_assert!((ixw(k, w, x, v, EPS).unwrap() - e).abs() <= 1e-12 * (1.0 + e) * 10.0);
    }

    #[test]
    fn cubic_translation_roundtrip(tau in -4.0..4.0f64, t0 in -3.0..3.0f64) {
        let base = CubicSolution::normalized(1.0, -1.0);
        let s = base.state(tau).unwrap();
        prop_assume!(s.q[0].abs() > 1e-3);
        let sol = CubicSolution::through(1.0, s.q[0], s.v[0], t0).unwrap();
        let back = sol.state(t0 + 0.5).unwrap();
        let expect = base.state(tau + 0.5).unwrap();
        prop_assert!((back.q[0] - expect.q[0]).abs() < 1e-9);
    }

    #[test]
    fn branch_speeds_differ_off_turning_points(x in -0.99..0.99f64, e in -1.0..-0.01f64) {
        prop_assume!(x.abs() > 0.05);
        let sys = System1D::CubicRiccati { k: 1.0 };
        let (vp, vm) = velocity_branches(&sys, x, e).unwrap();
        prop_assert!(vp.abs() != vm.abs());
        for v in [vp, vm] {
            prop_assert!((axis_energy(&sys, x, v, 1e-14).unwrap() - e).abs() <= 1e-10 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn quadrature_matches_closed_form(t0 in 0.05..0.8f64, t1 in 0.1..0.95f64) {
        prop_assume!((t1 - t0).abs() > 1e-3);
        let x0 = cubic_solution(1.0, -1.0, t0).unwrap();
        let x1 = cubic_solution(1.0, -1.0, t1).unwrap();
        let dt = quadrature_time(&System1D::CubicRiccati { k: 1.0 }, -1.0, x0, x1, Branch::Minus).unwrap();
        prop_assert!((dt - (t1 - t0)).abs() < 1e-8, "{dt} vs {}", t1 - t0);
    }

    #[test]
    fn hamiltonian_u_is_energy(u in quadratic(), k in 0.3..2.0f64, x in -1.0..1.0f64, d in 0.1..3.0f64) {
        let v = d - k * u.value(x);
        let spec = SystemSpec::general_u(u, k);
        let s = State::new_1d(0.0, x, v);
        let p = momentum(&spec, &s, EPS).unwrap();
        prop_assert!(p < 0.0);
        let e = axis_energy(spec.as_single().unwrap(), x, v, EPS).unwrap();
        prop_assert!((hamiltonian_u(&u, k, x, p).unwrap() - e).abs() <= 1e-12 * (1.0 + e.abs()));
    }

    #[test]
    fn oscillator_canonical_map(k in 0.3..2.0f64, w in 0.3..2.0f64, x in -1.0..1.0f64, v in -1.0..1.0f64) {
        prop_assume!(k * v + k * k * x * x + w * w > 0.1);
        let p = momentum(&SystemSpec::oscillator(k, w), &State::new_1d(0.0, x, v), EPS).unwrap();
        let h = hamiltonian_osc(k, w, x, p).unwrap();
        let scale = 1.0 + 1.0 / (k * k);
        prop_assert!((h - ixw(k, w, x, v, EPS).unwrap()).abs() <= 1e-12 * scale);
        let (q, pp) = canonical_qp(k, w, x, p).unwrap();
        prop_assert!((0.5 * (pp * pp + w * w * q * q) - h).abs() <= 1e-12 * scale);
        prop_assert!((poisson_bracket_check(k, w, x, p, 1e-6).unwrap() - 1.0).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cubic_trajectories_decay_and_conserve(x in -1.0..1.0f64, v in 0.5..2.0f64) {
        let spec = SystemSpec::cubic(1.0);
        let traj = integrate(&spec, &State::new_1d(0.0, x, v), 100.0, &IntegratorConfig::default()).unwrap();
        prop_assert!(traj.status.is_completed());
        prop_assert!(traj.nodes.last().unwrap().y[0].abs() < 0.05);
        prop_assert!(traj.nodes.windows(2).all(|w| w[0].t < w[1].t));
        let e0 = evaluate_integral(IntegralId::EnergyEL, &spec, &State::new_1d(0.0, x, v), EPS).unwrap();
        for s in traj.states().filter(|s| s.t <= 10.0) {
            let e = evaluate_integral(IntegralId::EnergyEL, &spec, &s, EPS).unwrap();
            prop_assert!(e.distance(&e0) <= 1e-7);
        }
    }

    #[test]
    fn dense_output_is_exact_at_nodes(x in -1.0..1.0f64, v in 0.5..2.0f64, back in proptest::bool::ANY) {
        let spec = SystemSpec::cubic(1.0);
        let t_end = if back { -3.0 } else { 3.0 };
        let traj = integrate(&spec, &State::new_1d(0.0, x, v), t_end, &IntegratorConfig::default()).unwrap();
        for n in &traj.nodes {
            prop_assert_eq!(&traj.interpolate(n.t).unwrap(), &n.y);
        }
    }

    #[test]
    fn oscillator_trajectory_follows_closed_form(k in 0.5..1.5f64, w in 0.5..2.0f64, frac in 0.05..0.8f64, phi in -3.0..3.0f64) {
        let e = frac / (k * k);
        let (x, v) = oscillator_solution(k, w, e, phi, 0.0).unwrap();
        let spec = SystemSpec::oscillator(k, w);
        let traj = integrate(&spec, &State::new_1d(0.0, x, v), std::f64::consts::TAU / w, &IntegratorConfig::default()).unwrap();
        prop_assert!(traj.status.is_completed());
        for n in &traj.nodes {
            let (xe, _) = oscillator_solution(k, w, e, phi, n.t).unwrap();
            prop_assert!((n.y[0] - xe).abs() < 1e-6);
        }
    }

    #[test]
    fn single_step_error_shrinks_with_fifth_power(x in -1.0..1.0f64, v in 0.5..2.0f64) {
        let spec = SystemSpec::cubic(1.0);
        let s = State::new_1d(0.0, x, v);
        let sol = CubicSolution::through(1.0, x, v, 0.0).unwrap();
        let err = |h: f64| {
            let (next, _) = step_embedded(&spec, &s, h, &IntegratorConfig::default()).unwrap();
            (next.q[0] - sol.position(h).unwrap()).abs()
        };
        // Sup of err/h^5 over [h/2, h], so a cancellation at one step size cannot skew it.
        let scaled = |h: f64| (0..=8).map(|i| h * (1.0 - i as f64 / 16.0)).map(|h| err(h) / h.powi(5)).fold(0.0, f64::max);
        let (coarse, fine) = (scaled(0.1), scaled(0.025));
        prop_assert!(fine <= 1.5 * coarse + 1e-15 / 0.0125f64.powi(5), "err/h^5: {coarse:e} -> {fine:e}");
    }
}
