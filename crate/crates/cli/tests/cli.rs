use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use riccati_dyn::conserved::{evaluate_integral, IntegralId};
use riccati_dyn::{State, System1D, SystemSpec};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_riccati-dyn"));
    cmd.env_remove("RICCATI_DYN_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn riccati-dyn")
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cubic_started_by_energy_reaches_one_at_unit_time() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cubic.csv");
    let out = run(&[
        "simulate", "--system", "cubic", "--k", "1", "--E", "-1", "--t-end", "10", "--samples", "11", "--out",
        csv.to_str().unwrap(), "--svg",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("completed"));
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "t,x,v");
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!((r[1] - 2.0 * r[0] / (r[0] * r[0] + 1.0)).abs() < 1e-8);
    }
    assert!((rows[1][1] - 1.0).abs() < 1e-8);
    assert!(dir.path().join("cubic.svg").exists());
}

#[test]
fn positive_cubic_energy_is_singular_at_one() {
    let out = run(&["simulate", "--system", "cubic", "--k", "1", "--E", "1", "--t-end", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let t: f64 = stderr.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(stderr.contains("singular") && (t - 1.0).abs() < 1e-4, "{stderr}");
}

#[test]
fn oscillator_column_is_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("osc.csv");
    let out = run(&[
        "simulate", "--system", "oscillator", "--k", "1", "--w", "1", "--E", "0.2", "--t-end", "20", "--samples",
        "2001", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&csv);
    let at = |t: f64| rows.iter().min_by(|a, b| (a[0] - t).abs().total_cmp(&(b[0] - t).abs())).unwrap();
    let amp = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    assert!(amp > 0.1 && amp < 1.0);
    // Zero crossings are 2π apart up to sampling resolution.
    let crossings: Vec<f64> = rows.windows(2).filter(|w| w[0][1] < 0.0 && w[1][1] >= 0.0).map(|w| w[1][0]).collect();
    for pair in crossings.windows(2) {
        assert!((pair[1] - pair[0] - std::f64::consts::TAU).abs() < 0.02);
    }
    assert!(at(0.0)[1].abs() < 1e-12);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--E", "1", "--v0", "2"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--svg"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--system", "cubic"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn every_suite_passes() {
    for suite in [
        "energy",
        "generators",
        "superint-dissipative",
        "superint-oscillator",
        "hamiltonian",
        "linearization",
        "alt-lagrangian",
    ] {
        let out = run(&["verify", "--suite", suite]);
        let r = report(&out);
        assert_eq!(r["suite"], suite);
        let checks = r["checks"].as_array().unwrap();
        assert!(!checks.is_empty());
        for c in checks {
            assert_eq!(c["pass"], true, "{suite}: {c}");
        }
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn anisotropic_oscillator_suite() {
    let out = run(&["verify", "--suite", "superint-oscillator", "--n1", "1", "--n2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("K_12")));
}

#[test]
fn failing_check_exits_two() {
    // Tolerances far too loose for the generator rates.
    let out = run(&["verify", "--suite", "generators", "--rtol", "1e-3", "--atol", "1e-3"]);
    let r = report(&out);
    let any_failed = r["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false);
    assert!(any_failed);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_one() {
    let out = run(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn seed_is_honoured() {
    let seeded = |seed: &str| bin().env("RICCATI_DYN_SEED", seed).args(["verify", "--suite", "hamiltonian"]).output().unwrap();
    assert_eq!(seeded("7").stdout, seeded("7").stdout);
    assert_ne!(seeded("7").stdout, seeded("8").stdout);
    assert_eq!(seeded("seven").status.code(), Some(1));
}

#[test]
fn empty_portrait_has_empty_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["portrait", "--density", "0", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let index = std::fs::read_to_string(dir.path().join("index.csv")).unwrap();
    assert_eq!(index, "id,file,x0,v0,status,t_final\n");
}

#[test]
fn cubic_portrait_approaches_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "portrait", "--system", "cubic", "--k", "1", "--density", "4", "--x-min", "-1", "--x-max", "1", "--v-min", "0.5",
        "--v-max", "2", "--t-end", "20", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, index) = {
        let text = std::fs::read_to_string(dir.path().join("index.csv")).unwrap();
        let mut lines = text.lines().map(String::from).collect::<Vec<_>>();
        let h = lines.remove(0);
        (h, lines)
    };
    assert_eq!(index.len(), 16);
    for (i, line) in index.iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], i.to_string());
        assert_eq!(cols[4], "completed");
        let (_, rows) = read_csv(&dir.path().join(cols[1]));
        let peak = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
        let last = rows.last().unwrap()[1].abs();
        assert!(last < 0.15 && last <= peak, "{line}: {last}");
    }
}

#[test]
fn oscillator_portrait_closes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "portrait", "--system", "oscillator", "--k", "1", "--w", "1", "--energies", "0.2,0.5,0.8", "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for i in 0..3 {
        let (_, rows) = read_csv(&dir.path().join(format!("traj_{i:04}.csv")));
        let (first, last) = (&rows[0], rows.last().unwrap());
        assert!((last[0] - std::f64::consts::TAU).abs() < 1e-12);
        let gap = ((last[1] - first[1]).powi(2) + (last[2] - first[2]).powi(2)).sqrt();
        assert!(gap <= 1e-4, "{gap}");
    }
}

#[test]
fn figure_eight_window_ends_near_origin() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eight.csv");
    let out = run(&[
        "lissajous", "--system", "2d-cubic", "--k1", "1", "--k2", "1", "--E1", "-1", "--E2", "-5", "--T", "100", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "t,x,v,y,vy");
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert_eq!((first[0], last[0]), (-100.0, 100.0));
    for r in [first, last] {
        assert!(r[1].abs() < 0.05 && r[3].abs() < 0.05);
    }
}

#[test]
fn resonant_lissajous_closes_and_depends_on_phase() {
    let dir = tempfile::tempdir().unwrap();
    let mut curves = Vec::new();
    for phase in ["0", "0.9"] {
        let csv = dir.path().join(format!("l{phase}.csv"));
        let out = run(&[
            "lissajous", "--system", "2d-oscillator", "--n1", "1", "--n2", "2", "--E1", "0.2", "--E2", "0.2", "--phi2", phase,
            "--samples", "201", "--out", csv.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let (_, rows) = read_csv(&csv);
        let (first, last) = (&rows[0], rows.last().unwrap());
        let gap = (1..5).map(|j| (last[j] - first[j]).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-4, "{gap}");
        curves.push(rows);
    }
    let diff = curves[0].iter().zip(&curves[1]).map(|(a, b)| (a[3] - b[3]).abs()).fold(0.0, f64::max);
    assert!(diff > 0.1);
}

#[test]
fn csv_round_trip_reproduces_conserved_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two.csv");
    let out = run(&[
        "simulate", "--system", "2d-cubic", "--k1", "1", "--k2", "1.5", "--x0", "0.2", "--v0", "1", "--y0", "-0.4", "--vy0",
        "0.8", "--t-end", "10", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&csv);
    let spec = SystemSpec::product(System1D::CubicRiccati { k: 1.0 }, System1D::CubicRiccati { k: 1.5 });
    for id in [IntegralId::EnergyEL, IntegralId::EnergyI1, IntegralId::EnergyI2, IntegralId::I3Dissipative, IntegralId::I4Dissipative] {
        let values: Vec<f64> = rows
            .iter()
            .map(|r| evaluate_integral(id, &spec, &State::new_2d(r[0], r[1], r[2], r[3], r[4]), 1e-12).unwrap().real())
            .collect();
        let drift = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        let tol = if matches!(id, IntegralId::EnergyEL | IntegralId::EnergyI1 | IntegralId::EnergyI2) { 1e-8 } else { 1e-7 };
        assert!(drift <= tol, "{id}: {drift}");
    }
}

#[test]
fn negative_energy_list_seeds_cubic_portrait() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["portrait", "--system", "cubic", "--energies", "-1,-2.5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let index = std::fs::read_to_string(dir.path().join("index.csv")).unwrap();
    let v0: Vec<f64> = index.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(v0, vec![2.0, 0.8]);
}
