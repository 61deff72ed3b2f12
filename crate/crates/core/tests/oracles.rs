//! Independent scalar oracles checked against the full solver.

use tfmbe::harness::{ManufacturedProblem, RunRecord};
use tfmbe::timemesh::{build_graded_random, build_uniform};
use tfmbe::SolverConfig;

// Γ(1.2) and Γ(1.8)
const GAMMA_1_2: f64 = 0.918_168_742_399_760_6;
const GAMMA_1_8: f64 = 0.931_383_770_980_242_7;

/// The manufactured problem restricted to its single mode `sin x sin y`
/// reads `∂_t^α u + u = 1 + u_exact(t)` with `u_exact = t^α / Γ(1+α)`.
/// L1 on the given points, with weights from the direct difference of powers.
fn scalar_l1_error(alpha: f64, gamma_2ma: f64, gamma_1pa: f64, points: &[f64]) -> f64 {
    let exact = |t: f64| t.powf(alpha) / gamma_1pa;
    let mut u = vec![0.0];
    let mut err: f64 = 0.0;
    for n in 1..points.len() {
        let tn = points[n];
        let weight = |k: usize| {
            let tau = points[k] - points[k - 1];
            ((tn - points[k - 1]).powf(1.0 - alpha) - (tn - points[k]).powf(1.0 - alpha)) / (gamma_2ma * tau)
        };
        let mut rhs = 1.0 + exact(tn) + weight(n) * u[n - 1];
        for k in 1..n {
            rhs -= weight(k) * (u[k] - u[k - 1]);
        }
        let un = rhs / (weight(n) + 1.0);
        err = err.max((un - exact(tn)).abs());
        u.push(un);
    }
    // ‖sin x sin y‖ over the 2π-periodic square is π
    std::f64::consts::PI * err
}

fn linear_problem() -> ManufacturedProblem {
    let mut p = ManufacturedProblem::new(0.8, 8).unwrap();
    p.linear_only = true;
    p
}

#[test]
fn linear_manufactured_errors_match_scalar_oracle_on_uniform_meshes() {
    let frozen = [
        (40, 0.025_624_479_735_565_944),
        (80, 0.015_240_637_985_756_696),
        (160, 0.009_007_673_836_915_234),
        (320, 0.005_261_297_163_250_817),
    ];
    let problem = linear_problem();
    for (n, expected) in frozen {
        let mesh = build_uniform(n, 1.0).unwrap();
        let oracle = scalar_l1_error(0.8, GAMMA_1_2, GAMMA_1_8, mesh.points());
        assert!((oracle - expected).abs() < 1e-13 * expected.max(1.0), "oracle drifted at N = {n}");
        let got = problem.max_error(&mesh, &SolverConfig::default()).unwrap();
        assert!((got - expected).abs() < 1e-12, "N = {n}: {got} vs {expected}");
    }
}

#[test]
fn linear_manufactured_errors_match_scalar_oracle_on_graded_random_meshes() {
    let problem = linear_problem();
    for (n, gamma, seed) in [(30, 1.0, 1), (45, 1.5, 2), (60, 2.0, 3)] {
        let mesh = build_graded_random(n, gamma, 1.0, seed).unwrap();
        let oracle = scalar_l1_error(0.8, GAMMA_1_2, GAMMA_1_8, mesh.points());
        let got = problem.max_error(&mesh, &SolverConfig::default()).unwrap();
        assert!((got - oracle).abs() < 1e-12 * oracle.max(1.0), "N = {n}: {got} vs {oracle}");
    }
}

#[test]
fn record_written_by_solver_reloads_from_disk() {
    let problem = ManufacturedProblem::new(0.6, 8).unwrap();
    let mesh = build_uniform(12, 0.5).unwrap();
    let mut record = problem.solve(&mesh, &SolverConfig::default()).unwrap().record;
    record.metadata.alpha = 0.6;
    record.metadata.scheme = "l1".into();
    record.metadata.mesh = "uniform".into();
    record.metadata.extra.insert("note".into(), "forced".into());
    let dir = tempfile::tempdir().unwrap();
    for name in ["run.csv", "run.json"] {
        let path = dir.path().join(name);
        let format = tfmbe::harness::Format::from_path(&path);
        record.emit(format, &path).unwrap();
        let back = RunRecord::load(format, &path).unwrap();
        assert_eq!(back, record, "{name}");
        assert_eq!(back.rows.len(), 13);
    }
}

#[test]
fn mesh_text_round_trips_through_a_file() {
    let mesh = build_graded_random(40, 2.0, 1.0, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.txt");
    mesh.write_text(std::fs::File::create(&path).unwrap()).unwrap();
    let back =
        tfmbe::TimeMesh::read_text(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, mesh);
}
