//! The numeric core is generic over the scalar; exercise the `f32`
//! instantiation end to end at loose tolerances.

use robust_csp::csp::generate::{generate_planted, two_sat_language};
use robust_csp::csp::Instance;
use robust_csp::sdp::{self, SolverOptions};
use robust_csp::{dd, nu};

#[test]
fn f32_relaxation_solves() {
    let lang = two_sat_language();
    let (inst, _): (Instance<f32>, _) = generate_planted(&lang, 4, 10, 0.2, 3).unwrap();
    let inst = inst.normalize_weights().unwrap();
    let problem = sdp::build_relaxation(&inst).unwrap();
    let options = SolverOptions {
        tol: 1e-5,
        accept_tol: 1e-3,
        ..SolverOptions::default()
    };
    let sol = sdp::solve_with_options(&problem, 1e-2, &options).unwrap();
    assert!(sol.objective >= -1e-3);
    assert!(sol.objective <= 1.0 + 1e-3);
    let report = sdp::validate_feasibility(&sol, 1e-3);
    assert!(report.within_tol(), "f32 feasibility: {report:?}");
}

#[test]
fn f32_pipelines_run() {
    let lang = two_sat_language();
    let (inst, _): (Instance<f32>, _) = generate_planted(&lang, 5, 16, 0.0, 9).unwrap();
    let (s, report) = nu::run_nu(&inst, 2).unwrap();
    assert_eq!(s.values.len(), 5);
    assert!(report.satisfied_weight > 0.99);
    let (s, report) = dd::run_dd(&inst, 2).unwrap();
    assert_eq!(s.values.len(), 5);
    assert!(report.satisfied_weight > 0.99);
}
