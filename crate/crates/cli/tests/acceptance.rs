//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantities at the stated tolerances.
//!
//! Setup shared by several criteria (the full figure scans) is computed once
//! and reused. Everything runs at the reference operating point A = 1,
//! epsilon = 0.5, sin² pulse on [0, 1], generator bases at 0.

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use pulsekam::baselines::{baseline_propagator, BaselineKind};
use pulsekam::kam::{
    d_k, kam_approximant, kam_approximant_zero_d, w_k, KamChain, KamParams,
};
use pulsekam::linalg::{commutator, spectral_norm, ComplexMatrix};
use pulsekam::metrics::{delta_error, scaling_study};
use pulsekam::optimize::{scan_lambda, ScanParameter};
use pulsekam::propagator::{closed_form_u0, reference_for_problem, Propagator};
use pulsekam::SuddenProblem;

use pulsekam::num_complex::Complex64;

fn check(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} {verdict}: {detail}");
    assert!(pass, "criterion {criterion} FAIL: {detail}");
}

fn problem() -> SuddenProblem {
    SuddenProblem::two_level(1.0, 0.5)
}

fn reference() -> &'static Propagator {
    static REFERENCE: OnceLock<Propagator> = OnceLock::new();
    REFERENCE.get_or_init(|| reference_for_problem(&problem(), 1e-12).unwrap())
}

struct Fig1Data {
    grid: Vec<f64>,
    lambda: Vec<f64>,
    delta_kam1: Vec<f64>,
    delta_dyson1: f64,
    delta_magnus1: f64,
    /// Refined argmin of the objective.
    t1_star: f64,
    /// Error of the first iteration at the refined optimum.
    delta_at_t1_star: f64,
}

fn fig1_data() -> &'static Fig1Data {
    static DATA: OnceLock<Fig1Data> = OnceLock::new();
    DATA.get_or_init(|| {
        let problem = problem();
        let reference = reference();
        let points = 101;
        let mut grid = Vec::with_capacity(points);
        let mut lambda = Vec::with_capacity(points);
        let mut delta_kam1 = Vec::with_capacity(points);
        for i in 0..points {
            let t1 = i as f64 / (points - 1) as f64;
            let chain =
                KamChain::build(&problem, &[KamParams::default().with_t_free(t1)], 1).unwrap();
            grid.push(t1);
            lambda.push(chain.lambda_last());
            let delta = delta_error(&chain.approximant(), reference, 0.0, 1.0)
                .unwrap()
                .delta;
            delta_kam1.push(delta);
        }
        let scan = scan_lambda(
            &problem,
            &[KamParams::default()],
            ScanParameter::TFree(0),
            0.0,
            1.0,
            points,
        )
        .unwrap();
        let t1_star = scan.refined.0;
        let chain =
            KamChain::build(&problem, &[KamParams::default().with_t_free(t1_star)], 1).unwrap();
        let delta_at_t1_star = delta_error(&chain.approximant(), reference, 0.0, 1.0)
            .unwrap()
            .delta;
        let delta_dyson1 = delta_error(
            &baseline_propagator(&problem, BaselineKind::Dyson1),
            reference,
            0.0,
            1.0,
        )
        .unwrap()
        .delta;
        let delta_magnus1 = delta_error(
            &baseline_propagator(&problem, BaselineKind::Magnus1),
            reference,
            0.0,
            1.0,
        )
        .unwrap()
        .delta;
        Fig1Data {
            grid,
            lambda,
            delta_kam1,
            delta_dyson1,
            delta_magnus1,
            t1_star,
            delta_at_t1_star,
        }
    })
}

struct Fig2Data {
    delta_kam2: Vec<f64>,
    delta_dyson2: f64,
    delta_magnus2: f64,
    t2_star: f64,
    delta_at_t2_star: f64,
}

fn fig2_data() -> &'static Fig2Data {
    static DATA: OnceLock<Fig2Data> = OnceLock::new();
    DATA.get_or_init(|| {
        let problem = problem();
        let reference = reference();
        let t1_star = fig1_data().t1_star;
        let params1 = KamParams::default().with_t_free(t1_star);
        let points = 101;
        let mut delta_kam2 = Vec::with_capacity(points);
        for i in 0..points {
            let t2 = i as f64 / (points - 1) as f64;
            let approx =
                kam_approximant(&problem, &[params1, KamParams::default().with_t_free(t2)], 2)
                    .unwrap();
            delta_kam2.push(delta_error(&approx, reference, 0.0, 1.0).unwrap().delta);
        }
        let scan = scan_lambda(
            &problem,
            &[params1, KamParams::default()],
            ScanParameter::TFree(1),
            0.0,
            1.0,
            points,
        )
        .unwrap();
        let t2_star = scan.refined.0;
        let approx = kam_approximant(
            &problem,
            &[params1, KamParams::default().with_t_free(t2_star)],
            2,
        )
        .unwrap();
        let delta_at_t2_star = delta_error(&approx, reference, 0.0, 1.0).unwrap().delta;
        let delta_dyson2 = delta_error(
            &baseline_propagator(&problem, BaselineKind::Dyson2),
            reference,
            0.0,
            1.0,
        )
        .unwrap()
        .delta;
        let delta_magnus2 = delta_error(
            &baseline_propagator(&problem, BaselineKind::Magnus2),
            reference,
            0.0,
            1.0,
        )
        .unwrap()
        .delta;
        Fig2Data {
            delta_kam2,
            delta_dyson2,
            delta_magnus2,
            t2_star,
            delta_at_t2_star,
        }
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0
}

#[test]
fn criterion_01_fig1_minimum_location() {
    let data = fig1_data();
    let n = data.lambda.len();
    let interior_minima: Vec<usize> = (1..n - 1)
        .filter(|&i| data.lambda[i] < data.lambda[i - 1] && data.lambda[i] < data.lambda[i + 1])
        .collect();
    let single_interior = interior_minima.len() == 1;
    let t1_star = data.t1_star;
    let in_window = (t1_star - 0.39).abs() <= 0.03;
    let delta_argmin = data.grid[argmin(&data.delta_kam1)];
    let lambda_argmin = data.grid[argmin(&data.lambda)];
    let argmins_close = (delta_argmin - lambda_argmin).abs() <= 0.05;
    check(
        "01",
        single_interior && in_window && argmins_close,
        &format!(
            "lambda2 has {} interior minimum(s); t1* = {t1_star:.4} (want 0.39 +/- 0.03); \
             argmin delta1 = {delta_argmin:.3} vs argmin lambda2 = {lambda_argmin:.3} (want within 0.05)",
            interior_minima.len()
        ),
    );
}

#[test]
fn criterion_02_optimized_iteration_beats_magnus() {
    let data = fig1_data();
    let bound = data.delta_magnus1 / 5.0;
    check(
        "02",
        data.delta_at_t1_star <= bound,
        &format!(
            "delta1(t1*) = {:.4e} vs magnus1/5 = {:.4e} (magnus1 = {:.4e})",
            data.delta_at_t1_star, bound, data.delta_magnus1
        ),
    );
}

#[test]
fn criterion_03_scan_dynamic_range() {
    let data = fig1_data();
    let max = data.delta_kam1.iter().cloned().fold(0.0f64, f64::max);
    let min = data.delta_kam1.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    check(
        "03",
        ratio >= 10.0,
        &format!("delta1 scan spans {min:.3e}..{max:.3e}, ratio {ratio:.1} (want >= 10)"),
    );
}

#[test]
fn criterion_04a_optimized_second_iteration_beats_magnus2() {
    let data = fig2_data();
    let bound = data.delta_magnus2 / 100.0;
    check(
        "04a",
        data.delta_at_t2_star <= bound,
        &format!(
            "delta2(t2* = {:.4}) = {:.4e} vs magnus2/100 = {:.4e} (magnus2 = {:.4e})",
            data.t2_star, data.delta_at_t2_star, bound, data.delta_magnus2
        ),
    );
}

#[test]
fn criterion_04b_second_iteration_scan_spread() {
    let data = fig2_data();
    let max = data.delta_kam2.iter().cloned().fold(0.0f64, f64::max);
    let min = data.delta_kam2.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    check(
        "04b",
        ratio >= 100.0,
        &format!("delta2 scan spans {min:.3e}..{max:.3e}, ratio {ratio:.1} (want >= 100)"),
    );
}

#[test]
fn criterion_05_dyson_pathology() {
    let dyson1 = fig1_data().delta_dyson1;
    let dyson2 = fig2_data().delta_dyson2;
    check(
        "05",
        dyson2 > dyson1,
        &format!("delta2_dyson2 = {dyson2:.4e} vs delta1_dyson1 = {dyson1:.4e} (want dyson2 larger)"),
    );
}

#[test]
fn criterion_06a_first_iteration_order() {
    let study = scaling_study(&problem(), &[0.05, 0.1, 0.2], |p| {
        kam_approximant(p, &[KamParams::default()], 1)
    })
    .unwrap();
    check(
        "06a",
        (study.slope - 2.0).abs() <= 0.3,
        &format!("kam1 log-log slope = {:.3} (want 2 +/- 0.3)", study.slope),
    );
}

#[test]
fn criterion_06b_second_iteration_order() {
    let study = scaling_study(&problem(), &[0.05, 0.1, 0.2], |p| {
        kam_approximant(p, &[KamParams::default(), KamParams::default()], 2)
    })
    .unwrap();
    check(
        "06b",
        (study.slope - 4.0).abs() <= 0.3,
        &format!("kam2 log-log slope = {:.3} (want 4 +/- 0.3)", study.slope),
    );
}

#[test]
fn criterion_07_structural_oracles() {
    let problem = problem();
    let u0 = closed_form_u0(&problem);
    let v = |_: f64| Ok(ComplexMatrix::pauli_z());
    let t_free = 0.39;
    let d = |t: f64| d_k(&u0, &v, t_free, t);
    let quad = KamParams::default().quadrature();
    let h = 1e-5;

    let mut worst_compat = 0.0f64;
    let mut worst_cohom = 0.0f64;
    for k in 0..10 {
        let t = 0.05 + 0.1 * k as f64;
        let h0 = ComplexMatrix::pauli_x().scale_re(problem.pulse().value(t));

        let derivative = d(t + h)
            .unwrap()
            .sub(&d(t - h).unwrap())
            .scale(Complex64::new(0.0, 1.0 / (2.0 * h)));
        let compat = derivative
            .sub(&commutator(&h0, &d(t).unwrap()).unwrap())
            .max_abs();
        worst_compat = worst_compat.max(compat);

        let w_plus = w_k(&u0, &v, &d, 0.0, t + h, &quad).unwrap();
        let w_minus = w_k(&u0, &v, &d, 0.0, t - h, &quad).unwrap();
        let w_mid = w_k(&u0, &v, &d, 0.0, t, &quad).unwrap();
        let w_derivative = w_plus.sub(&w_minus).scale_re(1.0 / (2.0 * h));
        let rhs = commutator(&w_mid, &h0)
            .unwrap()
            .scale(Complex64::new(0.0, 1.0))
            .add(&ComplexMatrix::pauli_z())
            .sub(&d(t).unwrap());
        worst_cohom = worst_cohom.max(w_derivative.sub(&rhs).max_abs());
    }

    let w_at_base = w_k(&u0, &v, &d, 0.3, 0.3, &quad).unwrap().max_abs();
    let d_at_free = d_k(&u0, &v, t_free, t_free).unwrap();
    let d_exact = d_at_free == ComplexMatrix::pauli_z();

    check(
        "07",
        worst_compat <= 1e-6 && worst_cohom <= 1e-6 && w_at_base <= 1e-10 && d_exact,
        &format!(
            "compatibility residual {worst_compat:.2e}, cohomology residual {worst_cohom:.2e} \
             (want <= 1e-6); |W1(t1')| = {w_at_base:.1e} (want <= 1e-10); D1(t1) == V1 exactly: {d_exact}"
        ),
    );
}

#[test]
fn criterion_08_unitarity_suite() {
    let problem = problem();
    let params = [
        KamParams::default().with_t_free(0.39),
        KamParams::default().with_t_free(0.1),
    ];
    let mut worst_approx = 0.0f64;
    for approximant in [
        kam_approximant(&problem, &params, 1).unwrap(),
        kam_approximant(&problem, &params, 2).unwrap(),
        baseline_propagator(&problem, BaselineKind::Magnus1),
        baseline_propagator(&problem, BaselineKind::Magnus2),
    ] {
        for (t, t0) in [(1.0, 0.0), (0.7, 0.2)] {
            worst_approx = worst_approx.max(approximant.unitarity_defect(t, t0).unwrap());
        }
    }

    let reference = reference();
    let ref_defect = reference.unitarity_defect(1.0, 0.0).unwrap();
    let group_residual = reference
        .evaluate(1.0, 0.5)
        .unwrap()
        .mul(&reference.evaluate(0.5, 0.0).unwrap())
        .sub(&reference.evaluate(1.0, 0.0).unwrap())
        .max_abs();

    check(
        "08",
        worst_approx <= 1e-9 && ref_defect <= 1e-10 && group_residual <= 1e-10,
        &format!(
            "approximant unitarity defect {worst_approx:.2e} (want <= 1e-9); reference defect \
             {ref_defect:.2e} and group residual {group_residual:.2e} (want <= 1e-10)"
        ),
    );
}

#[test]
fn criterion_09_magnus_correspondence() {
    let problem = problem();
    let magnus = baseline_propagator(&problem, BaselineKind::Magnus1);
    let pvz = kam_approximant_zero_d(&problem, &KamParams::default()).unwrap();
    let diff = magnus
        .evaluate(1.0, 0.0)
        .unwrap()
        .sub(&pvz.evaluate(1.0, 0.0).unwrap());
    let residual = spectral_norm(&diff).unwrap();
    check(
        "09",
        residual <= 1e-9,
        &format!("|magnus1 - zero-compatible-part iteration| = {residual:.2e} (want <= 1e-9)"),
    );
}

#[test]
fn criterion_10_cli_determinism() {
    let base = std::env::temp_dir().join(format!("pulsekam-acceptance-{}", std::process::id()));
    let config_path = base.join("acceptance.conf");
    std::fs::create_dir_all(&base).unwrap();
    std::fs::write(
        &config_path,
        "scan_points = 15\nepsilons = 0.1,0.2,0.4\nmethods = kam1,kam2,magnus1,magnus2\n",
    )
    .unwrap();

    let runs: Vec<(&str, &[&str])> = vec![
        ("fig1", &["fig1"]),
        ("fig2", &["fig2"]),
        ("optimize", &["optimize"]),
        ("scaling", &["scaling"]),
        ("sweep", &["sweep"]),
    ];
    let mut all_identical = true;
    let mut detail = String::new();
    for (name, args) in runs {
        let mut outputs: Vec<Vec<(PathBuf, Vec<u8>)>> = Vec::new();
        for run in 0..2 {
            let out_dir = base.join(format!("{name}-{run}"));
            std::fs::create_dir_all(&out_dir).unwrap();
            let status = Command::new(env!("CARGO_BIN_EXE_pulsekam"))
                .args(args)
                .arg("--quiet")
                .arg("--config")
                .arg(&config_path)
                .arg("--out")
                .arg(&out_dir)
                .status()
                .unwrap();
            assert!(status.success(), "{name} run {run} failed");
            let mut files: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(&out_dir)
                .unwrap()
                .map(|entry| {
                    let path = entry.unwrap().path();
                    let bytes = std::fs::read(&path).unwrap();
                    (path, bytes)
                })
                .collect();
            files.sort_by(|a, b| a.0.file_name().cmp(&b.0.file_name()));
            assert!(!files.is_empty(), "{name} produced no output");
            outputs.push(files);
        }
        let identical = outputs[0].len() == outputs[1].len()
            && outputs[0]
                .iter()
                .zip(&outputs[1])
                .all(|(a, b)| a.0.file_name() == b.0.file_name() && a.1 == b.1);
        if !identical {
            all_identical = false;
        }
        detail.push_str(&format!("{name}: {} ", if identical { "identical" } else { "DIFFERS" }));
    }
    std::fs::remove_dir_all(&base).unwrap();
    check("10", all_identical, detail.trim());
}
