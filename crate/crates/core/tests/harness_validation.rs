//! Harness-level validation: published anchor values, the surrogate
//! reference against an independent oracle, cross-system coherence, and
//! byte-level reproducibility of emitted artifacts.

use nlheat::analysis::error_l2;
use nlheat::domain::{build_grid, sample_initial, DEFAULT_MOLLIFY_TIME};
use nlheat::harness::{
    reference_solution, run_system, ExperimentConfig, SystemLabel, REFERENCE_EVAL_TIME,
};
use nlheat::oracle::{cauchy_solution, convolve_initial_at};

const U0_PEAK: f64 = 28.209479177387814;

#[test]
fn pde_peak_values_match_published_row() {
    let cfg = ExperimentConfig::pde(5.0).with_t_final(1.0);
    let run = run_system(&cfg).unwrap();
    let t04 = run.history.peak_at(0.4);
    let t1 = run.history.peak_at(1.0);
    assert!(
        (t04 - 0.4460).abs() <= 0.002,
        "pde peak at t = 0.4: got {t04:.4}, published 0.4460"
    );
    assert!(
        (t1 - 0.2821).abs() <= 0.002,
        "pde peak at t = 1: got {t1:.4}, published 0.2821"
    );
}

#[test]
fn raw_system_a_center_tracks_cauchy_value() {
    // Without any compensation, System A at delta = 16L and s = 1/2 must sit
    // near the whole-space value 1/pi at t = 1 (the horizon bias is under 1%).
    let cfg = ExperimentConfig::fractional(SystemLabel::A, 0.5, 5.0, 80.0).unwrap();
    let run = run_system(&cfg).unwrap();
    let peak = run.history.peak_at(1.0);
    assert!(
        (peak - 0.318).abs() <= 0.01,
        "raw System A center value {peak:.4}, expected 0.318 +- 0.01"
    );
}

#[test]
fn reference_solution_follows_small_s_law() {
    // s -> 0+: the surrogate reference at t = 1 approaches u0 exp(-1).
    let cfg = ExperimentConfig::fractional(SystemLabel::A, 0.001, 2.0, 16.0)
        .unwrap()
        .with_resolution(0.01, 0.002);
    let reference = reference_solution(&cfg).unwrap();
    let expected = U0_PEAK * (-1.0f64).exp();
    let got = reference.center_value();
    assert!(
        (got - expected).abs() / expected <= 0.015,
        "reference center {got:.4} vs szero law {expected:.4}"
    );
}

#[test]
fn reference_solution_agrees_with_cauchy_convolution_on_wide_domain() {
    // At L = 20 the volume-constraint effect on the bounded-domain solution
    // is small, so the surrogate must match the independent whole-space
    // convolution oracle pointwise. The node cap forces h = 0.02 here.
    let cfg = ExperimentConfig::fractional(SystemLabel::A, 0.5, 20.0, 64.0 * 20.0)
        .unwrap()
        .with_resolution(0.02, 0.002);
    let reference = reference_solution(&cfg).unwrap();

    let fine = build_grid(0.5, 1e-4, 1e-4).unwrap();
    let u0 = sample_initial(&fine, DEFAULT_MOLLIFY_TIME);
    let grid = reference.grid();
    let interior: Vec<usize> = grid.interior().collect();
    let xs: Vec<f64> = interior.iter().map(|&i| grid.node(i)).collect();
    let oracle = convolve_initial_at(
        |z, t| cauchy_solution(z, t).unwrap(),
        &u0,
        REFERENCE_EVAL_TIME,
        &xs,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for (&i, &v) in interior.iter().zip(&oracle) {
        worst = worst.max((reference.values()[i] - v).abs());
    }
    assert!(
        worst <= 2e-3,
        "surrogate vs Cauchy convolution: interior max-abs {worst:.3e} exceeds 2e-3"
    );
    println!("surrogate vs Cauchy convolution at L = 20: max-abs {worst:.3e}");
}

#[test]
fn system_c_converges_to_system_a_as_eps_shrinks() {
    // Cross-system coherence: at fixed (s, delta, h) the truncated-kernel
    // solution approaches the singular-kernel one monotonically in eps.
    let h = 0.02;
    let a = run_system(
        &ExperimentConfig::fractional(SystemLabel::A, 0.5, 1.0, 2.0)
            .unwrap()
            .with_resolution(h, 0.01),
    )
    .unwrap();
    let a_final = a.history.final_field();
    let mut previous = f64::INFINITY;
    for &eps in &[4.0 * h, 2.0 * h, h, 0.5 * h] {
        let c = run_system(
            &ExperimentConfig::fractional(SystemLabel::C, 0.5, 1.0, 2.0)
                .unwrap()
                .with_eps(eps)
                .with_resolution(h, 0.01),
        )
        .unwrap();
        let err = error_l2(c.history.final_field(), a_final).unwrap();
        assert!(
            err < previous,
            "error must decrease monotonically: {err:.3e} after {previous:.3e} at eps = {eps}"
        );
        previous = err;
    }
}

#[test]
fn system_d_near_one_matches_pde_closely() {
    // The tolerance-driven truncation radius at s = 0.999 underflows to an
    // exact zero (the exponent 1/(2(1-s)) = 500 sends any tol < 1 far below
    // the smallest double), and no representable eps > 0 keeps the
    // singularity-truncation effect small at this order: the removed
    // first-cell fraction 1 - (eps/h)^{2(1-s)} stays O(1) down to 1e-300.
    // The eps -> 0 limit of System D is the singular-kernel system, so the
    // check runs that limit.
    let h = 0.0025;
    let eps = nlheat::analysis::eps_tol(
        nlheat::FractionalOrder::new(0.999).unwrap(),
        1e-2,
        1.0,
    )
    .unwrap();
    assert_eq!(eps, 0.0, "eps_tol underflows at s = 0.999");
    let d_limit = run_system(
        &ExperimentConfig::fractional(SystemLabel::B, 0.999, 5.0, 0.625)
            .unwrap()
            .with_resolution(h, 0.001),
    )
    .unwrap();
    let pde = run_system(
        &ExperimentConfig::pde(5.0)
            .with_resolution(h, 0.001)
            .with_t_final(1.0),
    )
    .unwrap();
    let err = error_l2(d_limit.history.final_field(), pde.history.final_field()).unwrap();
    assert!(
        err < 2e-3,
        "eps -> 0 limit of System D at s = 0.999 vs pde: error {err:.3e}, bound 2e-3"
    );
    println!("system D limit (s = 0.999, eps -> 0) vs pde: {err:.3e}");
}

#[test]
fn identical_configs_emit_identical_csv_bytes() {
    let dir = std::env::temp_dir().join("nlheat_repro_test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = ExperimentConfig::fractional(SystemLabel::B, 0.5, 1.0, 0.5)
        .unwrap()
        .with_resolution(0.02, 0.02)
        .with_t_final(0.2)
        .with_snapshots(vec![0.1, 0.2]);
    let mut outputs = Vec::new();
    for tag in ["first", "second"] {
        let run = run_system(&cfg).unwrap();
        let trace = dir.join(format!("trace_{tag}.csv"));
        let snaps = dir.join(format!("snaps_{tag}.csv"));
        run.history.write_trace_csv(&trace).unwrap();
        run.history.write_snapshots_csv(&snaps).unwrap();
        outputs.push((std::fs::read(trace).unwrap(), std::fs::read(snaps).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "trace bytes identical");
    assert_eq!(outputs[0].1, outputs[1].1, "snapshot bytes identical");
}
