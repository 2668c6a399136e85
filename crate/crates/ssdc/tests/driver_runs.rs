//! End-to-end runs of the stagewise driver across all inner solvers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssdc::{
    default_spg_gamma, mu_for_target, prox_point, ssdc_moreau_run, ssdc_run, AdaGradParams,
    ConvexOracle, DcProblem, GammaSchedule, IsoQuadratic, ProblemConstants, QuadraticComponents,
    RunOptions, SamplingLaw, SmoothingTarget, SolverKind, Vector, ZeroOracle, ZeroReg, L0, L1,
};

/// `F(x) = (1/n)Σ ½‖x − tᵢ‖² + λ‖x‖₁ − (c/2)‖x‖²`: a strongly convex total
/// objective with genuine DC structure and stochastic components.
fn dc_fixture(n: usize, d: usize, concave: f64, stated_bounds: bool) -> DcProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let targets: Vec<Vector> = (0..n)
        .map(|_| Vector::from_fn(d, |_| rng.gen_range(-1.0..1.0)).unwrap())
        .collect();
    let g = Arc::new(QuadraticComponents::new(targets, 1.0).unwrap());
    let h = Arc::new(IsoQuadratic::new(Vector::zeros(d), concave).unwrap());
    let lambda = 0.05;
    let constants = if stated_bounds {
        // The quadratic parts have no uniform subgradient bound; state scale
        // constants for the ball-constrained and adaptive solvers.
        ProblemConstants {
            grad_bound: Some(6.0),
            reg_bound: Some(lambda * (d as f64).sqrt()),
            ..Default::default()
        }
    } else {
        ProblemConstants::default()
    };
    DcProblem::new(g, h, Arc::new(L1::new(lambda).unwrap()), constants).unwrap()
}

#[test]
fn every_solver_reduces_the_objective() {
    let solvers = [
        SolverKind::SpgSmooth,
        SolverKind::SpgNonsmooth,
        SolverKind::AdaGrad(AdaGradParams::default()),
        SolverKind::Svrg,
    ];
    for solver in solvers {
        let problem = dc_fixture(12, 3, 0.3, true);
        let schedule = GammaSchedule::constant(3.9).unwrap();
        let report = ssdc_run(
            &problem,
            &solver,
            &schedule,
            8,
            &SamplingLaw::Uniform,
            17,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(report.stages.len(), 8, "{}", solver.name());
        assert!(
            report.final_objective < report.initial_objective,
            "{} did not descend: {} -> {}",
            solver.name(),
            report.initial_objective,
            report.final_objective
        );
        assert!(report.grad_evals > 0);
        assert!((1..=8).contains(&report.tau));
    }
}

#[test]
fn traced_criticality_shrinks_over_stages() {
    // Variance reduction drives the per-stage accuracy like 1/k, so the
    // traced gradient mapping trends down; compare half-means to absorb the
    // sampling noise of individual stages.
    let problem = dc_fixture(12, 3, 0.3, false);
    let opts = RunOptions { trace_stride: 5, ..Default::default() };
    let schedule = default_spg_gamma(1.3).unwrap();
    let report = ssdc_run(
        &problem,
        &SolverKind::Svrg,
        &schedule,
        40,
        &SamplingLaw::power(2.0).unwrap(),
        5,
        &opts,
    )
    .unwrap();
    let traced: Vec<f64> =
        report.stages.iter().filter_map(|r| r.g_gamma_norm).collect();
    assert_eq!(traced.len(), 8, "every fifth stage is traced");
    let early: f64 = traced[..4].iter().sum::<f64>() / 4.0;
    let late: f64 = traced[4..].iter().sum::<f64>() / 4.0;
    assert!(late < early, "criticality trace should tighten: {traced:?}");
    let untraced = report.stages.iter().filter(|r| r.g_gamma_norm.is_none()).count();
    assert_eq!(untraced, 32);
}

#[test]
fn smoothed_runs_tighten_as_the_smoothing_level_drops() {
    // Hard-sparsity regularized quadratic; the smoothed surrogate's sampled
    // point maps back through the prox with a residual that shrinks with μ.
    let target = Vector::from_vec(vec![2.0, 0.1]).unwrap();
    let g = Arc::new(QuadraticComponents::new(vec![target], 1.0).unwrap());
    let h = Arc::new(ZeroOracle { dim: 2 });
    let problem =
        DcProblem::new(g, h, Arc::new(L0::new(1.0).unwrap()), ProblemConstants::default())
            .unwrap();

    let mut residuals = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let mu = mu_for_target(SmoothingTarget::LowerBoundedR, eps).unwrap();
        let report = ssdc_moreau_run(
            &problem.fresh(),
            mu,
            &SolverKind::SpgSmooth,
            &GammaSchedule::constant(3.0).unwrap(),
            25,
            &SamplingLaw::power(2.0).unwrap(),
            3,
            &RunOptions::default(),
        )
        .unwrap();
        let info = report.moreau.expect("smoothed run carries the mapping");
        assert_eq!(info.mu, mu);
        residuals.push(info.prox_residual);
    }
    assert!(
        residuals[2] <= residuals[0] + 1e-9,
        "residuals should shrink with eps: {residuals:?}"
    );
}

#[test]
fn sampled_stage_frequencies_match_the_law() {
    let law = SamplingLaw::power(2.0).unwrap();
    let k = 5;
    let probs = law.probabilities(k);
    let draws = 20_000usize;
    let mut counts = vec![0usize; k];
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for _ in 0..draws {
        counts[law.sample(k, &mut rng) - 1] += 1;
    }
    for i in 0..k {
        let freq = counts[i] as f64 / draws as f64;
        let sigma = (probs[i] * (1.0 - probs[i]) / draws as f64).sqrt();
        assert!(
            (freq - probs[i]).abs() <= 3.0 * sigma,
            "stage {} frequency {freq} vs {} (3 sigma = {})",
            i + 1,
            probs[i],
            3.0 * sigma
        );
    }
}

#[test]
fn adagrad_cap_marks_the_stage_record() {
    let problem = dc_fixture(12, 3, 0.3, true);
    let params = AdaGradParams { max_iterations: 3, ..Default::default() };
    let report = ssdc_run(
        &problem,
        &SolverKind::AdaGrad(params),
        &GammaSchedule::constant(3.9).unwrap(),
        2,
        &SamplingLaw::Uniform,
        0,
        &RunOptions::default(),
    )
    .unwrap();
    assert!(
        report.stages.iter().all(|r| r.budget_capped),
        "a three-iteration cap cannot satisfy the stopping rule"
    );
    assert!(report.stages.iter().all(|r| r.inner_iterations == 3));
}

#[test]
fn stagewise_error_decays_with_more_stages() {
    // Doubling the stage count should keep shrinking the expected gradient
    // mapping at the sampled point. Averaged over seeds to tame sampling
    // noise; the trend (not the constant) is what this guards.
    let gamma = GammaSchedule::constant(3.9).unwrap();
    let mut means = Vec::new();
    for k in [5usize, 20] {
        let mut total = 0.0;
        let seeds = 12;
        for seed in 0..seeds {
            let problem = dc_fixture(10, 3, 0.3, false);
            let report = ssdc_run(
                &problem,
                &SolverKind::Svrg,
                &gamma,
                k,
                &SamplingLaw::power(2.0).unwrap(),
                seed,
                &RunOptions::default(),
            )
            .unwrap();
            let est = prox_point(&problem, report.x_tau.as_slice(), 3.9, 1e-6).unwrap();
            total += est.g_gamma_norm * est.g_gamma_norm;
        }
        means.push(total / seeds as f64);
    }
    assert!(
        means[1] < means[0],
        "mean squared gradient mapping should drop with stages: {means:?}"
    );
}
