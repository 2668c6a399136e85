//! The stagewise outer loop.
//!
//! A run executes `K` stages. Stage `k` builds the majorant at the current
//! center with curvature `γ_k` from the schedule, dispatches the chosen
//! inner solver with its per-stage budget, and the solver's averaged output
//! becomes the next center. The returned iterate `x_τ` is sampled over the
//! stage centers `x_1..x_K` by the sampling law; the last center is also
//! reported for practical use. The envelope-smoothed variant rewrites the
//! problem so a hard regularizer moves into the concave slot, runs the same
//! loop, and maps the sampled point back through the proximal map.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criticality;
use crate::error::{Result, SsdcError};
use crate::majorant::{build_majorant, HBatch};
use crate::moreau::MoreauEnvelope;
use crate::oracle::{ConvexOracle, MoreauComplement, SumOracle};
use crate::problem::{DcProblem, ProblemConstants};
use crate::prox::SqL2;
use crate::solvers::{
    adagrad_solve, spg_solve, svrg_solve, AdaGradConfig, SolveOutput, SpgConfig, SvrgConfig,
};
use crate::vector::Vector;

/// Stage curvature schedule `γ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    Constant(f64),
    /// `γ_k = γ₀·k^β` with `0 ≤ β < 1`.
    Power { gamma0: f64, beta: f64 },
    /// `γ_k = γ₀·k^{(1−ν)/(1+ν)}`, matched to a `ν`-Hölder concave slot.
    Holder { gamma0: f64, nu: f64 },
}

impl GammaSchedule {
    pub fn constant(gamma0: f64) -> Result<Self> {
        Self::check_base(gamma0)?;
        Ok(GammaSchedule::Constant(gamma0))
    }

    pub fn power(gamma0: f64, beta: f64) -> Result<Self> {
        Self::check_base(gamma0)?;
        if !(0.0..1.0).contains(&beta) {
            return Err(SsdcError::parameter(format!(
                "power schedule needs 0 <= beta < 1, got {beta}"
            )));
        }
        Ok(GammaSchedule::Power { gamma0, beta })
    }

    pub fn holder(gamma0: f64, nu: f64) -> Result<Self> {
        Self::check_base(gamma0)?;
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(SsdcError::parameter(format!(
                "holder schedule needs 0 < nu <= 1, got {nu}"
            )));
        }
        Ok(GammaSchedule::Holder { gamma0, nu })
    }

    fn check_base(gamma0: f64) -> Result<()> {
        if gamma0 <= 0.0 || !gamma0.is_finite() {
            return Err(SsdcError::parameter(format!(
                "schedule base gamma0 must be positive, got {gamma0}"
            )));
        }
        Ok(())
    }

    /// `γ_k` for stage `k ≥ 1`.
    pub fn value(&self, k: usize) -> f64 {
        let kf = k as f64;
        match *self {
            GammaSchedule::Constant(g0) => g0,
            GammaSchedule::Power { gamma0, beta } => gamma0 * kf.powf(beta),
            GammaSchedule::Holder { gamma0, nu } => gamma0 * kf.powf((1.0 - nu) / (1.0 + nu)),
        }
    }
}

/// Free-function form of [`GammaSchedule::value`].
pub fn schedule_gamma(schedule: &GammaSchedule, k: usize) -> f64 {
    schedule.value(k)
}

/// The conventional constant curvature for the smooth-step solver: `3L`.
pub fn default_spg_gamma(smoothness: f64) -> Result<GammaSchedule> {
    GammaSchedule::constant(3.0 * smoothness)
}

/// Distribution of the reported stage index `τ` over `1..=K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingLaw {
    Uniform,
    /// `p(τ = k) ∝ k^α` with `α ≥ 1`.
    Power { alpha: f64 },
}

impl SamplingLaw {
    pub fn power(alpha: f64) -> Result<Self> {
        if alpha < 1.0 || !alpha.is_finite() {
            return Err(SsdcError::parameter(format!(
                "power sampling needs alpha >= 1, got {alpha}"
            )));
        }
        Ok(SamplingLaw::Power { alpha })
    }

    pub fn probabilities(&self, k_max: usize) -> Vec<f64> {
        assert!(k_max >= 1, "need at least one stage");
        match *self {
            SamplingLaw::Uniform => vec![1.0 / k_max as f64; k_max],
            SamplingLaw::Power { alpha } => {
                let weights: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(alpha)).collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
        }
    }

    /// Draws a stage index in `1..=k_max`.
    pub fn sample(&self, k_max: usize, rng: &mut ChaCha8Rng) -> usize {
        use rand::Rng;
        let probs = self.probabilities(k_max);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i + 1;
            }
        }
        k_max
    }
}

/// Tunables for the adaptive inner solver.
#[derive(Debug, Clone, Copy)]
pub struct AdaGradParams {
    /// `c` in the stage step `η_k = c/√(γ_k·k)`.
    pub step_scale: f64,
    /// `a` in the stopping rule.
    pub norm_balance: f64,
    /// Hard per-stage iteration cap.
    pub max_iterations: usize,
}

impl Default for AdaGradParams {
    fn default() -> Self {
        AdaGradParams { step_scale: 1.0, norm_balance: 1.0, max_iterations: 200_000 }
    }
}

/// Inner solver selection with per-stage budget rules.
#[derive(Debug, Clone, Copy)]
pub enum SolverKind {
    /// Smooth-step stochastic proximal subgradient: `T_k = ⌈3Lk/γ_k⌉ + 3`.
    SpgSmooth,
    /// Nonsmooth-step variant with ball `3G/γ_k`: `T_k = ⌈k/γ_k⌉ + 1`.
    SpgNonsmooth,
    /// Adaptive dual averaging: `η_k = c/√(γ_k k)`, `M_k = ⌈4/(a·γ_k·η_k)⌉`.
    AdaGrad(AdaGradParams),
    /// Variance reduction: `T_k = max(2, ⌈200L/γ_k⌉)`, `S_k = ⌈log₂ k⌉`.
    Svrg,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::SpgSmooth => "spg-smooth",
            SolverKind::SpgNonsmooth => "spg-nonsmooth",
            SolverKind::AdaGrad(_) => "adagrad",
            SolverKind::Svrg => "svrg",
        }
    }
}

/// Optional knobs for a run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Starting center; zero vector when absent.
    pub x0: Option<Vector>,
    /// How stage linearizations sample the concave slot.
    pub h_batch: HBatch,
    /// Record `‖G_γ‖` every this many stages (0 = never). Needs the
    /// smoothness constant.
    pub trace_stride: usize,
    /// Residual tolerance for traced criticality estimates.
    pub trace_tol: f64,
    /// Stop before any stage that would start at or past this many gradient
    /// evaluations (counted within the run). The first stage always runs.
    pub budget: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            x0: None,
            h_batch: HBatch::Full,
            trace_stride: 0,
            trace_tol: 1e-4,
            budget: None,
        }
    }
}

/// State after one completed stage.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: usize,
    pub gamma: f64,
    /// Inner iterations the stage consumed.
    pub inner_iterations: u64,
    /// Gradient evaluations consumed by the run up to and including this
    /// stage.
    pub grad_evals: u64,
    /// Objective at the stage output (the next center).
    pub objective: f64,
    /// `‖G_γ(stage output)‖` when traced.
    pub g_gamma_norm: Option<f64>,
    /// The inner solver hit its hard cap before its stopping rule.
    pub budget_capped: bool,
}

/// Extra fields for envelope-smoothed runs.
#[derive(Debug, Clone)]
pub struct MoreauInfo {
    pub mu: f64,
    /// `prox_{μr}(x_τ)`: the sampled point mapped back to the original
    /// regularizer's terms.
    pub w_tau: Vector,
    /// `‖x_τ − w_τ‖`.
    pub prox_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub stages: Vec<StageRecord>,
    /// Objective at the starting center.
    pub initial_objective: f64,
    /// Sampled stage index in `1..=stages.len()`.
    pub tau: usize,
    /// The center of stage `τ`.
    pub x_tau: Vector,
    /// The last produced center.
    pub x_final: Vector,
    pub final_objective: f64,
    /// Total gradient evaluations consumed by the run.
    pub grad_evals: u64,
    /// Present for envelope-smoothed runs. Stage objectives then refer to
    /// the smoothed surrogate; map points through `prox_{μr}` to evaluate
    /// the original objective.
    pub moreau: Option<MoreauInfo>,
}

fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        1
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

fn missing(what: &str) -> SsdcError {
    SsdcError::MissingConstant(what.to_string())
}

fn run_stage(
    problem: &DcProblem,
    sub: &crate::majorant::MajorantSubproblem,
    solver: &SolverKind,
    gamma: f64,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SolveOutput> {
    let kf = k as f64;
    match solver {
        SolverKind::SpgSmooth => {
            let l = problem
                .smoothness()
                .ok_or_else(|| missing("smoothness constant L (smooth-step stage budget)"))?;
            let t = (3.0 * l * kf / gamma).ceil() as usize + 3;
            spg_solve(sub, &SpgConfig::smooth(t, gamma)?, rng)
        }
        SolverKind::SpgNonsmooth => {
            let g = problem
                .grad_bound()
                .ok_or_else(|| missing("subgradient bound G (nonsmooth-step ball radius)"))?;
            let t = (kf / gamma).ceil() as usize + 1;
            spg_solve(sub, &SpgConfig::nonsmooth(t, gamma, 3.0 * g / gamma)?, rng)
        }
        SolverKind::AdaGrad(p) => {
            let g = problem
                .grad_bound()
                .ok_or_else(|| missing("subgradient bound G (adaptive metric floor)"))?;
            let g_r = problem
                .reg_bound()
                .ok_or_else(|| missing("regularizer subgradient bound G_r"))?;
            let eta = p.step_scale / (gamma * kf).sqrt();
            let m = (4.0 / (p.norm_balance * gamma * eta)).ceil();
            let radius = (2.0 * (problem.dim() as f64).sqrt() * g + g_r) / gamma;
            let cfg = AdaGradConfig::new(
                eta,
                m,
                p.norm_balance,
                g,
                g_r,
                p.max_iterations,
                radius,
            )?;
            adagrad_solve(sub, &cfg, rng)
        }
        SolverKind::Svrg => {
            let l = problem
                .smoothness()
                .ok_or_else(|| missing("smoothness constant L (variance-reduced step)"))?;
            if l <= 0.0 {
                return Err(SsdcError::parameter(
                    "variance-reduced budgets need strictly positive smoothness",
                ));
            }
            let t = ((200.0 * l / gamma).ceil() as usize).max(2);
            let cfg = SvrgConfig::new(0.05 / l, t, ceil_log2(k), l, gamma)?;
            svrg_solve(sub, &cfg, rng)
        }
    }
}

fn with_stage_context(err: SsdcError, k: usize) -> SsdcError {
    match err {
        SsdcError::Diverged { context, norm } => {
            SsdcError::Diverged { context: format!("stage {k}: {context}"), norm }
        }
        other => other,
    }
}

/// Runs the stagewise loop and samples the reported iterate.
pub fn ssdc_run(
    problem: &DcProblem,
    solver: &SolverKind,
    schedule: &GammaSchedule,
    stages: usize,
    law: &SamplingLaw,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunReport> {
    if stages == 0 {
        return Err(SsdcError::parameter("stage count must be at least 1"));
    }
    let d = problem.dim();
    let x0 = match &opts.x0 {
        Some(v) => {
            if v.dim() != d {
                return Err(SsdcError::parameter(format!(
                    "starting point has dimension {}, problem has {}",
                    v.dim(),
                    d
                )));
            }
            v.clone()
        }
        None => Vector::zeros(d),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start_evals = problem.grad_evals();
    let initial_objective = problem.objective_value(x0.as_slice())?;

    let mut centers = vec![x0];
    let mut records: Vec<StageRecord> = Vec::new();
    for k in 1..=stages {
        let used = problem.grad_evals() - start_evals;
        if k > 1 {
            if let Some(b) = opts.budget {
                if used >= b {
                    break;
                }
            }
        }
        let gamma = schedule.value(k);
        let center = centers.last().expect("nonempty").clone();
        let sub = build_majorant(problem, center, gamma, opts.h_batch, &mut rng)?;
        let out =
            run_stage(problem, &sub, solver, gamma, k, &mut rng).map_err(|e| with_stage_context(e, k))?;
        let objective = problem.objective_value(out.point.as_slice())?;
        let g_gamma_norm = if opts.trace_stride > 0 && k % opts.trace_stride == 0 {
            Some(
                criticality::prox_point(problem, out.point.as_slice(), gamma, opts.trace_tol)?
                    .g_gamma_norm,
            )
        } else {
            None
        };
        records.push(StageRecord {
            stage: k,
            gamma,
            inner_iterations: out.inner_iterations,
            grad_evals: problem.grad_evals() - start_evals,
            objective,
            g_gamma_norm,
            budget_capped: out.budget_capped,
        });
        centers.push(out.point);
    }

    let completed = records.len();
    let tau = law.sample(completed, &mut rng);
    let x_tau = centers[tau - 1].clone();
    let x_final = centers.last().expect("nonempty").clone();
    let final_objective = records.last().expect("at least one stage").objective;
    Ok(RunReport {
        stages: records,
        initial_objective,
        tau,
        x_tau,
        x_final,
        final_objective,
        grad_evals: problem.grad_evals() - start_evals,
        moreau: None,
    })
}

/// Builds the envelope-smoothed surrogate of a problem with a hard
/// regularizer and runs the stagewise loop on it.
///
/// The surrogate keeps `g`, replaces the regularizer slot by the quadratic
/// `‖x‖²/(2μ)` (exact prox), and augments the concave slot with the convex
/// complement of the regularizer's Moreau envelope. Only the smooth-step and
/// variance-reduced solvers are supported: the other budget rules need a
/// stochastic subgradient bound the complement does not admit.
pub fn ssdc_moreau_run(
    problem: &DcProblem,
    mu: f64,
    solver: &SolverKind,
    schedule: &GammaSchedule,
    stages: usize,
    law: &SamplingLaw,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunReport> {
    if mu <= 0.0 || !mu.is_finite() {
        return Err(SsdcError::parameter(format!("smoothing level mu must be positive, got {mu}")));
    }
    match solver {
        SolverKind::SpgSmooth | SolverKind::Svrg => {}
        other => {
            return Err(SsdcError::config(format!(
                "the envelope-smoothed path supports spg-smooth and svrg; {} needs a subgradient \
                 bound the smoothed complement cannot provide",
                other.name()
            )));
        }
    }
    let d = problem.dim();
    let base_r = problem.r().clone();
    let env = MoreauEnvelope::new(base_r.clone(), mu)?;
    let complement: Arc<dyn ConvexOracle> = Arc::new(MoreauComplement::new(env, d)?);
    let h_slot: Arc<dyn ConvexOracle> =
        Arc::new(SumOracle::new(vec![problem.h_uncounted(), complement])?);
    let constants = ProblemConstants {
        smoothness: problem.smoothness(),
        grad_bound: None,
        reg_bound: None,
        gap_bound: problem.constants().gap_bound,
        holder: None,
    };
    let surrogate =
        DcProblem::new(problem.g_uncounted(), h_slot, Arc::new(SqL2::new(1.0 / mu)?), constants)?;

    let mut report = ssdc_run(&surrogate, solver, schedule, stages, law, seed, opts)?;
    let w_tau = base_r.prox(report.x_tau.as_slice(), mu);
    let prox_residual = report.x_tau.dist(&w_tau);
    report.moreau = Some(MoreauInfo { mu, w_tau, prox_residual });
    Ok(report)
}

/// Regularity class of the original regularizer, for picking `μ` to hit a
/// target accuracy `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingTarget {
    /// `r` Lipschitz on its domain: `μ = ε`.
    LipschitzR,
    /// `r` merely lower bounded: `μ = ε²`.
    LowerBoundedR,
    /// `r` with compact domain: `μ = ε²`.
    CompactR,
}

pub fn mu_for_target(target: SmoothingTarget, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SsdcError::parameter(format!(
            "target accuracy must lie in (0, 1), got {eps}"
        )));
    }
    Ok(match target {
        SmoothingTarget::LipschitzR => eps,
        SmoothingTarget::LowerBoundedR | SmoothingTarget::CompactR => eps * eps,
    })
}
