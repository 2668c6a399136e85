//! Experiment orchestration: build a problem from a config, run every
//! variant × seed replicate in a worker pool, and write plot-ready traces.
//!
//! Outputs per experiment:
//! * `trace.csv` with the fixed header
//!   `variant,seed,stage,grad_evals,objective,g_gamma_norm` and one stage-0
//!   row per run carrying the initial objective,
//! * `summary.json` with per-run status, the sampled stage, an iterate
//!   digest, and wall times (wall times never enter the CSV so repeated runs
//!   are byte-identical).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use ssdc::{
    prox_point, ssdc_moreau_run, ssdc_run, DcProblem, HBatch, ProblemConstants, RunOptions,
    RunReport, Vector,
};
use ssdc_data::{
    build_erm_dc, build_erm_nonconvex, build_erm_plain, gen_synthetic, loss_smoothness_bound,
    read_libsvm, Dataset,
};
use thiserror::Error;

use crate::baselines::{prox_gd, prox_sgd, BaselineReport};
use crate::config::{ConfigError, ConstantOverrides, ExperimentConfig, ProblemSource, RegSpec, Variant};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] ssdc_data::DataError),
    #[error(transparent)]
    Core(#[from] ssdc::SsdcError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Loads and scales the dataset a config points at.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    let mut data = match &cfg.source {
        ProblemSource::Synthetic(spec) => gen_synthetic(spec)?,
        ProblemSource::Libsvm { path, task } => read_libsvm(path, *task)?,
    };
    cfg.scale.apply(&mut data);
    Ok(data)
}

/// Assembles the optimization problem a config describes.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<DcProblem, CliError> {
    let data = load_dataset(cfg)?;
    let problem = match (&cfg.reg, cfg.loss.is_convex()) {
        (RegSpec::Penalty(p), true) => build_erm_dc(&data, cfg.loss, *p, cfg.ridge)?,
        (RegSpec::Penalty(_), false) => {
            return Err(invalid(
                "difference-of-convex penalties pair with convex losses; use a plain \
                 regularizer (l1/l0/lp_half/none) with non-convex losses",
            ));
        }
        (plain, true) => {
            let reg = plain.plain_regularizer().expect("plain kinds always build");
            build_erm_plain(&data, cfg.loss, reg, cfg.ridge)?
        }
        (plain, false) => {
            let reg = plain.plain_regularizer().expect("plain kinds always build");
            let l_loss = loss_smoothness_bound(&data, &cfg.loss).ok_or_else(|| {
                invalid("non-convex losses need a curvature bound to split; none available")
            })?;
            build_erm_nonconvex(&data, cfg.loss, reg, cfg.ridge, l_loss)?
        }
    };
    apply_overrides(problem, &cfg.constants)
}

fn apply_overrides(p: DcProblem, o: &ConstantOverrides) -> Result<DcProblem, CliError> {
    if o.smoothness.is_none() && o.grad_bound.is_none() && o.reg_bound.is_none() && o.gap_bound.is_none() {
        return Ok(p);
    }
    let mut c: ProblemConstants = *p.constants();
    if o.smoothness.is_some() {
        c.smoothness = o.smoothness;
    }
    if o.grad_bound.is_some() {
        c.grad_bound = o.grad_bound;
    }
    if o.reg_bound.is_some() {
        c.reg_bound = o.reg_bound;
    }
    if o.gap_bound.is_some() {
        c.gap_bound = o.gap_bound;
    }
    Ok(DcProblem::new(p.g_uncounted(), p.h_uncounted(), p.r().clone(), c)?)
}

/// One CSV data row (the variant and seed columns are added at write time).
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub stage: usize,
    pub grad_evals: u64,
    pub objective: f64,
    pub g_gamma_norm: Option<f64>,
}

/// Per-run statistics for the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    pub grad_evals: u64,
    pub final_objective: f64,
    /// FNV-1a hash of the reported iterate's bytes, hex encoded.
    pub iterate_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moreau_prox_residual: Option<f64>,
}

/// Outcome of one (variant, seed) replicate.
#[derive(Debug)]
pub struct JobResult {
    pub variant: &'static str,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub stats: Result<RunStats, String>,
    pub wall_ms: u64,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    variant: &'static str,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    #[serde(flatten)]
    stats: Option<&'a RunStats>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    total: usize,
    failed: usize,
    wall_ms: u64,
    runs: Vec<RunSummary<'a>>,
}

/// Paths and counts the `run` verb hands back to the binary.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub total: usize,
    pub failed: usize,
}

/// 64-bit FNV-1a over the little-endian bytes of the coordinates.
pub fn iterate_digest(x: &Vector) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in x.iter() {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Worker-pool size: the `SSDC_THREADS` environment variable wins, then the
/// config key, then the rayon default (available cores).
fn thread_count(cfg: &ExperimentConfig) -> Result<Option<usize>, CliError> {
    if let Ok(raw) = std::env::var("SSDC_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| invalid(format!("SSDC_THREADS must be a positive integer, got '{raw}'")))?;
        if n == 0 {
            return Err(invalid("SSDC_THREADS must be positive"));
        }
        return Ok(Some(n));
    }
    Ok(cfg.threads)
}

fn record_points(cfg: &ExperimentConfig) -> usize {
    if cfg.stages > 0 {
        cfg.stages
    } else {
        20
    }
}

fn baseline_outcome(report: BaselineReport) -> (Vec<TraceRow>, RunStats) {
    let mut rows = vec![TraceRow {
        stage: 0,
        grad_evals: 0,
        objective: report.initial_objective,
        g_gamma_norm: None,
    }];
    rows.extend(report.rows.iter().map(|r| TraceRow {
        stage: r.pass,
        grad_evals: r.grad_evals,
        objective: r.objective,
        g_gamma_norm: None,
    }));
    let stats = RunStats {
        tau: None,
        grad_evals: report.grad_evals,
        final_objective: report.final_objective,
        iterate_digest: iterate_digest(&report.x_final),
        moreau_prox_residual: None,
    };
    (rows, stats)
}

fn stagewise_outcome(report: RunReport) -> (Vec<TraceRow>, RunStats) {
    let mut rows = vec![TraceRow {
        stage: 0,
        grad_evals: 0,
        objective: report.initial_objective,
        g_gamma_norm: None,
    }];
    rows.extend(report.stages.iter().map(|s| TraceRow {
        stage: s.stage,
        grad_evals: s.grad_evals,
        objective: s.objective,
        g_gamma_norm: s.g_gamma_norm,
    }));
    let stats = RunStats {
        tau: Some(report.tau),
        grad_evals: report.grad_evals,
        final_objective: report.final_objective,
        iterate_digest: iterate_digest(&report.x_tau),
        moreau_prox_residual: report.moreau.as_ref().map(|m| m.prox_residual),
    };
    (rows, stats)
}

/// Runs one replicate on a fresh copy of the problem.
pub fn run_one(
    problem: &DcProblem,
    cfg: &ExperimentConfig,
    variant: Variant,
    seed: u64,
) -> JobResult {
    let fresh = problem.fresh();
    let start = Instant::now();
    let outcome = execute(&fresh, cfg, variant, seed);
    let wall_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok((rows, stats)) => JobResult { variant: variant.name(), seed, rows, stats: Ok(stats), wall_ms },
        Err(e) => JobResult {
            variant: variant.name(),
            seed,
            rows: Vec::new(),
            stats: Err(e.to_string()),
            wall_ms,
        },
    }
}

fn execute(
    problem: &DcProblem,
    cfg: &ExperimentConfig,
    variant: Variant,
    seed: u64,
) -> Result<(Vec<TraceRow>, RunStats), CliError> {
    match variant {
        Variant::ProxGd => {
            let budget = cfg.budget.ok_or_else(|| invalid("baselines need run.budget"))?;
            Ok(baseline_outcome(prox_gd(problem, None, budget, record_points(cfg))?))
        }
        Variant::ProxSgd => {
            let budget = cfg.budget.ok_or_else(|| invalid("baselines need run.budget"))?;
            Ok(baseline_outcome(prox_sgd(
                problem,
                None,
                cfg.eta0,
                seed,
                budget,
                record_points(cfg),
            )?))
        }
        _ => {
            let solver = variant.solver(cfg.adagrad).expect("stagewise variant");
            let schedule = cfg.gamma.build(problem.smoothness())?;
            let opts = RunOptions {
                x0: None,
                h_batch: HBatch::Full,
                trace_stride: cfg.trace_stride,
                trace_tol: 1e-4,
                budget: cfg.budget,
            };
            let report = if variant.is_moreau() {
                let eps = cfg.moreau_eps.ok_or_else(|| invalid("smoothed variants need moreau.eps"))?;
                let mu = ssdc::mu_for_target(cfg.moreau_target, eps)?;
                ssdc_moreau_run(problem, mu, &solver, &schedule, cfg.stages, &cfg.law, seed, &opts)?
            } else {
                ssdc_run(problem, &solver, &schedule, cfg.stages, &cfg.law, seed, &opts)?
            };
            Ok(stagewise_outcome(report))
        }
    }
}

fn push_csv_row(csv: &mut String, variant: &str, seed: u64, row: &TraceRow) {
    let _ = write!(csv, "{variant},{seed},{},{},{}", row.stage, row.grad_evals, row.objective);
    match row.g_gamma_norm {
        Some(n) => {
            let _ = writeln!(csv, ",{n}");
        }
        None => csv.push_str(",\n"),
    }
}

/// Renders the full trace CSV for a slice of job results.
pub fn render_csv(results: &[JobResult]) -> String {
    let mut csv = String::from("variant,seed,stage,grad_evals,objective,g_gamma_norm\n");
    for job in results {
        for row in &job.rows {
            push_csv_row(&mut csv, job.variant, job.seed, row);
        }
    }
    csv
}

/// Runs every variant × seed replicate and returns results in config order.
pub fn run_all(cfg: &ExperimentConfig, problem: &DcProblem) -> Result<Vec<JobResult>, CliError> {
    let jobs: Vec<(Variant, u64)> = cfg
        .variants
        .iter()
        .flat_map(|v| cfg.seeds.iter().map(move |s| (*v, *s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cfg)?.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(variant, seed)| run_one(problem, cfg, variant, seed))
            .collect()
    }))
}

/// The `run` verb: execute all replicates and write `trace.csv` plus
/// `summary.json` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig, quiet: bool) -> Result<ExperimentOutput, CliError> {
    let started = Instant::now();
    fs::create_dir_all(&cfg.out_dir)?;
    let problem = build_problem(cfg)?;
    let results = run_all(cfg, &problem)?;

    let csv_path = cfg.out_dir.join("trace.csv");
    fs::write(&csv_path, render_csv(&results))?;

    let failed = results.iter().filter(|r| r.stats.is_err()).count();
    let runs: Vec<RunSummary> = results
        .iter()
        .map(|r| match &r.stats {
            Ok(stats) => RunSummary {
                variant: r.variant,
                seed: r.seed,
                status: "ok",
                error: None,
                stats: Some(stats),
                wall_ms: r.wall_ms,
            },
            Err(e) => RunSummary {
                variant: r.variant,
                seed: r.seed,
                status: "error",
                error: Some(e.as_str()),
                stats: None,
                wall_ms: r.wall_ms,
            },
        })
        .collect();
    let summary = SummaryFile {
        total: results.len(),
        failed,
        wall_ms: started.elapsed().as_millis() as u64,
        runs,
    };
    let summary_path = cfg.out_dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;

    if !quiet {
        for r in &results {
            match &r.stats {
                Ok(s) => println!(
                    "{:<18} seed {:<4} ok    F = {:<12.6e} evals = {:<10} {} ms",
                    r.variant, r.seed, s.final_objective, s.grad_evals, r.wall_ms
                ),
                Err(e) => println!("{:<18} seed {:<4} error {e}", r.variant, r.seed),
            }
        }
        println!("traces:  {}", csv_path.display());
        println!("summary: {}", summary_path.display());
    }

    Ok(ExperimentOutput { csv_path, summary_path, total: results.len(), failed })
}

#[derive(Debug, Serialize)]
pub struct TuneCell {
    pub variant: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct TunePoint {
    pub value: f64,
    pub cells: Vec<TuneCell>,
    /// Lowest final objective across this point's successful runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TuneReport {
    pub param: String,
    pub holdout_seed: u64,
    pub points: Vec<TunePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_objective: Option<f64>,
}

/// The `tune` verb: run every grid value on the holdout seed and pick the
/// value with the lowest final objective, ties going to the smaller value.
pub fn tune(cfg: &ExperimentConfig, quiet: bool) -> Result<TuneReport, CliError> {
    let spec = cfg
        .tune
        .clone()
        .ok_or_else(|| invalid("config has no tune.param / tune.values block"))?;
    fs::create_dir_all(&cfg.out_dir)?;

    let mut points = Vec::new();
    for &value in &spec.values {
        let sub = cfg.sweep_point(&spec.param, value, spec.seed)?;
        let point = match build_problem(&sub) {
            Ok(problem) => {
                let results = run_all(&sub, &problem)?;
                let cells: Vec<TuneCell> = results
                    .iter()
                    .map(|r| match &r.stats {
                        Ok(s) => TuneCell {
                            variant: r.variant,
                            status: "ok",
                            final_objective: Some(s.final_objective),
                            error: None,
                        },
                        Err(e) => TuneCell {
                            variant: r.variant,
                            status: "error",
                            final_objective: None,
                            error: Some(e.clone()),
                        },
                    })
                    .collect();
                let score = cells
                    .iter()
                    .filter_map(|c| c.final_objective)
                    .filter(|v| v.is_finite())
                    .fold(None::<f64>, |acc, v| Some(acc.map_or(v, |a| a.min(v))));
                TunePoint { value, cells, score }
            }
            // A grid value can make the problem itself unbuildable (say a
            // negative penalty weight); record it as a failed point.
            Err(e) => TunePoint {
                value,
                cells: vec![TuneCell {
                    variant: "setup",
                    status: "error",
                    final_objective: None,
                    error: Some(e.to_string()),
                }],
                score: None,
            },
        };
        points.push(point);
    }

    let mut best: Option<(f64, f64)> = None;
    for p in &points {
        if let Some(score) = p.score {
            let better = match best {
                None => true,
                Some((bs, bv)) => score < bs || (score == bs && p.value < bv),
            };
            if better {
                best = Some((score, p.value));
            }
        }
    }

    let report = TuneReport {
        param: spec.param.clone(),
        holdout_seed: spec.seed,
        points,
        best_value: best.map(|(_, v)| v),
        best_objective: best.map(|(s, _)| s),
    };
    fs::write(cfg.out_dir.join("tune.json"), serde_json::to_string_pretty(&report)?)?;

    if !quiet {
        println!("tuning {} on holdout seed {}", report.param, report.holdout_seed);
        for p in &report.points {
            match p.score {
                Some(s) => println!("  {:<12} -> {:.6e}", p.value, s),
                None => println!("  {:<12} -> failed", p.value),
            }
        }
        match report.best_value {
            Some(v) => println!("best: {} = {v}", report.param),
            None => println!("best: none (all grid points failed)"),
        }
    }
    Ok(report)
}

/// The `gen-data` verb: sample the synthetic spec and write it as libsvm
/// text (dense 1-based indices). Returns the number of rows written.
pub fn gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<usize, CliError> {
    let spec = match &cfg.source {
        ProblemSource::Synthetic(s) => *s,
        ProblemSource::Libsvm { .. } => {
            return Err(invalid("gen-data needs problem.source = synthetic"));
        }
    };
    let data = gen_synthetic(&spec)?;
    let mut text = String::new();
    for i in 0..data.n() {
        let _ = write!(text, "{}", data.label(i));
        for (j, v) in data.row(i).iter().enumerate() {
            let _ = write!(text, " {}:{}", j + 1, v);
        }
        text.push('\n');
    }
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(out, text)?;
    Ok(data.n())
}

/// The `eval-crit` verb: read an iterate (whitespace-separated floats) and
/// report the gradient-mapping norm of the config's problem at that point,
/// using the stage-1 curvature and the certification tolerance 1e-8.
pub fn eval_crit(cfg: &ExperimentConfig, iterate: &Path) -> Result<serde_json::Value, CliError> {
    let problem = build_problem(cfg)?;
    let text = fs::read_to_string(iterate)?;
    let mut coords = Vec::new();
    for tok in text.split_whitespace() {
        let v: f64 = tok
            .parse()
            .map_err(|_| invalid(format!("iterate file: not a number: '{tok}'")))?;
        coords.push(v);
    }
    let gamma = cfg.gamma.build(problem.smoothness())?.value(1);
    let est = prox_point(&problem, &coords, gamma, 1e-8)?;
    Ok(serde_json::json!({
        "gamma": gamma,
        "g_gamma_norm": est.g_gamma_norm,
        "subproblem_gap_bound": est.subproblem_gap_bound,
        "certified": est.certified,
        "p_gamma": est.p_gamma.as_slice(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_order_sensitive_and_stable() {
        let a = Vector::from_vec(vec![1.0, 2.0]).unwrap();
        let b = Vector::from_vec(vec![2.0, 1.0]).unwrap();
        assert_eq!(iterate_digest(&a), iterate_digest(&a));
        assert_ne!(iterate_digest(&a), iterate_digest(&b));
        assert_eq!(iterate_digest(&a).len(), 16);
    }

    #[test]
    fn csv_rows_render_with_an_empty_trace_cell() {
        let job = JobResult {
            variant: "svrg",
            seed: 3,
            rows: vec![
                TraceRow { stage: 0, grad_evals: 0, objective: 1.5, g_gamma_norm: None },
                TraceRow { stage: 1, grad_evals: 10, objective: 0.5, g_gamma_norm: Some(0.25) },
            ],
            stats: Err("unused".into()),
            wall_ms: 0,
        };
        let csv = render_csv(&[job]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "variant,seed,stage,grad_evals,objective,g_gamma_norm");
        assert_eq!(lines[1], "svrg,3,0,0,1.5,");
        assert_eq!(lines[2], "svrg,3,1,10,0.5,0.25");
    }

    #[test]
    fn problem_building_dispatches_on_loss_and_regularizer() {
        let base = "\
problem.source = synthetic
synthetic.n = 40
synthetic.d = 3
synthetic.seed = 5
run.variants = svrg
run.stages = 2
run.seeds = 1
";
        // Convex loss + DC penalty -> concave slot is active.
        let cfg = ExperimentConfig::from_text(&format!(
            "{base}loss.kind = logistic\nreg.kind = mcp\nreg.lambda = 0.2\nreg.theta = 2\n"
        ))
        .unwrap();
        let p = build_problem(&cfg).unwrap();
        assert_eq!(p.dim(), 3);
        assert!(p.h_uncounted().smoothness().unwrap() > 0.0);

        // Convex loss + plain regularizer -> concave slot is empty.
        let cfg = ExperimentConfig::from_text(&format!(
            "{base}loss.kind = logistic\nreg.kind = l1\nreg.lambda = 0.2\n"
        ))
        .unwrap();
        let p = build_problem(&cfg).unwrap();
        assert_eq!(p.h_uncounted().smoothness(), Some(0.0));

        // Non-convex loss -> curvature split carries the loss bound.
        let cfg = ExperimentConfig::from_text(&format!(
            "{base}loss.kind = sigmoid_ls\nreg.kind = l1\nreg.lambda = 0.2\n"
        ))
        .unwrap();
        let p = build_problem(&cfg).unwrap();
        assert!(p.h_uncounted().smoothness().unwrap() > 0.0);

        // Non-convex loss + DC penalty is rejected.
        let cfg = ExperimentConfig::from_text(&format!(
            "{base}loss.kind = sigmoid_ls\nreg.kind = scad\nreg.lambda = 0.2\nreg.theta = 3.7\n"
        ))
        .unwrap();
        assert!(matches!(build_problem(&cfg), Err(CliError::Invalid(_))));
    }

    #[test]
    fn constant_overrides_replace_builder_values() {
        let cfg = ExperimentConfig::from_text(
            "\
problem.source = synthetic
synthetic.n = 30
synthetic.d = 3
loss.kind = logistic
reg.kind = l1
reg.lambda = 0.1
run.variants = svrg
run.stages = 2
run.seeds = 1
constants.smoothness = 42
constants.gap_bound = 7
",
        )
        .unwrap();
        let p = build_problem(&cfg).unwrap();
        assert_eq!(p.smoothness(), Some(42.0));
        assert_eq!(p.constants().gap_bound, Some(7.0));
    }
}
