//! Reference methods the stagewise runs are compared against.
//!
//! Both baselines spend a gradient-evaluation budget on the same metered
//! problem the stagewise driver uses, so traces are comparable
//! evaluation-for-evaluation:
//!
//! * [`prox_gd`]: deterministic proximal gradient with the fixed step `1/L`
//!   applied to the smoothed difference `∇g − ∇h`, composed with the
//!   regularizer's proximal map.
//! * [`prox_sgd`]: proximal stochastic subgradient with the classic decaying
//!   step `η₀/√t` on single-draw subgradients of both oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssdc::{ConvexOracle, DcProblem, Result, SsdcError, Vector};

/// Iterate norm beyond which a run is reported as diverged.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// One recorded point of a baseline trace.
#[derive(Debug, Clone)]
pub struct BaselineRow {
    /// 1-based recording index; plays the role of the stage column.
    pub pass: usize,
    /// Gradient evaluation units consumed so far in this run.
    pub grad_evals: u64,
    /// Objective value at the recording point.
    pub objective: f64,
}

/// Outcome of a budgeted baseline run.
#[derive(Debug, Clone)]
pub struct BaselineReport {
    pub initial_objective: f64,
    pub rows: Vec<BaselineRow>,
    pub x_final: Vector,
    pub final_objective: f64,
    /// Total gradient evaluation units this run consumed.
    pub grad_evals: u64,
}

fn check_budget(budget: u64) -> Result<()> {
    if budget == 0 {
        return Err(SsdcError::parameter("baseline budget must be positive"));
    }
    Ok(())
}

fn starting_point(problem: &DcProblem, x0: Option<&Vector>) -> Result<Vector> {
    match x0 {
        Some(x) => {
            if x.dim() != problem.dim() {
                return Err(SsdcError::parameter(format!(
                    "starting point has dimension {}, problem has {}",
                    x.dim(),
                    problem.dim()
                )));
            }
            Ok(x.clone())
        }
        None => Ok(Vector::zeros(problem.dim())),
    }
}

/// Evenly spaced evaluation-count thresholds at which a trace row is taken.
struct RecordPlan {
    thresholds: Vec<u64>,
    next: usize,
}

impl RecordPlan {
    fn new(budget: u64, points: usize) -> Self {
        let points = points.max(1) as u64;
        let thresholds = (1..=points)
            .map(|i| (budget.saturating_mul(i)) / points)
            .filter(|&t| t > 0)
            .collect();
        RecordPlan { thresholds, next: 0 }
    }

    /// Records at most one row per call, consuming every threshold the run
    /// has passed, so rows stay strictly increasing in evaluation count.
    fn observe(
        &mut self,
        used: u64,
        x: &[f64],
        problem: &DcProblem,
        rows: &mut Vec<BaselineRow>,
    ) -> Result<()> {
        if self.next >= self.thresholds.len() || used < self.thresholds[self.next] {
            return Ok(());
        }
        while self.next < self.thresholds.len() && used >= self.thresholds[self.next] {
            self.next += 1;
        }
        rows.push(BaselineRow {
            pass: rows.len() + 1,
            grad_evals: used,
            objective: problem.objective_value(x)?,
        });
        Ok(())
    }
}

fn guard(x: &Vector, context: &str) -> Result<()> {
    x.check_finite(context)?;
    let norm = x.norm();
    if norm > DIVERGENCE_LIMIT {
        return Err(SsdcError::Diverged { context: context.to_string(), norm });
    }
    Ok(())
}

fn finish(
    problem: &DcProblem,
    start_evals: u64,
    initial_objective: f64,
    mut rows: Vec<BaselineRow>,
    x: Vector,
) -> Result<BaselineReport> {
    let used = problem.grad_evals() - start_evals;
    let final_objective = problem.objective_value(x.as_slice())?;
    let record_final = match rows.last() {
        Some(last) => last.grad_evals < used,
        None => true,
    };
    if record_final {
        rows.push(BaselineRow { pass: rows.len() + 1, grad_evals: used, objective: final_objective });
    }
    Ok(BaselineReport { initial_objective, rows, x_final: x, final_objective, grad_evals: used })
}

/// Deterministic proximal gradient on `F = g + r − h` with step `1/L`.
///
/// Runs until the evaluation budget is spent, recording about
/// `record_points` evenly spaced trace rows. Requires the smoothness
/// constant of `g`.
pub fn prox_gd(
    problem: &DcProblem,
    x0: Option<&Vector>,
    budget: u64,
    record_points: usize,
) -> Result<BaselineReport> {
    check_budget(budget)?;
    let l = problem.smoothness().ok_or_else(|| {
        SsdcError::MissingConstant(
            "smoothness constant L of g (proximal-gradient step size)".into(),
        )
    })?;
    if l <= 0.0 {
        return Err(SsdcError::config(
            "proximal gradient needs strictly positive smoothness to set its step",
        ));
    }
    let step = 1.0 / l;
    let mut x = starting_point(problem, x0)?;
    let start_evals = problem.grad_evals();
    let initial_objective = problem.objective_value(x.as_slice())?;
    let mut plan = RecordPlan::new(budget, record_points);
    let mut rows = Vec::new();

    while problem.grad_evals() - start_evals < budget {
        let mut direction = problem.g().full_subgradient(x.as_slice());
        let dh = problem.h().full_subgradient(x.as_slice());
        direction.add_scaled(-1.0, &dh);
        let mut moved = x.clone();
        moved.add_scaled(-step, &direction);
        x = problem.r().prox(moved.as_slice(), step);
        guard(&x, "prox-gd iterate")?;
        plan.observe(problem.grad_evals() - start_evals, x.as_slice(), problem, &mut rows)?;
    }
    finish(problem, start_evals, initial_objective, rows, x)
}

/// Proximal stochastic subgradient with step `η_t = η₀/√t`.
///
/// Each iteration takes one stochastic draw from each oracle and a proximal
/// step on the regularizer, spending the budget in single-draw units.
pub fn prox_sgd(
    problem: &DcProblem,
    x0: Option<&Vector>,
    eta0: f64,
    seed: u64,
    budget: u64,
    record_points: usize,
) -> Result<BaselineReport> {
    check_budget(budget)?;
    if eta0 <= 0.0 || !eta0.is_finite() {
        return Err(SsdcError::parameter(format!(
            "baseline step scale eta0 must be positive, got {eta0}"
        )));
    }
    let mut x = starting_point(problem, x0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start_evals = problem.grad_evals();
    let initial_objective = problem.objective_value(x.as_slice())?;
    let mut plan = RecordPlan::new(budget, record_points);
    let mut rows = Vec::new();
    let mut t = 0u64;

    while problem.grad_evals() - start_evals < budget {
        t += 1;
        let eta = eta0 / (t as f64).sqrt();
        let mut direction = problem.g().stochastic_subgradient(x.as_slice(), &mut rng);
        let dh = problem.h().stochastic_subgradient(x.as_slice(), &mut rng);
        direction.add_scaled(-1.0, &dh);
        let mut moved = x.clone();
        moved.add_scaled(-eta, &direction);
        x = problem.r().prox(moved.as_slice(), eta);
        guard(&x, "prox-sgd iterate")?;
        plan.observe(problem.grad_evals() - start_evals, x.as_slice(), problem, &mut rows)?;
        if t == u64::MAX {
            break;
        }
    }
    finish(problem, start_evals, initial_objective, rows, x)
}
