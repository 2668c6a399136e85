//! Assembling `g + r − h` problems from data.
//!
//! Three shapes are covered. Regularized ERM with a difference-of-convex
//! penalty keeps the convex loss sum in `g` and moves the penalty's concave
//! correction into `h`. Smooth non-convex ERM adds `(L/2)‖x‖²` to both sides
//! so `g` stays convex while `h` absorbs the added quadratic. Unbiased
//! positive-unlabeled risk places the sign-flipped positive term in `h`.

use std::sync::Arc;

use ssdc::{
    ConvexOracle, DcPenalty, DcProblem, IsoQuadratic, PenaltyComplement, ProblemConstants,
    Regularizer, Vector, ZeroOracle, ZeroReg,
};

use crate::dataset::Dataset;
use crate::losses::{LossKind, LossSpec};
use crate::DataError;

/// Finite-sum oracle `(1/n)Σ wᵢ·ℓ(aᵢᵀx, bᵢ) + (ridge/2)‖x‖²` with the ridge
/// distributed into every component.
struct WeightedErm {
    rows: Vec<Vec<f64>>,
    labels: Vec<f64>,
    weights: Vec<f64>,
    loss: LossSpec,
    ridge: f64,
    smoothness: Option<f64>,
    grad_bound: Option<f64>,
}

impl WeightedErm {
    fn score(&self, k: usize, x: &[f64]) -> f64 {
        self.rows[k].iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

impl ConvexOracle for WeightedErm {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.rows.len() as f64;
        let mut total = 0.0;
        for k in 0..self.rows.len() {
            total += self.weights[k] * self.loss.value(self.score(k, x), self.labels[k]);
        }
        let sq: f64 = x.iter().map(|v| v * v).sum();
        total / n + 0.5 * self.ridge * sq
    }

    fn full_subgradient(&self, x: &[f64]) -> Vector {
        let n = self.rows.len() as f64;
        let mut grad = vec![0.0; x.len()];
        for k in 0..self.rows.len() {
            let slope =
                self.weights[k] * self.loss.derivative(self.score(k, x), self.labels[k]) / n;
            for (g, a) in grad.iter_mut().zip(&self.rows[k]) {
                *g += slope * a;
            }
        }
        for (g, v) in grad.iter_mut().zip(x) {
            *g += self.ridge * v;
        }
        Vector::from_vec(grad).expect("finite data and iterate")
    }

    fn component_count(&self) -> usize {
        self.rows.len()
    }

    fn component_gradient(&self, i: usize, x: &[f64]) -> Vector {
        let slope = self.weights[i] * self.loss.derivative(self.score(i, x), self.labels[i]);
        let mut grad: Vec<f64> = self.rows[i].iter().map(|a| slope * a).collect();
        for (g, v) in grad.iter_mut().zip(x) {
            *g += self.ridge * v;
        }
        Vector::from_vec(grad).expect("finite data and iterate")
    }

    fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    fn grad_bound(&self) -> Option<f64> {
        self.grad_bound
    }
}

/// Conservative smoothness bound for the mean loss over a dataset: the
/// per-sample score curvature times the largest squared row norm. `None` for
/// kinked losses.
pub fn loss_smoothness_bound(data: &Dataset, loss: &LossSpec) -> Option<f64> {
    loss.curvature_bound().map(|c| c * data.max_row_norm_sq())
}

fn check_ridge(lambda: f64) -> Result<(), DataError> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(DataError::invalid(format!(
            "ridge weight must be nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// Regularized ERM with a difference-of-convex penalty:
/// `g = (1/n)Σ ℓ(aᵢᵀx, bᵢ) + (λ_reg/2)‖x‖²`, `r` = the penalty's convex
/// part, `h` = its smooth concave correction.
pub fn build_erm_dc(
    data: &Dataset,
    loss: LossSpec,
    penalty: DcPenalty,
    lambda_reg: f64,
) -> Result<DcProblem, DataError> {
    if !loss.is_convex() {
        return Err(DataError::invalid(format!(
            "{:?} is not convex in the score; use the non-convex ERM builder",
            loss.kind()
        )));
    }
    check_ridge(lambda_reg)?;
    let smoothness = loss_smoothness_bound(data, &loss).map(|l| l + lambda_reg);
    let grad_bound = match loss.slope_bound() {
        Some(s) if lambda_reg == 0.0 => Some(s * data.max_row_norm()),
        _ => None,
    };
    let g = Arc::new(WeightedErm {
        rows: data.rows().to_vec(),
        labels: data.labels().to_vec(),
        weights: vec![1.0; data.n()],
        loss,
        ridge: lambda_reg,
        smoothness,
        grad_bound,
    });
    let h: Arc<dyn ConvexOracle> = Arc::new(PenaltyComplement::new(penalty, data.d())?);
    let problem = DcProblem::new(g, h, Arc::new(penalty.r1()), ProblemConstants::default())?;
    Ok(problem)
}

/// ERM with a convex loss and an arbitrary proximable regularizer; the
/// concave slot is empty. Covers plain ℓ1 baselines as well as hard
/// regularizers destined for the envelope-smoothed driver.
pub fn build_erm_plain(
    data: &Dataset,
    loss: LossSpec,
    reg: Arc<dyn Regularizer>,
    lambda_reg: f64,
) -> Result<DcProblem, DataError> {
    if !loss.is_convex() {
        return Err(DataError::invalid(format!(
            "{:?} is not convex in the score; use the non-convex ERM builder",
            loss.kind()
        )));
    }
    check_ridge(lambda_reg)?;
    let smoothness = loss_smoothness_bound(data, &loss).map(|l| l + lambda_reg);
    let grad_bound = match loss.slope_bound() {
        Some(s) if lambda_reg == 0.0 => Some(s * data.max_row_norm()),
        _ => None,
    };
    let g = Arc::new(WeightedErm {
        rows: data.rows().to_vec(),
        labels: data.labels().to_vec(),
        weights: vec![1.0; data.n()],
        loss,
        ridge: lambda_reg,
        smoothness,
        grad_bound,
    });
    let h = Arc::new(ZeroOracle { dim: data.d() });
    let problem = DcProblem::new(g, h, reg, ProblemConstants::default())?;
    Ok(problem)
}

/// ERM with a smooth non-convex loss, made difference-of-convex by adding
/// `(L/2)‖x‖²` to the loss sum (keeping `g` convex) and placing the same
/// quadratic in `h`. The non-convex regularizer rides along in the `r` slot
/// for the envelope-smoothed driver.
pub fn build_erm_nonconvex(
    data: &Dataset,
    loss: LossSpec,
    reg: Arc<dyn Regularizer>,
    lambda_reg: f64,
    l_loss: f64,
) -> Result<DcProblem, DataError> {
    if !matches!(loss.kind(), LossKind::SigmoidLs | LossKind::TruncatedLs) {
        return Err(DataError::invalid(format!(
            "{:?} is convex; use the DC-penalty ERM builder",
            loss.kind()
        )));
    }
    if l_loss <= 0.0 || !l_loss.is_finite() {
        return Err(DataError::invalid(format!(
            "loss smoothness bound must be positive, got {l_loss}"
        )));
    }
    check_ridge(lambda_reg)?;
    let d = data.d();
    let smoothness =
        loss_smoothness_bound(data, &loss).map(|l| l + l_loss + lambda_reg);
    let g = Arc::new(WeightedErm {
        rows: data.rows().to_vec(),
        labels: data.labels().to_vec(),
        weights: vec![1.0; data.n()],
        loss,
        ridge: l_loss + lambda_reg,
        smoothness,
        grad_bound: None,
    });
    let h = Arc::new(IsoQuadratic::new(Vector::zeros(d), l_loss)?);
    let problem = DcProblem::new(g, h, reg, ProblemConstants::default())?;
    Ok(problem)
}

/// Unbiased positive-unlabeled risk. With class prior `π_p`, positives
/// `z_i` and unlabeled `z_j`:
/// `g = (π_p/n₊)Σ ℓ(x; z_i, +1) + (1/n_u)Σ ℓ(x; z_j, −1) + (λ/2)‖x‖²` and
/// `h = (π_p/n₊)Σ ℓ(x; z_i, −1)`. A zero prior degenerates to all-negative
/// ERM with `h ≡ 0`.
pub fn build_pu_problem(
    positives: &Dataset,
    unlabeled: &Dataset,
    pi_p: f64,
    loss: LossSpec,
    lambda_l2: f64,
) -> Result<DcProblem, DataError> {
    if !(0.0..1.0).contains(&pi_p) {
        return Err(DataError::invalid(format!(
            "class prior must lie in [0, 1), got {pi_p}"
        )));
    }
    if !matches!(loss.kind(), LossKind::Hinge | LossKind::Absolute) {
        return Err(DataError::invalid(format!(
            "positive-unlabeled risk expects a hinge or absolute loss, got {:?}",
            loss.kind()
        )));
    }
    check_ridge(lambda_l2)?;
    if positives.d() != unlabeled.d() {
        return Err(DataError::invalid(format!(
            "positives have {} features, unlabeled {}",
            positives.d(),
            unlabeled.d()
        )));
    }
    let d = positives.d();
    let n_pos = positives.n();
    let n_unl = unlabeled.n();
    let m = (n_pos + n_unl) as f64;

    // Components are reweighted so a uniform draw over all m rows is an
    // unbiased estimate of the weighted two-sample sum.
    let mut rows = positives.rows().to_vec();
    rows.extend(unlabeled.rows().iter().cloned());
    let mut labels = vec![1.0; n_pos];
    labels.extend(std::iter::repeat(-1.0).take(n_unl));
    let mut weights = vec![m * pi_p / n_pos as f64; n_pos];
    weights.extend(std::iter::repeat(m / n_unl as f64).take(n_unl));

    let slope = loss.slope_bound().expect("hinge and absolute have bounded slope");
    let max_weight = weights.iter().fold(0.0f64, |a, &b| a.max(b));
    let row_norm = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let g_bound = if lambda_l2 == 0.0 { Some(slope * max_weight * row_norm) } else { None };
    let g = Arc::new(WeightedErm {
        rows,
        labels,
        weights,
        loss,
        ridge: lambda_l2,
        smoothness: None,
        grad_bound: g_bound,
    });

    let h: Arc<dyn ConvexOracle> = if pi_p == 0.0 {
        Arc::new(ZeroOracle { dim: d })
    } else {
        Arc::new(WeightedErm {
            rows: positives.rows().to_vec(),
            labels: vec![-1.0; n_pos],
            weights: vec![pi_p; n_pos],
            loss,
            ridge: 0.0,
            smoothness: None,
            grad_bound: Some(slope * pi_p * positives.max_row_norm()),
        })
    };
    let problem = DcProblem::new(g, h, Arc::new(ZeroReg), ProblemConstants::default())?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Task;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use ssdc::PenaltyKind;

    fn tiny_regression() -> Dataset {
        Dataset::new(
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]],
            vec![1.0, -2.0, 0.5],
            Task::Regression,
        )
        .unwrap()
    }

    fn tiny_classification() -> Dataset {
        Dataset::new(
            vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![-1.0, 0.5], vec![-2.0, -1.0]],
            vec![1.0, 1.0, -1.0, -1.0],
            Task::Classification,
        )
        .unwrap()
    }

    #[test]
    fn erm_dc_objective_at_zero_is_the_mean_loss() {
        let data = tiny_regression();
        let penalty = DcPenalty::new(PenaltyKind::Mcp, 1.0, 2.0).unwrap();
        let problem = build_erm_dc(&data, LossSpec::squared(), penalty, 0.0).unwrap();
        let want: f64 =
            data.labels().iter().map(|b| 0.5 * b * b).sum::<f64>() / data.n() as f64;
        let got = problem.objective_value(&[0.0, 0.0]).unwrap();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");

        let logit = build_erm_dc(
            &tiny_classification(),
            LossSpec::logistic(),
            DcPenalty::new(PenaltyKind::Scad, 0.1, 3.7).unwrap(),
            0.0,
        )
        .unwrap();
        let at_zero = logit.objective_value(&[0.0, 0.0]).unwrap();
        assert!((at_zero - (2.0f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn erm_dc_forwards_the_concave_smoothness() {
        let penalty = DcPenalty::new(PenaltyKind::Mcp, 1.0, 2.0).unwrap();
        let problem =
            build_erm_dc(&tiny_regression(), LossSpec::squared(), penalty, 0.0).unwrap();
        assert_eq!(problem.h_uncounted().smoothness(), Some(0.5));
    }

    #[test]
    fn erm_dc_reassembles_the_penalty() {
        let data = tiny_regression();
        let penalty = DcPenalty::new(PenaltyKind::Lsp, 0.7, 1.3).unwrap();
        let problem = build_erm_dc(&data, LossSpec::squared(), penalty, 0.0).unwrap();
        let loss = LossSpec::squared();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mean_loss: f64 = (0..data.n())
                .map(|i| {
                    let s: f64 = data.row(i).iter().zip(&x).map(|(a, v)| a * v).sum();
                    loss.value(s, data.label(i))
                })
                .sum::<f64>()
                / data.n() as f64;
            let want = mean_loss + penalty.value(&x);
            let got = problem.objective_value(&x).unwrap();
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn plain_erm_has_an_empty_concave_slot() {
        let data = tiny_classification();
        let problem = build_erm_plain(
            &data,
            LossSpec::logistic(),
            Arc::new(ssdc::L1::new(0.5).unwrap()),
            0.0,
        )
        .unwrap();
        let at_zero = problem.objective_value(&[0.0, 0.0]).unwrap();
        assert!((at_zero - (2.0f64).ln()).abs() < 1e-15);
        assert_eq!(problem.h_uncounted().full_cost(), 0);
        let shifted = problem.objective_value(&[2.0, 0.0]).unwrap();
        let base: f64 = (0..data.n())
            .map(|i| LossSpec::logistic().value(2.0 * data.row(i)[0], data.label(i)))
            .sum::<f64>()
            / data.n() as f64;
        assert!((shifted - base - 1.0).abs() < 1e-12, "l1 term adds 0.5·|2|");
        assert!(build_erm_plain(
            &data,
            LossSpec::sigmoid_ls(),
            Arc::new(ssdc::L1::new(0.5).unwrap()),
            0.0
        )
        .is_err());
    }

    #[test]
    fn erm_dc_rejects_nonconvex_losses_and_bad_ridge() {
        let penalty = DcPenalty::new(PenaltyKind::Mcp, 1.0, 2.0).unwrap();
        assert!(build_erm_dc(&tiny_regression(), LossSpec::sigmoid_ls(), penalty, 0.0).is_err());
        assert!(build_erm_dc(&tiny_regression(), LossSpec::squared(), penalty, -1.0).is_err());
    }

    #[test]
    fn erm_dc_ridge_shifts_constants_and_objective() {
        let data = tiny_regression();
        let penalty = DcPenalty::new(PenaltyKind::Mcp, 1.0, 2.0).unwrap();
        let plain = build_erm_dc(&data, LossSpec::squared(), penalty, 0.0).unwrap();
        let ridged = build_erm_dc(&data, LossSpec::squared(), penalty, 0.5).unwrap();
        let x = [1.0, -1.0];
        let gap = ridged.objective_value(&x).unwrap() - plain.objective_value(&x).unwrap();
        assert!((gap - 0.25 * 2.0).abs() < 1e-12, "ridge adds (λ/2)‖x‖²");
        let l_gap = ridged.g_uncounted().smoothness().unwrap()
            - plain.g_uncounted().smoothness().unwrap();
        assert!((l_gap - 0.5).abs() < 1e-12);

        // Squared loss has no uniform slope bound; logistic does, until a
        // ridge unbounds the gradient again.
        assert!(plain.g_uncounted().grad_bound().is_none());
        let cls = tiny_classification();
        let logit0 = build_erm_dc(&cls, LossSpec::logistic(), penalty, 0.0).unwrap();
        let logit1 = build_erm_dc(&cls, LossSpec::logistic(), penalty, 0.5).unwrap();
        assert!(logit0.g_uncounted().grad_bound().is_some());
        assert!(logit1.g_uncounted().grad_bound().is_none());
    }

    #[test]
    fn erm_component_average_matches_the_full_gradient() {
        let data = tiny_classification();
        let penalty = DcPenalty::new(PenaltyKind::Scad, 0.2, 3.0).unwrap();
        let problem = build_erm_dc(&data, LossSpec::logistic(), penalty, 0.0).unwrap();
        let g = problem.g_uncounted();
        let x = [0.3, -0.8];
        let full = g.full_subgradient(&x);
        let mut avg = Vector::zeros(2);
        for i in 0..g.component_count() {
            avg.add_scaled(1.0 / g.component_count() as f64, &g.component_gradient(i, &x));
        }
        assert!(full.dist(&avg) < 1e-12);
    }

    #[test]
    fn nonconvex_builder_splits_sigmoid_least_squares() {
        let data = tiny_classification();
        let l = loss_smoothness_bound(&data, &LossSpec::sigmoid_ls()).unwrap();
        let problem = build_erm_nonconvex(
            &data,
            LossSpec::sigmoid_ls(),
            Arc::new(ssdc::L0::new(0.1).unwrap()),
            0.0,
            l,
        )
        .unwrap();
        // At zero the added quadratics vanish: mean (b − 1/2)².
        let want: f64 = data
            .labels()
            .iter()
            .map(|b| (b - 0.5) * (b - 0.5))
            .sum::<f64>()
            / data.n() as f64;
        let got = problem.objective_value(&[0.0, 0.0]).unwrap();
        assert!((got - want).abs() < 1e-15);
        // g-side smoothness covers the loss curvature plus the added quadratic.
        assert!(problem.g_uncounted().smoothness().unwrap() >= 2.0 * l - 1e-12);
        assert_eq!(problem.h_uncounted().smoothness(), Some(l));
    }

    #[test]
    fn nonconvex_builder_validates_inputs() {
        let data = tiny_regression();
        let reg: Arc<dyn Regularizer> = Arc::new(ssdc::L0::new(0.1).unwrap());
        assert!(
            build_erm_nonconvex(&data, LossSpec::squared(), reg.clone(), 0.0, 1.0).is_err(),
            "convex losses belong to the DC builder"
        );
        assert!(build_erm_nonconvex(&data, LossSpec::sigmoid_ls(), reg, 0.0, 0.0).is_err());
    }

    #[test]
    fn nonconvex_g_components_pass_a_convexity_probe() {
        // The smoothness bound certifies convexity of f_i + (L/2)‖x‖². Start
        // from a deliberately small L and double the margin until the
        // numerical second-difference probe passes; the certified bound must
        // be at least as strong.
        let data = tiny_classification();
        let loss = LossSpec::sigmoid_ls();
        let base = 0.1 * data.max_row_norm_sq();
        let certified = loss_smoothness_bound(&data, &loss).unwrap();
        let mut margin = 1e-3;
        let mut passing = None;
        while margin <= 16.0 * certified {
            let l = base + margin;
            let problem = build_erm_nonconvex(
                &data,
                loss,
                Arc::new(ssdc::L0::new(0.1).unwrap()),
                0.0,
                l,
            )
            .unwrap();
            let g = problem.g_uncounted();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let h = 1e-4;
            let ok = (0..100).all(|_| {
                let i = rng.gen_range(0..g.component_count());
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let dir: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let probe = |t: f64| {
                    let y: Vec<f64> =
                        x.iter().zip(&dir).map(|(v, u)| v + t * u).collect();
                    // Component value = weighted loss + (ridge/2)‖y‖², probed
                    // through the average with single-row datasets being
                    // overkill; use the gradient along the direction instead.
                    g.component_gradient(i, &y)
                        .as_slice()
                        .iter()
                        .zip(&dir)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                };
                // Monotone directional derivative along the segment.
                probe(h) >= probe(-h) - 1e-9
            });
            if ok {
                passing = Some(l);
                break;
            }
            margin *= 2.0;
        }
        let l = passing.expect("some margin certifies convexity");
        assert!(
            l <= certified + 1e-9,
            "probe should pass at or below the certified bound {certified}, needed {l}"
        );
    }

    #[test]
    fn pu_objective_at_zero_is_one_for_hinge() {
        let pos = tiny_classification();
        let unl = tiny_regression();
        // Feature dimensions match (both 2); labels of the inputs are ignored.
        let problem = build_pu_problem(&pos, &unl, 0.3, LossSpec::hinge(), 0.0).unwrap();
        let got = problem.objective_value(&[0.0, 0.0]).unwrap();
        assert!((got - 1.0).abs() < 1e-15, "positive terms cancel at the origin: {got}");
    }

    #[test]
    fn pu_zero_prior_reduces_to_all_negative_erm() {
        let pos = tiny_classification();
        let unl = tiny_regression();
        let problem = build_pu_problem(&pos, &unl, 0.0, LossSpec::absolute(), 0.0).unwrap();
        let x = [0.7, -0.2];
        let loss = LossSpec::absolute();
        let want: f64 = unl
            .rows()
            .iter()
            .map(|row| {
                let s: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
                loss.value(s, -1.0)
            })
            .sum::<f64>()
            / unl.n() as f64;
        let got = problem.objective_value(&x).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert_eq!(problem.h_uncounted().full_cost(), 0, "degenerate prior zeroes h");
    }

    #[test]
    fn pu_validates_inputs() {
        let pos = tiny_classification();
        let unl = tiny_regression();
        assert!(build_pu_problem(&pos, &unl, 1.0, LossSpec::hinge(), 0.0).is_err());
        assert!(build_pu_problem(&pos, &unl, -0.1, LossSpec::hinge(), 0.0).is_err());
        assert!(build_pu_problem(&pos, &unl, 0.5, LossSpec::squared(), 0.0).is_err());
        let narrow =
            Dataset::new(vec![vec![1.0]], vec![1.0], Task::Classification).unwrap();
        assert!(build_pu_problem(&narrow, &unl, 0.5, LossSpec::hinge(), 0.0).is_err());
    }

    #[test]
    fn pu_parts_pass_a_midpoint_convexity_probe() {
        let pos = tiny_classification();
        let unl = tiny_regression();
        let problem = build_pu_problem(&pos, &unl, 0.4, LossSpec::hinge(), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for part in [problem.g_uncounted(), problem.h_uncounted()] {
            for _ in 0..200 {
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let mid: Vec<f64> =
                    x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                assert!(
                    part.value(&mid) <= 0.5 * (part.value(&x) + part.value(&y)) + 1e-10,
                    "midpoint convexity violated"
                );
            }
        }
    }

    #[test]
    fn pu_stochastic_draws_are_unbiased() {
        let pos = tiny_classification();
        let unl = tiny_regression();
        let problem = build_pu_problem(&pos, &unl, 0.25, LossSpec::hinge(), 0.0).unwrap();
        let g = problem.g_uncounted();
        let x = [0.4, 0.9];
        let full = g.full_subgradient(&x);
        let mut avg = Vector::zeros(2);
        let n = g.component_count();
        for i in 0..n {
            avg.add_scaled(1.0 / n as f64, &g.component_gradient(i, &x));
        }
        assert!(full.dist(&avg) < 1e-12, "component average equals the exact gradient");
    }
}
