//! Adaptive dual-averaging solver for a stage majorant.
//!
//! Maintains per-coordinate gradient column norms `s_{t,i} = ‖g_{1:t,i}‖₂`
//! and the diagonal metric `H_t = 2G·I + diag(s_t)`, then solves
//!
//! ```text
//! x_{t+1} = argmin_{x ∈ Ω} xᵀ(ḡ_t) + r(x) + (γ/2)‖x − x₁‖²
//!           + (1/(tη))·½(x − x₁)ᵀH_t(x − x₁),    ḡ_t = (1/t)Σ_{τ≤t} g_τ
//! ```
//!
//! coordinatewise (separable `r`), followed by a radial pullback into the
//! ball `Ω`. The concave slot stays frozen at the stage linearization. The
//! solver stops at the first `t` where the running stopping rule
//! `t ≥ M·max{a(2G + max_i s_i), Σ_i s_i/a, G_r‖x₁ − x_{t+1}‖/η}` holds and
//! returns the uniform average of `x_1..x_t`.

use rand::RngCore;

use super::{guard_divergence, project_ball, SolveOutput};
use crate::error::{Result, SsdcError};
use crate::majorant::MajorantSubproblem;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy)]
pub struct AdaGradConfig {
    /// Stage step scale `η`.
    pub eta: f64,
    /// Stopping-rule scale `M`.
    pub stop_scale: f64,
    /// Norm-balance parameter `a > 0` in the stopping rule.
    pub norm_balance: f64,
    /// Subgradient bound `G`; seeds the metric floor `H₀ = 2G·I`.
    pub grad_bound: f64,
    /// Regularizer subgradient bound `G_r`.
    pub reg_bound: f64,
    /// Hard iteration cap; hitting it sets the budget-capped flag.
    pub max_iterations: usize,
    /// Ball radius around the center; the driver sets `(2√d·G + G_r)/γ`.
    pub radius: f64,
}

impl AdaGradConfig {
    pub fn new(
        eta: f64,
        stop_scale: f64,
        norm_balance: f64,
        grad_bound: f64,
        reg_bound: f64,
        max_iterations: usize,
        radius: f64,
    ) -> Result<Self> {
        if eta <= 0.0 || !eta.is_finite() {
            return Err(SsdcError::parameter(format!("eta must be positive, got {eta}")));
        }
        if stop_scale <= 0.0 || !stop_scale.is_finite() {
            return Err(SsdcError::parameter(format!(
                "stopping scale M must be positive, got {stop_scale}"
            )));
        }
        if norm_balance <= 0.0 || !norm_balance.is_finite() {
            return Err(SsdcError::parameter(format!(
                "norm balance a must be positive, got {norm_balance}"
            )));
        }
        if grad_bound < 0.0 || !grad_bound.is_finite() {
            return Err(SsdcError::parameter(format!(
                "gradient bound G must be nonnegative, got {grad_bound}"
            )));
        }
        if reg_bound < 0.0 || !reg_bound.is_finite() {
            return Err(SsdcError::parameter(format!(
                "regularizer bound G_r must be nonnegative, got {reg_bound}"
            )));
        }
        if max_iterations == 0 {
            return Err(SsdcError::parameter("iteration cap must be at least 1"));
        }
        if radius <= 0.0 || !radius.is_finite() {
            return Err(SsdcError::parameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(AdaGradConfig {
            eta,
            stop_scale,
            norm_balance,
            grad_bound,
            reg_bound,
            max_iterations,
            radius,
        })
    }
}

pub fn adagrad_solve(
    sub: &MajorantSubproblem,
    cfg: &AdaGradConfig,
    rng: &mut dyn RngCore,
) -> Result<SolveOutput> {
    let gamma = sub.gamma();
    // Theory precondition: M·η ≥ 4/(a·γ). Checked here because the stage
    // curvature lives on the subproblem.
    let needed = 4.0 / (cfg.norm_balance * gamma);
    if cfg.stop_scale * cfg.eta < needed * (1.0 - 1e-9) {
        return Err(SsdcError::config(format!(
            "stopping rule needs M·eta >= 4/(a·gamma) = {needed}, got {}",
            cfg.stop_scale * cfg.eta
        )));
    }
    let r = sub.regularizer().clone();
    if !r.is_separable() || r.prox1(0.0, 1.0).is_none() {
        return Err(SsdcError::config(
            "the adaptive solver needs a coordinatewise regularizer (separable prox)",
        ));
    }

    let center = sub.center().clone();
    let d = center.dim();
    let h0 = 2.0 * cfg.grad_bound;
    let mut sumsq = vec![0.0_f64; d];
    let mut s = vec![0.0_f64; d];
    let mut zsum = Vector::zeros(d);
    let mut x = center.clone();
    let mut xsum = Vector::zeros(d);
    let mut iterations = 0_u64;
    let mut budget_capped = true;

    for t in 1..=cfg.max_iterations {
        iterations = t as u64;
        xsum.add_scaled(1.0, &x);

        let g_t = sub.stochastic_gradient_frozen(x.as_slice(), rng);
        zsum.add_scaled(1.0, &g_t);
        for i in 0..d {
            sumsq[i] += g_t[i] * g_t[i];
            s[i] = sumsq[i].sqrt();
        }

        let tf = t as f64;
        let mut next = Vector::zeros(d);
        for i in 0..d {
            let curvature = gamma + (h0 + s[i]) / (tf * cfg.eta);
            let point = center[i] - zsum[i] / (tf * curvature);
            next[i] = r
                .prox1(point, 1.0 / curvature)
                .expect("separable regularizer checked above");
        }
        if next.dist(&center) > cfg.radius {
            next = project_ball(&next, &center, cfg.radius);
        }
        x = next;
        guard_divergence(&x, "adaptive dual-averaging iterate")?;

        let s_max = s.iter().fold(0.0_f64, |a, &v| a.max(v));
        let s_sum: f64 = s.iter().sum();
        let threshold = cfg.stop_scale
            * (cfg.norm_balance * (h0 + s_max))
                .max(s_sum / cfg.norm_balance)
                .max(cfg.reg_bound * center.dist(&x) / cfg.eta);
        if tf >= threshold {
            budget_capped = false;
            break;
        }
    }

    Ok(SolveOutput {
        point: xsum.scaled(1.0 / iterations as f64),
        inner_iterations: iterations,
        budget_capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::grid_min_1d;
    use crate::majorant::{build_majorant, HBatch};
    use crate::oracle::{ConvexOracle, IsoQuadratic, LinearOracle, ZeroOracle};
    use crate::problem::{DcProblem, ProblemConstants};
    use crate::prox::{Regularizer, L1, ZeroReg};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn majorant_for(
        g: Arc<dyn ConvexOracle>,
        r: Arc<dyn Regularizer>,
        gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> MajorantSubproblem {
        let dim = g.dim();
        let h = Arc::new(ZeroOracle { dim });
        let p = DcProblem::new(g, h, r, ProblemConstants::default()).unwrap();
        build_majorant(&p, Vector::zeros(dim), gamma, HBatch::Full, rng).unwrap()
    }

    fn config(eta: f64, m: f64, g: f64) -> AdaGradConfig {
        AdaGradConfig::new(eta, m, 1.0, g, 1.0, 50_000, 100.0).unwrap()
    }

    #[test]
    fn zero_gradients_stop_immediately_at_the_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Arc::new(ZeroOracle { dim: 2 });
        let sub = majorant_for(g, Arc::new(ZeroReg), 1.0, &mut rng);
        // G = 0.25 so the stopping rule needs t ≥ M·a·2G = 4·0.5 = 2.
        let cfg = AdaGradConfig::new(1.0, 4.0, 1.0, 0.25, 0.0, 50_000, 10.0).unwrap();
        let out = adagrad_solve(&sub, &cfg, &mut rng).unwrap();
        assert_eq!(out.point.as_slice(), &[0.0, 0.0]);
        assert_eq!(out.inner_iterations, 2);
        assert!(!out.budget_capped);
    }

    #[test]
    fn constant_gradient_accumulates_sqrt_t_column_norms() {
        // g linear with slope 1 in one dimension: every draw is exactly 1,
        // so after t steps s_t = √t and the metric entry is 2G + √t. We
        // observe this through the stopping time: with a = 1, G_r = 0 and
        // huge M·η the rule becomes t ≥ M(2G + √t).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Arc::new(LinearOracle { coeffs: Vector::from_vec(vec![1.0]).unwrap() });
        let sub = majorant_for(g, Arc::new(ZeroReg), 1.0, &mut rng);
        let m = 3.0;
        let cfg = AdaGradConfig::new(2.0, m, 1.0, 1.0, 0.0, 50_000, 100.0).unwrap();
        let out = adagrad_solve(&sub, &cfg, &mut rng).unwrap();
        // Smallest integer t with t ≥ 3(2 + √t) is 20.
        assert_eq!(out.inner_iterations, 20);
    }

    #[test]
    fn coordinatewise_solve_matches_a_grid_oracle_after_one_step() {
        // One iteration with a deterministic gradient: the update must
        // minimize z·x + λ|x| + (γ/2)x² + (2G + s)/(2η)·x² over x (center 0).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let slope = 1.7;
        let g = Arc::new(LinearOracle { coeffs: Vector::from_vec(vec![slope]).unwrap() });
        let lam = 0.4;
        let sub = majorant_for(g, Arc::new(L1::new(lam).unwrap()), 2.0, &mut rng);
        let (eta, big_g) = (1.0, 2.0);
        let cfg = AdaGradConfig::new(eta, 2.0, 1.0, big_g, 1.0, 1, 100.0).unwrap();
        let out = adagrad_solve(&sub, &cfg, &mut rng).unwrap();
        // T = 1 (capped), so the output average equals x_1 = center and the
        // probe must look at the internal step instead: rerun with cap 2 and
        // average 2x̄ − x₁ to recover x₂.
        assert_eq!(out.point.as_slice(), &[0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg2 = AdaGradConfig::new(eta, 2.0, 1.0, big_g, 1.0, 2, 100.0).unwrap();
        let out2 = adagrad_solve(&sub, &cfg2, &mut rng).unwrap();
        let x2 = 2.0 * out2.point[0] - 0.0;
        let s1 = slope;
        let obj = |x: f64| {
            slope * x + lam * x.abs() + 1.0 * x * x + (2.0 * big_g + s1) / (2.0 * eta) * x * x
        };
        let (gx, _) = grid_min_1d(obj, -2.0, 2.0, 1e-5);
        assert!((x2 - gx).abs() < 1e-4, "step {x2} vs grid {gx}");
    }

    #[test]
    fn column_norms_never_decrease_and_metric_stays_above_floor() {
        // Indirect check through a run on a noisy finite sum; the solver
        // would panic on NaN and the stopping threshold uses s internally.
        // Here we just assert the run completes and respects the ball.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let targets: Vec<Vector> = (0..5)
            .map(|i| Vector::from_vec(vec![i as f64, -1.0]).unwrap())
            .collect();
        let g = Arc::new(crate::oracle::QuadraticComponents::new(targets, 1.0).unwrap());
        let sub = majorant_for(g, Arc::new(L1::new(0.1).unwrap()), 1.0, &mut rng);
        let cfg = AdaGradConfig::new(0.5, 8.0, 1.0, 6.0, 0.2, 50_000, 3.0).unwrap();
        let out = adagrad_solve(&sub, &cfg, &mut rng).unwrap();
        assert!(out.point.dist(sub.center()) <= 3.0 + 1e-9);
        assert!(!out.budget_capped);
    }

    #[test]
    fn quadratic_majorant_is_approximately_minimized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Arc::new(IsoQuadratic::new(Vector::from_vec(vec![1.0]).unwrap(), 1.0).unwrap());
        let sub = majorant_for(g, Arc::new(ZeroReg), 1.0, &mut rng);
        let cfg = config(1.0, 400.0, 1.5);
        let out = adagrad_solve(&sub, &cfg, &mut rng).unwrap();
        // True majorant minimizer is 0.5; dual averaging from 0 gets close.
        assert!((out.point[0] - 0.5).abs() < 0.05, "got {}", out.point[0]);
    }

    #[test]
    fn rejects_non_separable_regularizer_and_bad_coupling() {
        struct Coupled;
        impl Regularizer for Coupled {
            fn value(&self, x: &[f64]) -> f64 {
                x.iter().sum::<f64>().abs()
            }
            fn prox(&self, x: &[f64], _w: f64) -> Vector {
                Vector::from_slice(x).unwrap()
            }
            fn is_convex(&self) -> bool {
                true
            }
            fn is_separable(&self) -> bool {
                false
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = Arc::new(ZeroOracle { dim: 2 });
        let sub = majorant_for(g, Arc::new(Coupled), 1.0, &mut rng);
        let cfg = config(1.0, 10.0, 1.0);
        assert!(matches!(
            adagrad_solve(&sub, &cfg, &mut rng),
            Err(SsdcError::Config(_))
        ));

        // M·η < 4/(a·γ) must be rejected.
        let g2 = Arc::new(ZeroOracle { dim: 2 });
        let sub2 = majorant_for(g2, Arc::new(ZeroReg), 1.0, &mut rng);
        let bad = AdaGradConfig::new(0.1, 1.0, 1.0, 1.0, 0.0, 10, 1.0).unwrap();
        assert!(matches!(
            adagrad_solve(&sub2, &bad, &mut rng),
            Err(SsdcError::Config(_))
        ));
    }
}
