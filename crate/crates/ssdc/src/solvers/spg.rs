//! Stochastic proximal subgradient solver for a stage majorant.
//!
//! Two step-size regimes share one loop. The smooth option assumes the
//! stage curvature satisfies `γ ≥ 3L` and uses `η_t = 3/(γ(t+1))`, returning
//! the `t`-weighted average of iterates 2 through T+1. The nonsmooth option
//! uses `η_t = 4/(γt)`, confines iterates to a ball around the center, and
//! returns the `t`-weighted average of iterates 1 through T. Both draw fresh
//! stochastic subgradients of the concave slot at the center every
//! iteration.

use rand::RngCore;

use super::{dykstra_box_ball, guard_divergence, project_ball, SolveOutput};
use crate::error::{Result, SsdcError};
use crate::majorant::MajorantSubproblem;
use crate::prox::shifted_prox;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpgOption {
    /// `η_t = 3/(γ(t+1))`, no ball, average of `x_2..x_{T+1}`.
    Smooth,
    /// `η_t = 4/(γt)`, ball `‖x − x_1‖ ≤ radius`, average of `x_1..x_T`.
    Nonsmooth,
}

#[derive(Debug, Clone, Copy)]
pub struct SpgConfig {
    pub option: SpgOption,
    pub iterations: usize,
    pub gamma: f64,
    /// Required for the nonsmooth option; the driver sets `3G/γ`.
    pub radius: Option<f64>,
}

impl SpgConfig {
    pub fn smooth(iterations: usize, gamma: f64) -> Result<Self> {
        Self::validate(iterations, gamma)?;
        Ok(SpgConfig { option: SpgOption::Smooth, iterations, gamma, radius: None })
    }

    pub fn nonsmooth(iterations: usize, gamma: f64, radius: f64) -> Result<Self> {
        Self::validate(iterations, gamma)?;
        if radius <= 0.0 || !radius.is_finite() {
            return Err(SsdcError::parameter(format!(
                "nonsmooth option needs a positive ball radius, got {radius}"
            )));
        }
        Ok(SpgConfig { option: SpgOption::Nonsmooth, iterations, gamma, radius: Some(radius) })
    }

    fn validate(iterations: usize, gamma: f64) -> Result<()> {
        if iterations == 0 {
            return Err(SsdcError::parameter("iteration count must be at least 1"));
        }
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(SsdcError::parameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(())
    }

    fn step(&self, t: usize) -> f64 {
        match self.option {
            SpgOption::Smooth => 3.0 / (self.gamma * (t as f64 + 1.0)),
            SpgOption::Nonsmooth => 4.0 / (self.gamma * t as f64),
        }
    }
}

pub fn spg_solve(
    sub: &MajorantSubproblem,
    cfg: &SpgConfig,
    rng: &mut dyn RngCore,
) -> Result<SolveOutput> {
    if (cfg.gamma - sub.gamma()).abs() > 1e-12 * cfg.gamma.max(1.0) {
        return Err(SsdcError::config(format!(
            "config gamma {} disagrees with the subproblem's {}",
            cfg.gamma,
            sub.gamma()
        )));
    }
    let center = sub.center().clone();
    let r = sub.regularizer().clone();
    let gamma = cfg.gamma;
    let t_total = cfg.iterations;

    let mut x = center.clone();
    let mut wsum = Vector::zeros(center.dim());
    let mut wtot = 0.0;

    for t in 1..=t_total {
        if cfg.option == SpgOption::Nonsmooth {
            // Average over x_1..x_T: weigh the iterate before updating it.
            wsum.add_scaled(t as f64, &x);
            wtot += t as f64;
        }
        let draw = sub.stochastic_gradient_resampled(x.as_slice(), rng);
        let eta = cfg.step(t);
        let mut next = shifted_prox(
            r.as_ref(),
            gamma,
            center.as_slice(),
            eta,
            x.as_slice(),
            draw.as_slice(),
        )?;
        if let Some(radius) = cfg.radius {
            if next.dist(&center) > radius {
                next = match r.box_bounds() {
                    // With a box regularizer the update is a Euclidean
                    // projection, so the box∩ball intersection is exact.
                    Some((lo, hi)) => {
                        let w = 1.0 / (gamma + 1.0 / eta);
                        let free = Vector::from_fn(center.dim(), |i| {
                            w * (gamma * center[i] + x[i] / eta - draw[i])
                        })?;
                        dykstra_box_ball(&free, lo, hi, &center, radius)
                    }
                    // Otherwise fall back to a radial pullback; the driver
                    // sizes the ball so it stays inactive at the optimum.
                    None => project_ball(&next, &center, radius),
                };
            }
        }
        x = next;
        guard_divergence(&x, "stochastic proximal subgradient iterate")?;
        if cfg.option == SpgOption::Smooth {
            // Average over x_2..x_{T+1} with weight equal to the index.
            wsum.add_scaled(t as f64 + 1.0, &x);
            wtot += t as f64 + 1.0;
        }
    }

    Ok(SolveOutput {
        point: wsum.scaled(1.0 / wtot),
        inner_iterations: t_total as u64,
        budget_capped: false,
    })
}
