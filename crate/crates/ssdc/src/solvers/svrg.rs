//! Variance-reduced proximal solver for a stage majorant.
//!
//! Classic epoch structure: a full smooth gradient at the snapshot anchors
//! the per-step correction `∇g_i(x) − ∇g_i(x̄) + ḡ`, each step runs through
//! [`shifted_prox`] against the stage quadratic, and the epoch ends by
//! snapshotting the average of its iterates. The concave slot stays frozen
//! at the stage linearization. On a `γ`-strongly-convex majorant the
//! expected gap contracts by
//! `ρ = 1/(γη(1−4Lη)T) + 4Lη(T+1)/((1−4Lη)T)` per epoch.

use rand::{Rng, RngCore};

use super::{guard_divergence, SolveOutput};
use crate::error::{Result, SsdcError};
use crate::majorant::MajorantSubproblem;
use crate::prox::shifted_prox;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy)]
pub struct SvrgConfig {
    pub eta: f64,
    pub epoch_length: usize,
    pub epochs: usize,
}

/// The per-epoch contraction factor `ρ(η, T; L, γ)`.
pub fn svrg_contraction(eta: f64, epoch_length: usize, smoothness: f64, gamma: f64) -> f64 {
    let t = epoch_length as f64;
    let denom = 1.0 - 4.0 * smoothness * eta;
    1.0 / (gamma * eta * denom * t) + 4.0 * smoothness * eta * (t + 1.0) / (denom * t)
}

impl SvrgConfig {
    /// Validates `ρ ≤ 1/2` for the given smoothness and stage curvature, the
    /// regime the stagewise analysis relies on.
    pub fn new(
        eta: f64,
        epoch_length: usize,
        epochs: usize,
        smoothness: f64,
        gamma: f64,
    ) -> Result<Self> {
        if eta <= 0.0 || !eta.is_finite() {
            return Err(SsdcError::parameter(format!("eta must be positive, got {eta}")));
        }
        if epoch_length == 0 || epochs == 0 {
            return Err(SsdcError::parameter("epoch length and epoch count must be at least 1"));
        }
        if smoothness <= 0.0 || gamma <= 0.0 {
            return Err(SsdcError::parameter(
                "contraction check needs positive smoothness and gamma",
            ));
        }
        if 4.0 * smoothness * eta >= 1.0 {
            return Err(SsdcError::parameter(format!(
                "step too large: need 4·L·eta < 1, got {}",
                4.0 * smoothness * eta
            )));
        }
        let rho = svrg_contraction(eta, epoch_length, smoothness, gamma);
        if rho > 0.5 {
            return Err(SsdcError::parameter(format!(
                "contraction factor {rho:.4} exceeds 1/2; lengthen the epoch or shrink the step"
            )));
        }
        Ok(SvrgConfig { eta, epoch_length, epochs })
    }
}

pub fn svrg_solve(
    sub: &MajorantSubproblem,
    cfg: &SvrgConfig,
    rng: &mut dyn RngCore,
) -> Result<SolveOutput> {
    let n = sub.g_component_count();
    if n == 0 {
        return Err(SsdcError::config(
            "variance reduction needs a finite-sum smooth oracle (component_count > 0)",
        ));
    }
    let center = sub.center().clone();
    let r = sub.regularizer().clone();
    let gamma = sub.gamma();
    let d = center.dim();

    let mut snapshot = center.clone();
    for _ in 0..cfg.epochs {
        let anchor_grad = sub.full_smooth_gradient(snapshot.as_slice());
        let mut x = snapshot.clone();
        let mut xsum = Vector::zeros(d);
        for _ in 0..cfg.epoch_length {
            let i = rng.gen_range(0..n);
            let correction = sub
                .g_component_gradient(i, x.as_slice())
                .sub(&sub.g_component_gradient(i, snapshot.as_slice()));
            let grad = correction.add(&anchor_grad);
            x = shifted_prox(
                r.as_ref(),
                gamma,
                center.as_slice(),
                cfg.eta,
                x.as_slice(),
                grad.as_slice(),
            )?;
            guard_divergence(&x, "variance-reduced iterate")?;
            xsum.add_scaled(1.0, &x);
        }
        snapshot = xsum.scaled(1.0 / cfg.epoch_length as f64);
    }

    Ok(SolveOutput {
        point: snapshot,
        inner_iterations: (cfg.epochs * cfg.epoch_length) as u64,
        budget_capped: false,
    })
}
