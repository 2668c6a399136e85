//! Stage subproblems: convex majorants of the objective around a center.
//!
//! Each stage of the stagewise scheme replaces `F = g + r − h` by
//! `F_k(x) = g(x) + r(x) − h(c) − vᵀ(x − c) + (γ/2)‖x − c‖²` where `c` is the
//! stage center and `v ∈ ∂h(c)`. With convex `h` this dominates `F` and
//! touches it at `c`, so inner solvers can attack a strongly convex target.

use rand::RngCore;

use crate::error::{Result, SsdcError};
use crate::oracle::{ConvexOracle, CountingOracle};
use crate::problem::DcProblem;
use crate::prox::Regularizer;
use crate::vector::Vector;
use std::sync::Arc;

/// How the linearization vector `v ∈ ∂h(c)` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HBatch {
    /// Exact subgradient (a full pass for finite sums).
    Full,
    /// Average of this many stochastic draws at the center.
    MiniBatch(usize),
}

pub struct MajorantSubproblem {
    center: Vector,
    gamma: f64,
    h_lin: Vector,
    h_at_center: f64,
    g: CountingOracle,
    h: CountingOracle,
    r: Arc<dyn Regularizer>,
}

/// Builds the stage majorant at `center` with curvature `gamma`.
///
/// The linearization draw is charged to the problem's evaluation counter
/// (`n` units for a full pass, `b` for a size-`b` mini batch).
pub fn build_majorant(
    problem: &DcProblem,
    center: Vector,
    gamma: f64,
    h_batch: HBatch,
    rng: &mut dyn RngCore,
) -> Result<MajorantSubproblem> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SsdcError::parameter(format!(
            "stage curvature gamma must be positive, got {gamma}"
        )));
    }
    if center.dim() != problem.dim() {
        return Err(SsdcError::parameter(format!(
            "center has dimension {}, problem has {}",
            center.dim(),
            problem.dim()
        )));
    }
    let rv = problem.r().value(center.as_slice());
    if !rv.is_finite() {
        return Err(SsdcError::domain(
            "majorant center",
            "center lies outside the regularizer's domain",
        ));
    }
    let h_lin = match h_batch {
        HBatch::Full => problem.h().full_subgradient(center.as_slice()),
        HBatch::MiniBatch(b) => {
            if b == 0 {
                return Err(SsdcError::parameter("mini batch size must be at least 1"));
            }
            let mut acc = Vector::zeros(problem.dim());
            for _ in 0..b {
                acc = acc.add(&problem.h().stochastic_subgradient(center.as_slice(), rng));
            }
            acc.scaled(1.0 / b as f64)
        }
    };
    let h_at_center = problem.h().value(center.as_slice());
    if !h_at_center.is_finite() {
        return Err(SsdcError::domain(
            "majorant center",
            format!("concave term evaluated to {h_at_center} at the center"),
        ));
    }
    Ok(MajorantSubproblem {
        center,
        gamma,
        h_lin,
        h_at_center,
        g: problem.g().clone(),
        h: problem.h().clone(),
        r: problem.r().clone(),
    })
}

impl MajorantSubproblem {
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The frozen linearization vector `v ∈ ∂h(c)`.
    pub fn h_linear(&self) -> &Vector {
        &self.h_lin
    }

    pub fn regularizer(&self) -> &Arc<dyn Regularizer> {
        &self.r
    }

    pub fn g_component_count(&self) -> usize {
        self.g.component_count()
    }

    /// Majorant value `g(x) + r(x) − h(c) − vᵀ(x−c) + (γ/2)‖x−c‖²`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut lin = 0.0;
        let mut sq = 0.0;
        for ((xi, ci), vi) in x.iter().zip(self.center.iter()).zip(self.h_lin.iter()) {
            lin += vi * (xi - ci);
            sq += (xi - ci) * (xi - ci);
        }
        self.g.value(x) + self.r.value(x) - self.h_at_center - lin + 0.5 * self.gamma * sq
    }

    /// Stochastic subgradient of the smooth-plus-linear part with the frozen
    /// linearization: `∂g(x; ξ) − v`.
    pub fn stochastic_gradient_frozen(&self, x: &[f64], rng: &mut dyn RngCore) -> Vector {
        self.g.stochastic_subgradient(x, rng).sub(&self.h_lin)
    }

    /// Same, but with the concave slot resampled fresh at the center:
    /// `∂g(x; ξ) − ∂h(c; ς)`. Used by solvers whose analysis wants
    /// independent draws of both slots every iteration.
    pub fn stochastic_gradient_resampled(&self, x: &[f64], rng: &mut dyn RngCore) -> Vector {
        let gd = self.g.stochastic_subgradient(x, rng);
        let hd = self.h.stochastic_subgradient(self.center.as_slice(), rng);
        gd.sub(&hd)
    }

    /// Exact gradient of the smooth-plus-linear part: `∇g(x) − v`. Charges a
    /// full pass.
    pub fn full_smooth_gradient(&self, x: &[f64]) -> Vector {
        self.g.full_subgradient(x).sub(&self.h_lin)
    }

    /// Gradient of `g`'s component `i`, for variance-reduced solvers.
    pub fn g_component_gradient(&self, i: usize, x: &[f64]) -> Vector {
        self.g.component_gradient(i, x)
    }
}
