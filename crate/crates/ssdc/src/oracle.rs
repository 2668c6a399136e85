//! Convex function oracles and gradient-evaluation accounting.
//!
//! Both the smooth and the concave slots of a difference-of-convex objective
//! are accessed through [`ConvexOracle`]. An oracle may be a finite sum of
//! components (empirical risks), a closed-form function, or a sum of other
//! oracles. Every gradient access carries a cost in evaluation units: one per
//! component or stochastic draw, `n` for a full pass over an `n`-component
//! sum. [`CountingOracle`] wraps any oracle and charges those units to a
//! shared counter, which is how run reports account for work.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Result, SsdcError};
use crate::moreau::MoreauEnvelope;
use crate::vector::Vector;

pub trait ConvexOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// Function value. Values are free: only gradients are metered.
    fn value(&self, x: &[f64]) -> f64;

    /// A subgradient of the exact function (the full gradient when smooth).
    fn full_subgradient(&self, x: &[f64]) -> Vector;

    /// An unbiased stochastic subgradient. Finite sums draw one component
    /// uniformly; oracles without components fall back to the exact
    /// subgradient.
    fn stochastic_subgradient(&self, x: &[f64], rng: &mut dyn RngCore) -> Vector {
        let n = self.component_count();
        if n > 0 {
            let i = rng.gen_range(0..n);
            self.component_gradient(i, x)
        } else {
            self.full_subgradient(x)
        }
    }

    /// Number of finite-sum components; zero when the oracle is not a finite
    /// sum. When positive, the function is the average of its components.
    fn component_count(&self) -> usize {
        0
    }

    /// Gradient of component `i`; only meaningful when `component_count > 0`.
    fn component_gradient(&self, _i: usize, _x: &[f64]) -> Vector {
        panic!("oracle has no finite-sum components")
    }

    /// Gradient Lipschitz constant, if the function (and each component) is
    /// smooth with that constant.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Hölder constants `(L, ν)` with `‖∇f(x) − ∇f(y)‖ ≤ L·‖x − y‖^ν`.
    /// Smooth oracles default to `(L, 1)`.
    fn holder(&self) -> Option<(f64, f64)> {
        self.smoothness().map(|l| (l, 1.0))
    }

    /// Uniform bound on subgradient norms over the domain, if known.
    fn grad_bound(&self) -> Option<f64> {
        None
    }

    /// Evaluation units charged per full (sub)gradient.
    fn full_cost(&self) -> u64 {
        self.component_count().max(1) as u64
    }

    /// Evaluation units charged per stochastic draw or component gradient.
    fn stochastic_cost(&self) -> u64 {
        1
    }
}

/// The constant-zero function. Its gradients cost nothing.
#[derive(Debug, Clone, Copy)]
pub struct ZeroOracle {
    pub dim: usize,
}

impl ConvexOracle for ZeroOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn full_subgradient(&self, _x: &[f64]) -> Vector {
        Vector::zeros(self.dim)
    }
    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
    fn grad_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn full_cost(&self) -> u64 {
        0
    }
    fn stochastic_cost(&self) -> u64 {
        0
    }
}

/// Linear function `cᵀx`.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    pub coeffs: Vector,
}

impl ConvexOracle for LinearOracle {
    fn dim(&self) -> usize {
        self.coeffs.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.as_slice().iter().zip(x).map(|(c, v)| c * v).sum()
    }
    fn full_subgradient(&self, _x: &[f64]) -> Vector {
        self.coeffs.clone()
    }
    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
    fn grad_bound(&self) -> Option<f64> {
        Some(self.coeffs.norm())
    }
}

/// Isotropic quadratic `(scale/2)·‖x − target‖²`.
#[derive(Debug, Clone)]
pub struct IsoQuadratic {
    pub target: Vector,
    pub scale: f64,
}

impl IsoQuadratic {
    pub fn new(target: Vector, scale: f64) -> Result<Self> {
        if scale < 0.0 || !scale.is_finite() {
            return Err(SsdcError::parameter(format!(
                "quadratic scale must be nonnegative, got {scale}"
            )));
        }
        Ok(IsoQuadratic { target, scale })
    }
}

impl ConvexOracle for IsoQuadratic {
    fn dim(&self) -> usize {
        self.target.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let d: f64 = x
            .iter()
            .zip(self.target.iter())
            .map(|(v, t)| (v - t) * (v - t))
            .sum();
        0.5 * self.scale * d
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        Vector::from_vec(
            x.iter()
                .zip(self.target.iter())
                .map(|(v, t)| self.scale * (v - t))
                .collect(),
        )
        .expect("finite")
    }
    fn smoothness(&self) -> Option<f64> {
        Some(self.scale)
    }
}

/// Separable quadratic `½·xᵀ diag(d) x + linᵀx` with `d ≥ 0`.
#[derive(Debug, Clone)]
pub struct DiagQuadratic {
    diag: Vector,
    lin: Vector,
}

impl DiagQuadratic {
    pub fn new(diag: Vector, lin: Vector) -> Result<Self> {
        if diag.dim() != lin.dim() {
            return Err(SsdcError::parameter(format!(
                "diagonal and linear parts disagree on dimension: {} vs {}",
                diag.dim(),
                lin.dim()
            )));
        }
        if diag.iter().any(|&d| d < 0.0) {
            return Err(SsdcError::parameter(
                "diagonal quadratic needs nonnegative curvature for convexity",
            ));
        }
        Ok(DiagQuadratic { diag, lin })
    }
}

impl ConvexOracle for DiagQuadratic {
    fn dim(&self) -> usize {
        self.diag.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.diag.iter())
            .zip(self.lin.iter())
            .map(|((v, d), l)| 0.5 * d * v * v + l * v)
            .sum()
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        Vector::from_vec(
            x.iter()
                .zip(self.diag.iter())
                .zip(self.lin.iter())
                .map(|((v, d), l)| d * v + l)
                .collect(),
        )
        .expect("finite")
    }
    fn smoothness(&self) -> Option<f64> {
        Some(self.diag.iter().fold(0.0_f64, |a, &d| a.max(d)))
    }
}

/// Finite sum of isotropic quadratics: component `i` is
/// `(scale/2)·‖x − target_i‖²` and the oracle value is their average.
#[derive(Debug, Clone)]
pub struct QuadraticComponents {
    targets: Vec<Vector>,
    scale: f64,
}

impl QuadraticComponents {
    pub fn new(targets: Vec<Vector>, scale: f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(SsdcError::parameter("component sum needs at least one target"));
        }
        if scale < 0.0 || !scale.is_finite() {
            return Err(SsdcError::parameter(format!(
                "quadratic scale must be nonnegative, got {scale}"
            )));
        }
        let d = targets[0].dim();
        if targets.iter().any(|t| t.dim() != d) {
            return Err(SsdcError::parameter("component targets disagree on dimension"));
        }
        Ok(QuadraticComponents { targets, scale })
    }

    pub fn mean_target(&self) -> Vector {
        let d = self.targets[0].dim();
        let mut m = vec![0.0; d];
        for t in &self.targets {
            for (mi, ti) in m.iter_mut().zip(t.iter()) {
                *mi += ti;
            }
        }
        let n = self.targets.len() as f64;
        Vector::from_vec(m.into_iter().map(|v| v / n).collect()).expect("finite")
    }
}

impl ConvexOracle for QuadraticComponents {
    fn dim(&self) -> usize {
        self.targets[0].dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.targets.len() as f64;
        self.targets
            .iter()
            .map(|t| {
                let d: f64 = x.iter().zip(t.iter()).map(|(v, ti)| (v - ti) * (v - ti)).sum();
                0.5 * self.scale * d
            })
            .sum::<f64>()
            / n
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        let m = self.mean_target();
        Vector::from_vec(
            x.iter()
                .zip(m.iter())
                .map(|(v, t)| self.scale * (v - t))
                .collect(),
        )
        .expect("finite")
    }
    fn component_count(&self) -> usize {
        self.targets.len()
    }
    fn component_gradient(&self, i: usize, x: &[f64]) -> Vector {
        let t = &self.targets[i];
        Vector::from_vec(
            x.iter()
                .zip(t.iter())
                .map(|(v, ti)| self.scale * (v - ti))
                .collect(),
        )
        .expect("finite")
    }
    fn smoothness(&self) -> Option<f64> {
        Some(self.scale)
    }
}

/// Sum of oracles, used to stack extra convex terms onto the concave slot.
/// Stochastic draws sample each part independently; costs add up.
pub struct SumOracle {
    parts: Vec<Arc<dyn ConvexOracle>>,
}

impl SumOracle {
    pub fn new(parts: Vec<Arc<dyn ConvexOracle>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(SsdcError::parameter("oracle sum needs at least one part"));
        }
        let d = parts[0].dim();
        if parts.iter().any(|p| p.dim() != d) {
            return Err(SsdcError::parameter("oracle sum parts disagree on dimension"));
        }
        Ok(SumOracle { parts })
    }
}

impl ConvexOracle for SumOracle {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.parts.iter().map(|p| p.value(x)).sum()
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        let mut acc = self.parts[0].full_subgradient(x);
        for p in &self.parts[1..] {
            acc = acc.add(&p.full_subgradient(x));
        }
        acc
    }
    fn stochastic_subgradient(&self, x: &[f64], rng: &mut dyn RngCore) -> Vector {
        let mut acc = self.parts[0].stochastic_subgradient(x, rng);
        for p in &self.parts[1..] {
            acc = acc.add(&p.stochastic_subgradient(x, rng));
        }
        acc
    }
    fn smoothness(&self) -> Option<f64> {
        self.parts.iter().map(|p| p.smoothness()).sum()
    }
    fn grad_bound(&self) -> Option<f64> {
        self.parts.iter().map(|p| p.grad_bound()).sum()
    }
    fn holder(&self) -> Option<(f64, f64)> {
        // Only a common smooth case composes cleanly.
        self.smoothness().map(|l| (l, 1.0))
    }
    fn full_cost(&self) -> u64 {
        self.parts.iter().map(|p| p.full_cost()).sum()
    }
    fn stochastic_cost(&self) -> u64 {
        self.parts.iter().map(|p| p.stochastic_cost()).sum()
    }
}

/// The convex complement `R_μ` of a Moreau envelope, exposed as an oracle so
/// it can ride along in the concave slot of the smoothed surrogate.
#[derive(Clone)]
pub struct MoreauComplement {
    env: MoreauEnvelope,
    dim: usize,
}

impl MoreauComplement {
    pub fn new(env: MoreauEnvelope, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(SsdcError::parameter("dimension must be positive"));
        }
        Ok(MoreauComplement { env, dim })
    }

    pub fn envelope(&self) -> &MoreauEnvelope {
        &self.env
    }
}

impl ConvexOracle for MoreauComplement {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.env.complement_value(x)
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        let (_, sub) = self.env.prox_and_subgrad(x);
        sub
    }
}

/// Wraps an oracle and charges every gradient access to a shared counter.
#[derive(Clone)]
pub struct CountingOracle {
    inner: Arc<dyn ConvexOracle>,
    counter: Arc<AtomicU64>,
}

impl CountingOracle {
    pub fn new(inner: Arc<dyn ConvexOracle>, counter: Arc<AtomicU64>) -> Self {
        CountingOracle { inner, counter }
    }

    pub fn count(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &Arc<dyn ConvexOracle> {
        &self.inner
    }

    fn charge(&self, units: u64) {
        if units > 0 {
            self.counter.fetch_add(units, Ordering::Relaxed);
        }
    }
}

impl ConvexOracle for CountingOracle {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }
    fn full_subgradient(&self, x: &[f64]) -> Vector {
        self.charge(self.inner.full_cost());
        self.inner.full_subgradient(x)
    }
    fn stochastic_subgradient(&self, x: &[f64], rng: &mut dyn RngCore) -> Vector {
        self.charge(self.inner.stochastic_cost());
        self.inner.stochastic_subgradient(x, rng)
    }
    fn component_count(&self) -> usize {
        self.inner.component_count()
    }
    fn component_gradient(&self, i: usize, x: &[f64]) -> Vector {
        self.charge(self.inner.stochastic_cost());
        self.inner.component_gradient(i, x)
    }
    fn smoothness(&self) -> Option<f64> {
        self.inner.smoothness()
    }
    fn holder(&self) -> Option<(f64, f64)> {
        self.inner.holder()
    }
    fn grad_bound(&self) -> Option<f64> {
        self.inner.grad_bound()
    }
    fn full_cost(&self) -> u64 {
        self.inner.full_cost()
    }
    fn stochastic_cost(&self) -> u64 {
        self.inner.stochastic_cost()
    }
}
