//! The difference-of-convex problem container.
//!
//! A problem is `F(x) = g(x) + r(x) − h(x)` with convex `g` and `h` behind
//! oracles and a proximable regularizer `r`. Analytic constants relevant to
//! step sizes and stage budgets travel with the problem; anything the oracles
//! can report themselves (smoothness, subgradient bounds) is picked up
//! automatically when not overridden.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Result, SsdcError};
use crate::oracle::{ConvexOracle, CountingOracle};
use crate::prox::Regularizer;

/// Known analytic constants. All optional; routines that need one return a
/// `MissingConstant` error when it is absent.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProblemConstants {
    /// Gradient Lipschitz constant of `g` (per component for finite sums).
    pub smoothness: Option<f64>,
    /// Bound on the stochastic subgradient norms of `g` and `h` combined.
    pub grad_bound: Option<f64>,
    /// Bound on `‖∂r‖` over the domain; falls back to the regularizer.
    pub reg_bound: Option<f64>,
    /// Upper bound on the initial optimality gap `F(x₀) − inf F`.
    pub gap_bound: Option<f64>,
    /// Hölder constants `(L, ν)` of `∇h`, with `ν ∈ (0, 1]`.
    pub holder: Option<(f64, f64)>,
}

impl ProblemConstants {
    fn validate(&self) -> Result<()> {
        let check = |name: &str, v: Option<f64>| -> Result<()> {
            if let Some(c) = v {
                if !c.is_finite() || c < 0.0 {
                    return Err(SsdcError::parameter(format!(
                        "constant {name} must be finite and nonnegative, got {c}"
                    )));
                }
            }
            Ok(())
        };
        check("smoothness", self.smoothness)?;
        check("grad_bound", self.grad_bound)?;
        check("reg_bound", self.reg_bound)?;
        check("gap_bound", self.gap_bound)?;
        if let Some((l, nu)) = self.holder {
            if !l.is_finite() || l < 0.0 || !nu.is_finite() || nu <= 0.0 || nu > 1.0 {
                return Err(SsdcError::parameter(format!(
                    "holder constants must satisfy L >= 0 and 0 < nu <= 1, got ({l}, {nu})"
                )));
            }
        }
        Ok(())
    }
}

pub struct DcProblem {
    g_raw: Arc<dyn ConvexOracle>,
    h_raw: Arc<dyn ConvexOracle>,
    g: CountingOracle,
    h: CountingOracle,
    r: Arc<dyn Regularizer>,
    constants: ProblemConstants,
    counter: Arc<AtomicU64>,
}

impl DcProblem {
    pub fn new(
        g: Arc<dyn ConvexOracle>,
        h: Arc<dyn ConvexOracle>,
        r: Arc<dyn Regularizer>,
        constants: ProblemConstants,
    ) -> Result<Self> {
        if g.dim() == 0 {
            return Err(SsdcError::parameter("problem dimension must be positive"));
        }
        if g.dim() != h.dim() {
            return Err(SsdcError::parameter(format!(
                "oracle dimensions disagree: g has {}, h has {}",
                g.dim(),
                h.dim()
            )));
        }
        constants.validate()?;
        let counter = Arc::new(AtomicU64::new(0));
        Ok(DcProblem {
            g: CountingOracle::new(g.clone(), counter.clone()),
            h: CountingOracle::new(h.clone(), counter.clone()),
            g_raw: g,
            h_raw: h,
            r,
            constants,
            counter,
        })
    }

    /// A copy of the problem with a fresh evaluation counter, for running
    /// independent experiments over the same instance.
    pub fn fresh(&self) -> DcProblem {
        DcProblem::new(
            self.g_raw.clone(),
            self.h_raw.clone(),
            self.r.clone(),
            self.constants,
        )
        .expect("already validated")
    }

    pub fn dim(&self) -> usize {
        self.g_raw.dim()
    }

    /// Metered view of the smooth slot.
    pub fn g(&self) -> &CountingOracle {
        &self.g
    }

    /// Metered view of the concave slot.
    pub fn h(&self) -> &CountingOracle {
        &self.h
    }

    pub fn r(&self) -> &Arc<dyn Regularizer> {
        &self.r
    }

    /// Unmetered oracle access, for diagnostics that must not perturb the
    /// evaluation accounting.
    pub fn g_uncounted(&self) -> Arc<dyn ConvexOracle> {
        self.g_raw.clone()
    }

    pub fn h_uncounted(&self) -> Arc<dyn ConvexOracle> {
        self.h_raw.clone()
    }

    pub fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    /// Gradient evaluation units consumed so far, across both slots.
    pub fn grad_evals(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    /// Effective smoothness constant of `g`: the stated one, else whatever
    /// the oracle reports.
    pub fn smoothness(&self) -> Option<f64> {
        self.constants.smoothness.or_else(|| self.g_raw.smoothness())
    }

    /// Effective combined subgradient bound: the stated one, else the sum of
    /// the oracle bounds when both are available.
    pub fn grad_bound(&self) -> Option<f64> {
        self.constants.grad_bound.or_else(|| {
            match (self.g_raw.grad_bound(), self.h_raw.grad_bound()) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            }
        })
    }

    /// Effective regularizer subgradient bound.
    pub fn reg_bound(&self) -> Option<f64> {
        self.constants
            .reg_bound
            .or_else(|| self.r.subgradient_bound(self.dim()))
    }

    /// Effective Hölder constants of `∇h`.
    pub fn holder(&self) -> Option<(f64, f64)> {
        self.constants.holder.or_else(|| self.h_raw.holder())
    }

    /// `F(x) = g(x) + r(x) − h(x)`, with a domain error naming the term that
    /// failed to evaluate finitely.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(SsdcError::parameter(format!(
                "objective query has dimension {}, problem has {}",
                x.len(),
                self.dim()
            )));
        }
        let gv = self.g_raw.value(x);
        if !gv.is_finite() {
            return Err(SsdcError::domain("objective", format!("smooth term g evaluated to {gv}")));
        }
        let rv = self.r.value(x);
        if !rv.is_finite() {
            return Err(SsdcError::domain(
                "objective",
                format!("regularizer r evaluated to {rv} (query outside its domain?)"),
            ));
        }
        let hv = self.h_raw.value(x);
        if !hv.is_finite() {
            return Err(SsdcError::domain("objective", format!("concave term h evaluated to {hv}")));
        }
        Ok(gv + rv - hv)
    }
}
