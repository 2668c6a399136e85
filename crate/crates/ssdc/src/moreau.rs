//! Moreau envelope of a (possibly non-convex) regularizer.
//!
//! For a proximable `r` and smoothing level `μ > 0`, the envelope
//! `r_μ(x) = min_y r(y) + ‖x − y‖²/(2μ)` admits the split
//! `r_μ(x) = ‖x‖²/(2μ) − R_μ(x)` where the complement
//! `R_μ(x) = max_y (xᵀy/μ − ‖y‖²/(2μ) − r(y))` is convex even when `r` is
//! not, and `prox_{μr}(x)/μ` is one of its subgradients. Replacing `r` by
//! `r_μ` therefore turns a problem with a hard regularizer into one whose
//! convex slot is a plain quadratic and whose concave slot absorbs `R_μ`.

use std::sync::Arc;

use crate::error::{Result, SsdcError};
use crate::prox::Regularizer;
use crate::vector::Vector;

#[derive(Clone)]
pub struct MoreauEnvelope {
    base: Arc<dyn Regularizer>,
    mu: f64,
}

impl MoreauEnvelope {
    pub fn new(base: Arc<dyn Regularizer>, mu: f64) -> Result<Self> {
        if mu <= 0.0 || !mu.is_finite() {
            return Err(SsdcError::parameter(format!(
                "smoothing level mu must be positive, got {mu}"
            )));
        }
        Ok(MoreauEnvelope { base, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn base(&self) -> &Arc<dyn Regularizer> {
        &self.base
    }

    /// `r_μ(x)`, evaluated through one prox call on the base regularizer.
    pub fn envelope_value(&self, x: &[f64]) -> f64 {
        let p = self.base.prox(x, self.mu);
        let mut sq = 0.0;
        for (xi, pi) in x.iter().zip(p.iter()) {
            sq += (xi - pi) * (xi - pi);
        }
        self.base.value(p.as_slice()) + sq / (2.0 * self.mu)
    }

    /// The proximal point `prox_{μr}(x)` and the complement subgradient
    /// `prox_{μr}(x)/μ ∈ ∂R_μ(x)`, sharing a single prox evaluation.
    pub fn prox_and_subgrad(&self, x: &[f64]) -> (Vector, Vector) {
        let p = self.base.prox(x, self.mu);
        let sub = p.scaled(1.0 / self.mu);
        (p, sub)
    }

    /// The convex complement `R_μ(x) = ‖x‖²/(2μ) − r_μ(x)`.
    pub fn complement_value(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        sq / (2.0 * self.mu) - self.envelope_value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{L0, L1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_mu() {
        assert!(MoreauEnvelope::new(Arc::new(L1::new(1.0).unwrap()), 0.0).is_err());
        assert!(MoreauEnvelope::new(Arc::new(L1::new(1.0).unwrap()), -0.5).is_err());
    }

    #[test]
    fn l1_envelope_is_huber() {
        let lam = 0.8;
        let mu = 0.3;
        let env = MoreauEnvelope::new(Arc::new(L1::new(lam).unwrap()), mu).unwrap();
        let huber = |v: f64| {
            if v.abs() <= mu * lam {
                v * v / (2.0 * mu)
            } else {
                lam * v.abs() - mu * lam * lam / 2.0
            }
        };
        for &v in &[-2.0, -0.3, -0.1, 0.0, 0.05, 0.24, 0.7, 3.0] {
            assert!(
                (env.envelope_value(&[v]) - huber(v)).abs() < 1e-12,
                "envelope mismatch at {v}"
            );
        }
    }

    #[test]
    fn l0_envelope_is_clipped_quadratic() {
        let lam = 0.5;
        let mu = 0.2;
        let env = MoreauEnvelope::new(Arc::new(L0::new(lam).unwrap()), mu).unwrap();
        for &v in &[-1.5, -0.4, 0.0, 0.3, 0.9, 2.0] {
            let expect = (v * v / (2.0 * mu)).min(lam);
            assert!((env.envelope_value(&[v]) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_never_exceeds_base_and_tightens_as_mu_shrinks() {
        let base = Arc::new(L1::new(1.3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let coarse = MoreauEnvelope::new(base.clone(), 0.5).unwrap();
            let fine = MoreauEnvelope::new(base.clone(), 0.01).unwrap();
            let rv = base.value(&x);
            assert!(coarse.envelope_value(&x) <= rv + 1e-12);
            assert!(coarse.envelope_value(&x) <= fine.envelope_value(&x) + 1e-12);
            assert!((fine.envelope_value(&x) - rv).abs() < 0.02 * 3.0);
        }
    }

    #[test]
    fn complement_subgradient_matches_finite_differences() {
        // The complement of the ℓ1 envelope is smooth away from the origin.
        let env = MoreauEnvelope::new(Arc::new(L1::new(0.7).unwrap()), 0.25).unwrap();
        let h = 1e-6;
        for &v in &[-1.4, -0.6, 0.4, 0.9, 2.2] {
            let (_, sub) = env.prox_and_subgrad(&[v]);
            let fd = (env.complement_value(&[v + h]) - env.complement_value(&[v - h])) / (2.0 * h);
            assert!((sub[0] - fd).abs() < 1e-5, "at {v}: {} vs {fd}", sub[0]);
        }
    }

    #[test]
    fn complement_is_midpoint_convex_for_nonconvex_base() {
        let env = MoreauEnvelope::new(Arc::new(L0::new(0.9).unwrap()), 0.15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let lhs = env.complement_value(&m);
            let rhs = 0.5 * env.complement_value(&x) + 0.5 * env.complement_value(&y);
            assert!(lhs <= rhs + 1e-10, "midpoint convexity violated");
        }
    }
}
