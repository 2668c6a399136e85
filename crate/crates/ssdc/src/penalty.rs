//! Difference-of-convex splits of the non-convex sparsity penalties.
//!
//! Each penalty `P(x) = Σᵢ p(|xᵢ|)` decomposes as `r1(x) − r2(x)` where `r1`
//! is a scaled ℓ1 norm and `r2` is convex. For the log-sum, minimax-concave,
//! clipped-absolute-deviation, and transformed-ℓ1 penalties `r2` is smooth
//! with a known gradient-Lipschitz modulus; the capped-ℓ1 split has a
//! piecewise-linear `r2` that only admits subgradients, so problems built on
//! it go through the envelope-smoothing route instead of the smooth-h one.

use crate::error::{Result, SsdcError};
use crate::prox::{sign0, L1};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// Log-sum: `λ Σ log(|xᵢ| + θ)` (up to the additive constant `−λ d log θ`
    /// absorbed into `r2`).
    Lsp,
    /// Minimax concave: `λ Σ ∫₀^{|xᵢ|} [1 − z/(θλ)]₊ dz`.
    Mcp,
    /// Smoothly clipped absolute deviation; requires `θ > 2`.
    Scad,
    /// Transformed ℓ1: `λ Σ (θ+1)|xᵢ| / (θ + |xᵢ|)`.
    Tl1,
    /// Capped ℓ1: `λ Σ min(|xᵢ|, θ)`; the split has a non-smooth `r2`.
    CappedL1,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Lsp => "lsp",
            PenaltyKind::Mcp => "mcp",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Tl1 => "tl1",
            PenaltyKind::CappedL1 => "capped_l1",
        }
    }
}

/// A penalty together with its convex split `P = r1 − r2`.
#[derive(Debug, Clone, Copy)]
pub struct DcPenalty {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub theta: f64,
}

/// Builds the split, validating the parameter ranges.
pub fn dc_penalty(kind: PenaltyKind, lambda: f64, theta: f64) -> Result<DcPenalty> {
    DcPenalty::new(kind, lambda, theta)
}

impl DcPenalty {
    pub fn new(kind: PenaltyKind, lambda: f64, theta: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(SsdcError::parameter(format!(
                "penalty weight lambda must be positive, got {lambda}"
            )));
        }
        if theta <= 0.0 || !theta.is_finite() {
            return Err(SsdcError::parameter(format!(
                "penalty shape theta must be positive, got {theta}"
            )));
        }
        if kind == PenaltyKind::Scad && theta <= 2.0 {
            return Err(SsdcError::parameter(format!(
                "scad requires theta > 2, got {theta}"
            )));
        }
        Ok(DcPenalty { kind, lambda, theta })
    }

    /// Coefficient of the ℓ1 norm in the convex part `r1`.
    pub fn r1_coef(&self) -> f64 {
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            PenaltyKind::Lsp => lam / th,
            PenaltyKind::Mcp | PenaltyKind::Scad | PenaltyKind::CappedL1 => lam,
            PenaltyKind::Tl1 => lam * (1.0 + th) / th,
        }
    }

    /// The convex part as a regularizer with an exact prox.
    pub fn r1(&self) -> L1 {
        L1::new(self.r1_coef()).expect("validated coefficient")
    }

    /// Gradient-Lipschitz modulus of `r2`, `None` for the capped-ℓ1 split.
    pub fn r2_smoothness(&self) -> Option<f64> {
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            PenaltyKind::Lsp => Some(lam / (th * th)),
            PenaltyKind::Mcp => Some(1.0 / th),
            PenaltyKind::Scad => Some(1.0 / (th - 1.0)),
            PenaltyKind::Tl1 => Some(lam * 2.0 * (1.0 + th) / (th * th)),
            PenaltyKind::CappedL1 => None,
        }
    }

    /// Supremum of the per-coordinate `|r2'|`, used for subgradient bounds.
    pub fn r2_grad_coord_bound(&self) -> f64 {
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            PenaltyKind::Lsp => lam / th,
            PenaltyKind::Mcp | PenaltyKind::Scad | PenaltyKind::CappedL1 => lam,
            PenaltyKind::Tl1 => lam * (1.0 + th) / th,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.value1(v.abs())).sum()
    }

    pub fn r2_value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.r2_value1(v.abs())).sum()
    }

    /// Gradient of `r2` (a subgradient for the capped-ℓ1 split, zero at its
    /// breakpoints).
    pub fn r2_gradient(&self, x: &[f64]) -> Vector {
        Vector::from_vec(x.iter().map(|&v| self.r2_deriv1(v)).collect())
            .expect("penalty derivative of finite input")
    }

    fn value1(&self, t: f64) -> f64 {
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            PenaltyKind::Lsp => lam * (t + th).ln() - lam * th.ln(),
            PenaltyKind::Mcp => {
                if t <= th * lam {
                    lam * t - t * t / (2.0 * th)
                } else {
                    th * lam * lam / 2.0
                }
            }
            PenaltyKind::Scad => {
                if t <= lam {
                    lam * t
                } else if t <= th * lam {
                    (-t * t + 2.0 * th * lam * t - lam * lam) / (2.0 * (th - 1.0))
                } else {
                    (th + 1.0) * lam * lam / 2.0
                }
            }
            PenaltyKind::Tl1 => lam * (th + 1.0) * t / (th + t),
            PenaltyKind::CappedL1 => lam * t.min(th),
        }
    }

    fn r2_value1(&self, t: f64) -> f64 {
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            // The constant λ·log θ keeps r2(0) = 0 and cancels the one in the
            // penalty value, leaving r1 − r2 equal to the textbook log-sum.
            PenaltyKind::Lsp => lam * (t / th - (t + th).ln() + th.ln()),
            PenaltyKind::Mcp => {
                if t <= th * lam {
                    t * t / (2.0 * th)
                } else {
                    lam * t - th * lam * lam / 2.0
                }
            }
            PenaltyKind::Scad => {
                if t <= lam {
                    0.0
                } else if t <= th * lam {
                    (t - lam) * (t - lam) / (2.0 * (th - 1.0))
                } else {
                    lam * t - (th + 1.0) * lam * lam / 2.0
                }
            }
            PenaltyKind::Tl1 => lam * ((th + 1.0) * t / th - (th + 1.0) * t / (th + t)),
            PenaltyKind::CappedL1 => lam * (t - th).max(0.0),
        }
    }

    fn r2_deriv1(&self, v: f64) -> f64 {
        let (lam, th) = (self.lambda, self.theta);
        let t = v.abs();
        let s = sign0(v);
        match self.kind {
            PenaltyKind::Lsp => s * lam * (1.0 / th - 1.0 / (t + th)),
            PenaltyKind::Mcp => {
                if t <= th * lam {
                    v / th
                } else {
                    s * lam
                }
            }
            PenaltyKind::Scad => {
                if t <= lam {
                    0.0
                } else if t <= th * lam {
                    s * (t - lam) / (th - 1.0)
                } else {
                    s * lam
                }
            }
            PenaltyKind::Tl1 => s * lam * (th + 1.0) * (1.0 / th - th / ((th + t) * (th + t))),
            PenaltyKind::CappedL1 => {
                if t > th {
                    s * lam
                } else {
                    0.0
                }
            }
        }
    }
}

/// The convex correction `r2` of a penalty split, packaged as an oracle for
/// the concave slot of a DC problem.
#[derive(Debug, Clone)]
pub struct PenaltyComplement {
    penalty: DcPenalty,
    dim: usize,
}

impl PenaltyComplement {
    pub fn new(penalty: DcPenalty, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(SsdcError::parameter("dimension must be at least 1"));
        }
        Ok(PenaltyComplement { penalty, dim })
    }
}

impl crate::oracle::ConvexOracle for PenaltyComplement {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.penalty.r2_value(x)
    }

    fn full_subgradient(&self, x: &[f64]) -> Vector {
        self.penalty.r2_gradient(x)
    }

    fn smoothness(&self) -> Option<f64> {
        self.penalty.r2_smoothness()
    }

    fn grad_bound(&self) -> Option<f64> {
        Some((self.dim as f64).sqrt() * self.penalty.r2_grad_coord_bound())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::Regularizer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const KINDS: [PenaltyKind; 5] = [
        PenaltyKind::Lsp,
        PenaltyKind::Mcp,
        PenaltyKind::Scad,
        PenaltyKind::Tl1,
        PenaltyKind::CappedL1,
    ];

    #[test]
    fn parameter_validation() {
        assert!(DcPenalty::new(PenaltyKind::Mcp, 0.0, 1.0).is_err());
        assert!(DcPenalty::new(PenaltyKind::Mcp, 1.0, -1.0).is_err());
        assert!(DcPenalty::new(PenaltyKind::Scad, 1.0, 2.0).is_err());
        assert!(DcPenalty::new(PenaltyKind::Scad, 1.0, 2.5).is_ok());
    }

    #[test]
    fn mcp_fixed_values() {
        let p = dc_penalty(PenaltyKind::Mcp, 1.0, 2.0).unwrap();
        // Beyond θλ the penalty saturates at θλ²/2.
        assert!((p.value(&[3.0]) - 1.0).abs() < 1e-15);
        assert!((p.r2_value(&[3.0]) - (3.0 - 1.0)).abs() < 1e-15);
        assert_eq!(p.r2_gradient(&[3.0]).as_slice(), &[1.0]);
        assert_eq!(p.r2_gradient(&[0.0]).as_slice(), &[0.0]);
        // r1 − r2 at 3: 1·3 − 2 = 1.
        assert!((p.r1().value(&[3.0]) - p.r2_value(&[3.0]) - p.value(&[3.0])).abs() < 1e-15);
    }

    #[test]
    fn scad_middle_region_value() {
        let p = dc_penalty(PenaltyKind::Scad, 1.0, 3.0).unwrap();
        // (x² − 2λ|x| + λ²)/(2(θ−1)) at x = 2: (4 − 4 + 1)/4 = 0.25.
        assert!((p.r2_value(&[2.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn split_identity_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in KINDS {
            let p = dc_penalty(kind, 0.7, 2.6).unwrap();
            for _ in 0..500 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-8.0..8.0)).collect();
                let lhs = p.r1().value(&x) - p.r2_value(&x);
                assert!(
                    (lhs - p.value(&x)).abs() < 1e-10,
                    "{:?}: split mismatch at {:?}",
                    kind,
                    x
                );
            }
        }
    }

    #[test]
    fn r2_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for kind in KINDS {
            let p = dc_penalty(kind, 1.3, 2.4).unwrap();
            let breakpoints = [0.0, p.lambda, p.theta * p.lambda, p.theta];
            let mut checked = 0;
            while checked < 200 {
                let v: f64 = rng.gen_range(-7.0..7.0);
                if breakpoints.iter().any(|b| (v.abs() - b).abs() < 1e-3) {
                    continue;
                }
                checked += 1;
                let fd = (p.r2_value(&[v + h]) - p.r2_value(&[v - h])) / (2.0 * h);
                let an = p.r2_gradient(&[v])[0];
                let denom = an.abs().max(1e-8);
                assert!(
                    (fd - an).abs() / denom < 1e-5 || (fd - an).abs() < 1e-8,
                    "{:?} at {v}: fd {fd} vs analytic {an}",
                    kind
                );
            }
        }
    }

    #[test]
    fn r2_gradient_lipschitz_within_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in KINDS {
            let p = dc_penalty(kind, 1.0, 2.5).unwrap();
            let Some(modulus) = p.r2_smoothness() else {
                continue;
            };
            for _ in 0..400 {
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-6.0..6.0)).collect();
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-6.0..6.0)).collect();
                let gx = p.r2_gradient(&x);
                let gy = p.r2_gradient(&y);
                let num = gx.dist(&gy);
                let den = Vector::from_slice(&x).unwrap().dist(&Vector::from_slice(&y).unwrap());
                assert!(
                    num <= modulus * den * (1.0 + 1e-9) + 1e-12,
                    "{:?}: ratio {} exceeds modulus {}",
                    kind,
                    num / den,
                    modulus
                );
            }
        }
    }

    #[test]
    fn capped_split_has_bounded_subgradient() {
        let p = dc_penalty(PenaltyKind::CappedL1, 2.0, 1.5).unwrap();
        assert!(p.r2_smoothness().is_none());
        assert_eq!(p.r2_gradient(&[2.0]).as_slice(), &[2.0]);
        assert_eq!(p.r2_gradient(&[1.0]).as_slice(), &[0.0]);
        // breakpoint tie resolves to zero
        assert_eq!(p.r2_gradient(&[1.5]).as_slice(), &[0.0]);
        assert_eq!(p.r2_grad_coord_bound(), 2.0);
    }

    #[test]
    fn lsp_value_is_shifted_log() {
        let p = dc_penalty(PenaltyKind::Lsp, 2.0, 3.0).unwrap();
        assert_eq!(p.value(&[0.0, 0.0]), 0.0);
        let expect = 2.0 * ((1.0f64 + 3.0).ln() - 3.0f64.ln());
        assert!((p.value(&[1.0]) - expect).abs() < 1e-12);
    }
}
