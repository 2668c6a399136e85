//! Proximal maps and the regularizer interface.
//!
//! A [`Regularizer`] is anything with a value and a weighted proximal map
//! `prox(x, w) = argmin_y ‖y − x‖²/(2w) + r(y)`. Convexity and separability
//! flags let solvers pick exact coordinatewise routines where they apply.
//! Non-convex maps (hard threshold, half threshold) return the zero-favoring
//! element whenever the minimizer is not unique.

use crate::error::{Result, SsdcError};
use crate::vector::Vector;

pub trait Regularizer: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Weighted proximal map; `weight` must be nonnegative.
    fn prox(&self, x: &[f64], weight: f64) -> Vector;

    /// Scalar proximal map for separable regularizers whose coordinates share
    /// one formula. `None` when the regularizer is not coordinatewise.
    fn prox1(&self, _v: f64, _weight: f64) -> Option<f64> {
        None
    }

    fn is_convex(&self) -> bool;

    fn is_separable(&self) -> bool;

    /// Bound on ‖∂r(x)‖ over the domain, if one exists for dimension `dim`.
    fn subgradient_bound(&self, _dim: usize) -> Option<f64> {
        None
    }

    /// A subgradient for convex regularizers (zero selected at kinks).
    fn subgradient(&self, _x: &[f64]) -> Option<Vector> {
        None
    }

    /// The gradient when the regularizer is differentiable everywhere;
    /// `None` for non-smooth regularizers.
    fn smooth_gradient(&self, _x: &[f64]) -> Option<Vector> {
        None
    }

    /// Uniform box bounds when the regularizer is the indicator of
    /// `[lo, hi]^d`; lets solvers project exactly onto the domain.
    fn box_bounds(&self) -> Option<(f64, f64)> {
        None
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w < 0.0 || !w.is_finite() {
        return Err(SsdcError::parameter(format!(
            "prox weight must be finite and nonnegative, got {w}"
        )));
    }
    Ok(())
}

/// Soft threshold: coordinatewise `sign(x_i)·max(|x_i| − w, 0)`.
pub fn prox_l1(x: &[f64], w: f64) -> Result<Vector> {
    check_weight(w)?;
    Vector::from_vec(x.iter().map(|&v| soft_threshold(v, w)).collect())
}

pub(crate) fn soft_threshold(v: f64, w: f64) -> f64 {
    if v > w {
        v - w
    } else if v < -w {
        v + w
    } else {
        0.0
    }
}

/// Hard threshold for the counting penalty: keep `x_i` iff `x_i² > 2w`.
/// The tie `x_i² = 2w` resolves to zero.
pub fn prox_l0(x: &[f64], w: f64) -> Result<Vector> {
    check_weight(w)?;
    Vector::from_vec(x.iter().map(|&v| hard_threshold(v, w)).collect())
}

pub(crate) fn hard_threshold(v: f64, w: f64) -> f64 {
    if v * v > 2.0 * w {
        v
    } else {
        0.0
    }
}

/// Proximal map of `w·|·|^{1/2}`, by the closed-form threshold/root formula.
///
/// The minimizer of `½(y − x)² + w·|y|^{1/2}` is zero for
/// `|x| ≤ (3/2)·w^{2/3}` (ties resolve to zero) and otherwise the largest
/// root of the stationarity cubic, obtained trigonometrically.
pub fn prox_lp_half(x: &[f64], w: f64) -> Result<Vector> {
    check_weight(w)?;
    Vector::from_vec(x.iter().map(|&v| half_threshold(v, w)).collect())
}

pub(crate) fn half_threshold(v: f64, w: f64) -> f64 {
    if w == 0.0 {
        return v;
    }
    let a = v.abs();
    let threshold = 1.5 * w.powf(2.0 / 3.0);
    if a <= threshold {
        return 0.0;
    }
    // Stationarity in u = sqrt(|y|): u³ − |x|·u + w/2 = 0; the largest root
    // gives the nonzero minimizer.
    let cos_arg = -(0.75 * 3.0_f64.sqrt()) * w * a.powf(-1.5);
    let phi = cos_arg.clamp(-1.0, 1.0).acos();
    let u = 2.0 * (a / 3.0).sqrt() * (phi / 3.0).cos();
    (u * u).copysign(v)
}

/// Minimizer of `xᵀlin + r(x) + γ/2‖x − center‖² + ‖x − anchor‖²/(2η)`.
///
/// Completing the square reduces this to a single prox call with weight
/// `w = 1/(γ + 1/η)` at the point `w·(γ·center + anchor/η − lin)`.
pub fn shifted_prox(
    reg: &dyn Regularizer,
    gamma: f64,
    center: &[f64],
    eta: f64,
    anchor: &[f64],
    lin: &[f64],
) -> Result<Vector> {
    if eta <= 0.0 || !eta.is_finite() {
        return Err(SsdcError::parameter(format!("shifted_prox: eta must be positive, got {eta}")));
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(SsdcError::parameter(format!(
            "shifted_prox: gamma must be nonnegative, got {gamma}"
        )));
    }
    let w = 1.0 / (gamma + 1.0 / eta);
    let c: Vec<f64> = center
        .iter()
        .zip(anchor)
        .zip(lin)
        .map(|((&ci, &ai), &gi)| w * (gamma * ci + ai / eta - gi))
        .collect();
    let out = reg.prox(&c, w);
    out.check_finite("shifted_prox output")?;
    Ok(out)
}

/// The zero regularizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroReg;

impl Regularizer for ZeroReg {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn prox(&self, x: &[f64], _weight: f64) -> Vector {
        Vector::from_slice(x).expect("finite input")
    }
    fn prox1(&self, v: f64, _weight: f64) -> Option<f64> {
        Some(v)
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn subgradient_bound(&self, _dim: usize) -> Option<f64> {
        Some(0.0)
    }
    fn subgradient(&self, x: &[f64]) -> Option<Vector> {
        Some(Vector::zeros(x.len()))
    }
    fn smooth_gradient(&self, x: &[f64]) -> Option<Vector> {
        Some(Vector::zeros(x.len()))
    }
}

/// Weighted ℓ1 norm `lam·‖x‖₁`.
#[derive(Debug, Clone, Copy)]
pub struct L1 {
    pub lam: f64,
}

impl L1 {
    pub fn new(lam: f64) -> Result<Self> {
        if lam < 0.0 || !lam.is_finite() {
            return Err(SsdcError::parameter(format!("l1 weight must be nonnegative, got {lam}")));
        }
        Ok(L1 { lam })
    }
}

impl Regularizer for L1 {
    fn value(&self, x: &[f64]) -> f64 {
        self.lam * x.iter().map(|v| v.abs()).sum::<f64>()
    }
    fn prox(&self, x: &[f64], weight: f64) -> Vector {
        prox_l1(x, self.lam * weight).expect("validated weight")
    }
    fn prox1(&self, v: f64, weight: f64) -> Option<f64> {
        Some(soft_threshold(v, self.lam * weight))
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn subgradient_bound(&self, dim: usize) -> Option<f64> {
        Some(self.lam * (dim as f64).sqrt())
    }
    fn subgradient(&self, x: &[f64]) -> Option<Vector> {
        Some(
            Vector::from_vec(x.iter().map(|&v| self.lam * sign0(v)).collect())
                .expect("finite"),
        )
    }
}

/// Counting penalty `lam·‖x‖₀`.
#[derive(Debug, Clone, Copy)]
pub struct L0 {
    pub lam: f64,
}

impl L0 {
    pub fn new(lam: f64) -> Result<Self> {
        if lam < 0.0 || !lam.is_finite() {
            return Err(SsdcError::parameter(format!("l0 weight must be nonnegative, got {lam}")));
        }
        Ok(L0 { lam })
    }
}

impl Regularizer for L0 {
    fn value(&self, x: &[f64]) -> f64 {
        self.lam * x.iter().filter(|v| **v != 0.0).count() as f64
    }
    fn prox(&self, x: &[f64], weight: f64) -> Vector {
        prox_l0(x, self.lam * weight).expect("validated weight")
    }
    fn prox1(&self, v: f64, weight: f64) -> Option<f64> {
        Some(hard_threshold(v, self.lam * weight))
    }
    fn is_convex(&self) -> bool {
        false
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// Power penalty `lam·Σ|x_i|^{1/2}`.
#[derive(Debug, Clone, Copy)]
pub struct LpHalf {
    pub lam: f64,
}

impl LpHalf {
    pub fn new(lam: f64) -> Result<Self> {
        if lam < 0.0 || !lam.is_finite() {
            return Err(SsdcError::parameter(format!(
                "lp-half weight must be nonnegative, got {lam}"
            )));
        }
        Ok(LpHalf { lam })
    }
}

impl Regularizer for LpHalf {
    fn value(&self, x: &[f64]) -> f64 {
        self.lam * x.iter().map(|v| v.abs().sqrt()).sum::<f64>()
    }
    fn prox(&self, x: &[f64], weight: f64) -> Vector {
        prox_lp_half(x, self.lam * weight).expect("validated weight")
    }
    fn prox1(&self, v: f64, weight: f64) -> Option<f64> {
        Some(half_threshold(v, self.lam * weight))
    }
    fn is_convex(&self) -> bool {
        false
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// Indicator of the box `[lo, hi]^d`.
#[derive(Debug, Clone, Copy)]
pub struct BoxBounds {
    pub lo: f64,
    pub hi: f64,
}

impl BoxBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(SsdcError::parameter(format!("invalid box bounds [{lo}, {hi}]")));
        }
        Ok(BoxBounds { lo, hi })
    }

    pub fn clamp_into(&self, x: &[f64]) -> Vector {
        Vector::from_vec(x.iter().map(|v| v.clamp(self.lo, self.hi)).collect())
            .expect("clamp of finite input")
    }
}

impl Regularizer for BoxBounds {
    fn value(&self, x: &[f64]) -> f64 {
        // A hair of slack so feasibility survives rounding at the faces.
        let eps = 1e-12 * (1.0 + self.lo.abs().max(self.hi.abs()));
        if x.iter().all(|&v| v >= self.lo - eps && v <= self.hi + eps) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, x: &[f64], _weight: f64) -> Vector {
        self.clamp_into(x)
    }
    fn prox1(&self, v: f64, _weight: f64) -> Option<f64> {
        Some(v.clamp(self.lo, self.hi))
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn box_bounds(&self) -> Option<(f64, f64)> {
        Some((self.lo, self.hi))
    }
}

/// Quadratic regularizer `(coef/2)·‖x‖²` with an exact scaling prox.
///
/// This is the convex slot of the envelope-smoothed problem, where
/// `coef = 1/μ`.
#[derive(Debug, Clone, Copy)]
pub struct SqL2 {
    pub coef: f64,
}

impl SqL2 {
    pub fn new(coef: f64) -> Result<Self> {
        if coef < 0.0 || !coef.is_finite() {
            return Err(SsdcError::parameter(format!(
                "quadratic coefficient must be nonnegative, got {coef}"
            )));
        }
        Ok(SqL2 { coef })
    }
}

impl Regularizer for SqL2 {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.coef * x.iter().map(|v| v * v).sum::<f64>()
    }
    fn prox(&self, x: &[f64], weight: f64) -> Vector {
        let s = 1.0 / (1.0 + weight * self.coef);
        Vector::from_vec(x.iter().map(|v| s * v).collect()).expect("finite")
    }
    fn prox1(&self, v: f64, weight: f64) -> Option<f64> {
        Some(v / (1.0 + weight * self.coef))
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn subgradient(&self, x: &[f64]) -> Option<Vector> {
        Some(Vector::from_vec(x.iter().map(|v| self.coef * v).collect()).expect("finite"))
    }
    fn smooth_gradient(&self, x: &[f64]) -> Option<Vector> {
        self.subgradient(x)
    }
}

/// Sign with the zero convention used at kinks.
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
