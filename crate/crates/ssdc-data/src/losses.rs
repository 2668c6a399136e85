//! Per-sample loss functions in the score `s = xᵀa`.
//!
//! Classification losses read the margin `b·s` with labels in `{−1, +1}`;
//! regression losses read the residual `s − b`. Kinked losses report the
//! subgradient value 0 at their kinks.

use crate::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Logistic,
    Huber,
    Squared,
    /// `(b − σ(s))²` with the logistic sigmoid; smooth but not convex.
    SigmoidLs,
    /// `(α/2)·log(1 + (b − s)²/α)`; smooth but not convex.
    TruncatedLs,
    Hinge,
    Absolute,
}

/// A loss kind plus its shape parameters.
#[derive(Debug, Clone, Copy)]
pub struct LossSpec {
    kind: LossKind,
    /// Huber transition width.
    delta: f64,
    /// Truncation level of the truncated least-squares loss.
    alpha: f64,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl LossSpec {
    pub fn logistic() -> Self {
        LossSpec { kind: LossKind::Logistic, delta: 1.0, alpha: 1.0 }
    }

    pub fn squared() -> Self {
        LossSpec { kind: LossKind::Squared, delta: 1.0, alpha: 1.0 }
    }

    pub fn hinge() -> Self {
        LossSpec { kind: LossKind::Hinge, delta: 1.0, alpha: 1.0 }
    }

    pub fn absolute() -> Self {
        LossSpec { kind: LossKind::Absolute, delta: 1.0, alpha: 1.0 }
    }

    pub fn sigmoid_ls() -> Self {
        LossSpec { kind: LossKind::SigmoidLs, delta: 1.0, alpha: 1.0 }
    }

    /// Huber loss; `delta = 1` is the conventional default.
    pub fn huber(delta: f64) -> Result<Self, DataError> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(DataError::invalid(format!(
                "huber width must be positive, got {delta}"
            )));
        }
        Ok(LossSpec { kind: LossKind::Huber, delta, alpha: 1.0 })
    }

    pub fn truncated_ls(alpha: f64) -> Result<Self, DataError> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(DataError::invalid(format!(
                "truncation level must be positive, got {alpha}"
            )));
        }
        Ok(LossSpec { kind: LossKind::TruncatedLs, delta: 1.0, alpha })
    }

    /// Truncated least squares at the conventional level `α = √(10n)` for a
    /// sample of size `n`.
    pub fn truncated_ls_default(n: usize) -> Result<Self, DataError> {
        if n == 0 {
            return Err(DataError::invalid("sample size must be positive"));
        }
        Self::truncated_ls((10.0 * n as f64).sqrt())
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.kind, LossKind::SigmoidLs | LossKind::TruncatedLs)
    }

    /// Upper bound on `|∂²ℓ/∂s²|` uniform in `b ∈ [−1, 1]`; `None` for
    /// kinked losses.
    pub fn curvature_bound(&self) -> Option<f64> {
        match self.kind {
            LossKind::Logistic => Some(0.25),
            LossKind::Huber | LossKind::Squared => Some(1.0),
            LossKind::SigmoidLs => Some(0.5),
            LossKind::TruncatedLs => Some(1.0),
            LossKind::Hinge | LossKind::Absolute => None,
        }
    }

    /// Upper bound on `|∂ℓ/∂s|` uniform in `s`, when one exists.
    pub fn slope_bound(&self) -> Option<f64> {
        match self.kind {
            LossKind::Logistic | LossKind::Hinge | LossKind::Absolute => Some(1.0),
            LossKind::Huber => Some(self.delta),
            // |u|/(1 + u²/α) peaks at u = √α.
            LossKind::TruncatedLs => Some(self.alpha.sqrt() / 2.0),
            // |2(σ−b)σ(1−σ)| ≤ 2·2·(1/4) for b ∈ [−1, 1].
            LossKind::SigmoidLs => Some(1.0),
            LossKind::Squared => None,
        }
    }

    pub fn value(&self, s: f64, b: f64) -> f64 {
        match self.kind {
            LossKind::Logistic => {
                let m = -b * s;
                // log(1 + e^m), stable for large |m|.
                if m > 0.0 {
                    m + (-m).exp().ln_1p()
                } else {
                    m.exp().ln_1p()
                }
            }
            LossKind::Huber => {
                let u = (s - b).abs();
                if u <= self.delta {
                    0.5 * u * u
                } else {
                    self.delta * u - 0.5 * self.delta * self.delta
                }
            }
            LossKind::Squared => 0.5 * (s - b) * (s - b),
            LossKind::SigmoidLs => {
                let e = b - sigmoid(s);
                e * e
            }
            LossKind::TruncatedLs => {
                let u = b - s;
                0.5 * self.alpha * (u * u / self.alpha).ln_1p()
            }
            LossKind::Hinge => (1.0 - b * s).max(0.0),
            LossKind::Absolute => (s - b).abs(),
        }
    }

    /// `∂ℓ/∂s`, choosing 0 at kinks.
    pub fn derivative(&self, s: f64, b: f64) -> f64 {
        match self.kind {
            LossKind::Logistic => -b * sigmoid(-b * s),
            LossKind::Huber => {
                let u = s - b;
                u.clamp(-self.delta, self.delta)
            }
            LossKind::Squared => s - b,
            LossKind::SigmoidLs => {
                let p = sigmoid(s);
                -2.0 * (b - p) * p * (1.0 - p)
            }
            LossKind::TruncatedLs => {
                let u = b - s;
                -u / (1.0 + u * u / self.alpha)
            }
            LossKind::Hinge => {
                if b * s < 1.0 {
                    -b
                } else {
                    0.0
                }
            }
            LossKind::Absolute => {
                let u = s - b;
                if u == 0.0 {
                    0.0
                } else {
                    u.signum()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(spec: &LossSpec, s: f64, b: f64) -> f64 {
        let h = 1e-6;
        (spec.value(s + h, b) - spec.value(s - h, b)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences_away_from_kinks() {
        let specs = [
            LossSpec::logistic(),
            LossSpec::huber(1.0).unwrap(),
            LossSpec::squared(),
            LossSpec::sigmoid_ls(),
            LossSpec::truncated_ls(4.0).unwrap(),
            LossSpec::hinge(),
            LossSpec::absolute(),
        ];
        // Scores chosen off the hinge kink (b·s = 1), the absolute-loss kink
        // (s = b), and the Huber transition (|s − b| = δ).
        let scores = [-2.3, -0.7, 0.31, 1.6, 3.2];
        for spec in &specs {
            for &b in &[-1.0, 1.0] {
                for &s in &scores {
                    let want = fd(spec, s, b);
                    let got = spec.derivative(s, b);
                    let scale = want.abs().max(1.0);
                    assert!(
                        (got - want).abs() / scale <= 1e-5,
                        "{:?} at s={s}, b={b}: {got} vs {want}",
                        spec.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn kink_subgradients_are_zero() {
        assert_eq!(LossSpec::absolute().derivative(1.0, 1.0), 0.0);
        assert_eq!(LossSpec::hinge().derivative(1.0, 1.0), 0.0, "margin exactly 1");
    }

    #[test]
    fn fixed_values() {
        // Logistic at margin 0.
        assert!((LossSpec::logistic().value(0.0, 1.0) - (2.0f64).ln()).abs() < 1e-15);
        // Hinge at score 0 is 1 for both labels.
        assert_eq!(LossSpec::hinge().value(0.0, 1.0), 1.0);
        assert_eq!(LossSpec::hinge().value(0.0, -1.0), 1.0);
        // Sigmoid least squares at score 0: (b − 1/2)².
        assert!((LossSpec::sigmoid_ls().value(0.0, 1.0) - 0.25).abs() < 1e-15);
        // Truncated least squares has zero slope at zero residual.
        assert_eq!(LossSpec::truncated_ls(9.0).unwrap().derivative(0.5, 0.5), 0.0);
        // Huber switches to the linear branch past delta.
        let hub = LossSpec::huber(1.0).unwrap();
        assert!((hub.value(3.0, 0.0) - 2.5).abs() < 1e-15);
        assert!((hub.value(0.5, 0.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn slope_bounds_hold_empirically() {
        let specs = [
            LossSpec::logistic(),
            LossSpec::huber(0.7).unwrap(),
            LossSpec::sigmoid_ls(),
            LossSpec::truncated_ls(2.5).unwrap(),
            LossSpec::hinge(),
            LossSpec::absolute(),
        ];
        for spec in &specs {
            let bound = spec.slope_bound().unwrap();
            let mut s = -30.0;
            while s <= 30.0 {
                for &b in &[-1.0, 1.0] {
                    assert!(
                        spec.derivative(s, b).abs() <= bound + 1e-12,
                        "{:?} slope at s={s}",
                        spec.kind()
                    );
                }
                s += 0.01;
            }
        }
    }

    #[test]
    fn curvature_bounds_hold_empirically() {
        let specs = [
            LossSpec::logistic(),
            LossSpec::huber(1.0).unwrap(),
            LossSpec::squared(),
            LossSpec::sigmoid_ls(),
            LossSpec::truncated_ls(5.0).unwrap(),
        ];
        let h = 1e-4;
        for spec in &specs {
            let bound = spec.curvature_bound().unwrap();
            let mut s: f64 = -10.0;
            while s <= 10.0 {
                for &b in &[-1.0, 1.0] {
                    // Skip second differences straddling the Huber kink.
                    if spec.kind() == LossKind::Huber && ((s - b).abs() - 1.0).abs() < 1e-2 {
                        continue;
                    }
                    let second = (spec.value(s + h, b) - 2.0 * spec.value(s, b)
                        + spec.value(s - h, b))
                        / (h * h);
                    assert!(
                        second.abs() <= bound + 1e-4,
                        "{:?} curvature {second} at s={s}, b={b}",
                        spec.kind()
                    );
                }
                s += 0.037;
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(LossSpec::huber(0.0).is_err());
        assert!(LossSpec::truncated_ls(-1.0).is_err());
        assert!(LossSpec::truncated_ls_default(0).is_err());
        let t = LossSpec::truncated_ls_default(10).unwrap();
        // α = √(10·10) = 10, so the value at residual 2 is 5·ln(1.4).
        assert!((t.value(0.0, 2.0) - 5.0 * 1.4f64.ln()).abs() < 1e-12);
    }
}
