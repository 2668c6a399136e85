//! Stochastic solvers for the stage majorants.

use crate::error::{Result, SsdcError};
use crate::vector::Vector;

mod adagrad;
mod spg;
mod svrg;

pub use adagrad::{adagrad_solve, AdaGradConfig};
pub use spg::{spg_solve, SpgConfig, SpgOption};
pub use svrg::{svrg_contraction, svrg_solve, SvrgConfig};

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// The averaged iterate the stage hands to the next one.
    pub point: Vector,
    /// Inner iterations actually performed.
    pub inner_iterations: u64,
    /// True when a hard iteration cap cut the solve short of its stopping
    /// rule (only the adaptive solver can set this).
    pub budget_capped: bool,
}

pub(crate) fn guard_divergence(x: &Vector, context: &str) -> Result<()> {
    let n = x.norm();
    if !n.is_finite() || n > 1e8 {
        return Err(SsdcError::Diverged { context: context.to_string(), norm: n });
    }
    Ok(())
}

/// Euclidean projection onto the ball `‖x − center‖ ≤ radius`.
pub(crate) fn project_ball(x: &Vector, center: &Vector, radius: f64) -> Vector {
    let d = x.dist(center);
    if d <= radius {
        return x.clone();
    }
    let t = radius / d;
    let mut out = center.clone();
    out.add_scaled(t, &x.sub(center));
    out
}

/// Dykstra's alternating projections onto `[lo, hi]^d ∩ ball(center, radius)`
/// starting from `point`. Runs a fixed 50 rounds with early exit at change
/// below 1e−10.
pub(crate) fn dykstra_box_ball(
    point: &Vector,
    lo: f64,
    hi: f64,
    center: &Vector,
    radius: f64,
) -> Vector {
    let d = point.dim();
    let mut x = point.clone();
    let mut p = Vector::zeros(d);
    let mut q = Vector::zeros(d);
    for _ in 0..50 {
        let y = Vector::from_vec(
            x.add(&p).iter().map(|v| v.clamp(lo, hi)).collect(),
        )
        .expect("clamp of finite input");
        p = x.add(&p).sub(&y);
        let z = project_ball(&y.add(&q), center, radius);
        q = y.add(&q).sub(&z);
        let change = x.dist(&z);
        x = z;
        if change <= 1e-10 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_projection_is_radial() {
        let c = Vector::zeros(2);
        let x = Vector::from_vec(vec![3.0, 4.0]).unwrap();
        let p = project_ball(&x, &c, 1.0);
        assert!((p[0] - 0.6).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
        let inside = Vector::from_vec(vec![0.1, 0.2]).unwrap();
        assert_eq!(project_ball(&inside, &c, 1.0).as_slice(), inside.as_slice());
    }

    #[test]
    fn dykstra_reaches_the_intersection() {
        // Box [0,1]² and a ball around (2, 0) with radius 1.5: the nearest
        // point of the intersection to (2, 2) is on both boundaries.
        let center = Vector::from_vec(vec![2.0, 0.0]).unwrap();
        let start = Vector::from_vec(vec![2.0, 2.0]).unwrap();
        let z = dykstra_box_ball(&start, 0.0, 1.0, &center, 1.5);
        assert!(z.iter().all(|&v| (0.0..=1.0 + 1e-9).contains(&v)));
        assert!(z.dist(&center) <= 1.5 + 1e-9);
        // Compare against a dense scan of the feasible set.
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                let dc = ((a - 2.0) * (a - 2.0) + b * b).sqrt();
                if dc > 1.5 {
                    continue;
                }
                let dist = ((a - 2.0) * (a - 2.0) + (b - 2.0) * (b - 2.0)).sqrt();
                if dist < best.0 {
                    best = (dist, a, b);
                }
            }
        }
        assert!((z[0] - best.1).abs() < 5e-3 && (z[1] - best.2).abs() < 5e-3);
    }
}
