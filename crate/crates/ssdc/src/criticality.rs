//! Criticality measures and reference oracles.
//!
//! Near-criticality of `F = g + r − h` at `z` is measured through the
//! proximal-point map `P_γ(z) = argmin_y g(y) + r(y) − ⟨v, y⟩ + (γ/2)‖y−z‖²`
//! with `v ∈ ∂h(z)`: the scaled step `G_γ(z) = γ(z − P_γ(z))` vanishes
//! exactly at critical points. All diagnostics here use unmetered oracle
//! access so they never perturb a run's evaluation accounting.

use crate::error::{Result, SsdcError};
use crate::problem::DcProblem;
use crate::vector::Vector;

#[derive(Debug, Clone)]
pub struct CriticalityEstimate {
    /// Approximate proximal point `P_γ(z)`.
    pub p_gamma: Vector,
    /// Curvature used by the map.
    pub gamma: f64,
    /// `‖G_γ(z)‖ = γ‖z − P_γ(z)‖`.
    pub g_gamma_norm: f64,
    /// Upper bound on the inner subproblem's optimality gap at `p_gamma`.
    pub subproblem_gap_bound: f64,
    /// Distance-to-criticality bound from [`holder_criticality`], when taken.
    pub holder_distance: Option<f64>,
    /// Whether the inner solve reached its residual tolerance. `false` means
    /// the iteration cap was hit and the estimate is not certified.
    pub certified: bool,
}

/// Which side of the objective carries the smoothness used to translate
/// `‖G_γ‖` into a distance-to-criticality certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothSide {
    /// `g` is smooth (certificate interpreted at the query point).
    GPlusR,
    /// `∇h` is Hölder continuous (certificate interpreted at `P_γ(z)`).
    H,
}

/// Evaluates the proximal-point criticality measure at `z`.
///
/// The strongly convex subproblem is solved by proximal gradient descent
/// with step `1/(L+γ)` until the scaled fixed-point residual
/// `(L+γ)·‖y − y⁺‖` drops to `tol`, where `L` is the smoothness constant of
/// `g`. Hitting the iteration cap (10⁶) yields `certified: false`.
pub fn prox_point(problem: &DcProblem, z: &[f64], gamma: f64, tol: f64) -> Result<CriticalityEstimate> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SsdcError::parameter(format!(
            "criticality curvature gamma must be positive, got {gamma}"
        )));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(SsdcError::parameter(format!(
            "residual tolerance must be positive, got {tol}"
        )));
    }
    if z.len() != problem.dim() {
        return Err(SsdcError::parameter(format!(
            "query has dimension {}, problem has {}",
            z.len(),
            problem.dim()
        )));
    }
    let l = problem.smoothness().ok_or_else(|| {
        SsdcError::MissingConstant(
            "smoothness constant of g (required for the proximal-point step size)".into(),
        )
    })?;
    let g = problem.g_uncounted();
    let r = problem.r().clone();
    let h_lin = problem.h_uncounted().full_subgradient(z);
    let zv = Vector::from_slice(z)?;

    let scale = l + gamma;
    let step = 1.0 / scale;
    let mut y = r.prox(z, step);
    let mut res;
    let mut certified = false;
    const CAP: u64 = 1_000_000;
    let mut iters: u64 = 0;
    loop {
        iters += 1;
        let grad = g
            .full_subgradient(y.as_slice())
            .sub(&h_lin)
            .add(&y.sub(&zv).scaled(gamma));
        let y_next = r.prox(y.sub(&grad.scaled(step)).as_slice(), step);
        res = scale * y.dist(&y_next);
        y = y_next;
        if y.norm() > 1e8 {
            return Err(SsdcError::Diverged {
                context: "proximal-point subproblem".into(),
                norm: y.norm(),
            });
        }
        if res <= tol {
            certified = true;
            break;
        }
        if iters >= CAP {
            break;
        }
    }

    let g_gamma_norm = gamma * zv.dist(&y);
    Ok(CriticalityEstimate {
        p_gamma: y,
        gamma,
        g_gamma_norm,
        subproblem_gap_bound: 2.0 * res * res / gamma,
        holder_distance: None,
        certified,
    })
}

/// Converts `‖G_γ‖` into the distance-to-criticality bound
/// `(L/γ^ν)·‖G_γ‖^ν + ‖G_γ‖`, using the Hölder constants of the chosen
/// smooth side. For [`SmoothSide::H`] the certificate holds at `P_γ(z)`, for
/// [`SmoothSide::GPlusR`] at the query point `z` itself. The bound is stored
/// on the estimate and returned.
pub fn holder_criticality(
    problem: &DcProblem,
    z: &[f64],
    est: &mut CriticalityEstimate,
    side: SmoothSide,
) -> Result<f64> {
    if z.len() != problem.dim() {
        return Err(SsdcError::parameter(format!(
            "query has dimension {}, problem has {}",
            z.len(),
            problem.dim()
        )));
    }
    let (l, nu) = match side {
        SmoothSide::H => problem.holder().ok_or_else(|| {
            SsdcError::MissingConstant("Hölder constants (L, nu) of the concave term".into())
        })?,
        SmoothSide::GPlusR => problem
            .smoothness()
            .map(|l| (l, 1.0))
            .or_else(|| problem.g_uncounted().holder())
            .ok_or_else(|| {
                SsdcError::MissingConstant("smoothness or Hölder constants of the smooth term".into())
            })?,
    };
    let gn = est.g_gamma_norm;
    let bound = l / est.gamma.powf(nu) * gn.powf(nu) + gn;
    est.holder_distance = Some(bound);
    Ok(bound)
}

/// Rectangular search grid for the brute-force reference oracle.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: f64,
}

/// Enumerates a lattice over the grid and returns the near-critical points.
///
/// When the regularizer is differentiable the score is the criticality
/// residual `‖∇g(x) + ∇r(x) − ∇h(x)‖`; otherwise it is the objective itself
/// and criticality means local minimality. Either way a point qualifies if
/// its score does not exceed any lattice neighbor's (including diagonals in
/// two dimensions). Only supports dimension 1 and 2; this is a slow
/// reference used to sanity-check the scalable criticality measures.
pub fn brute_force_critical(problem: &DcProblem, grid: &GridSpec) -> Result<Vec<Vector>> {
    let d = problem.dim();
    if d > 2 {
        return Err(SsdcError::parameter(format!(
            "brute-force search only supports dimension 1 or 2, problem has {d}"
        )));
    }
    if grid.lo.len() != d || grid.hi.len() != d {
        return Err(SsdcError::parameter("grid bounds must match the problem dimension"));
    }
    if grid.step <= 0.0 || !grid.step.is_finite() {
        return Err(SsdcError::parameter(format!("grid step must be positive, got {}", grid.step)));
    }
    let mut counts = Vec::with_capacity(d);
    for i in 0..d {
        if grid.lo[i] >= grid.hi[i] {
            return Err(SsdcError::parameter(format!(
                "grid bounds must satisfy lo < hi, got [{}, {}]",
                grid.lo[i], grid.hi[i]
            )));
        }
        let n = ((grid.hi[i] - grid.lo[i]) / grid.step).ceil() as usize + 1;
        counts.push(n);
    }
    let total: usize = counts.iter().product();
    if total > 20_000_000 {
        return Err(SsdcError::parameter(format!(
            "grid has {total} points; refuse to enumerate more than 2e7"
        )));
    }

    let coord = |axis: usize, idx: usize| -> f64 {
        (grid.lo[axis] + idx as f64 * grid.step).min(grid.hi[axis])
    };
    let g = problem.g_uncounted();
    let h = problem.h_uncounted();
    let r = problem.r().clone();
    let smooth_r = r.smooth_gradient(&vec![0.0; d]).is_some();
    let eval = |x: &[f64]| -> f64 {
        if smooth_r {
            let rg = r.smooth_gradient(x).expect("smooth regularizer");
            g.full_subgradient(x).add(&rg).sub(&h.full_subgradient(x)).norm()
        } else {
            problem.objective_value(x).unwrap_or(f64::INFINITY)
        }
    };

    let mut out = Vec::new();
    match d {
        1 => {
            let vals: Vec<f64> = (0..counts[0]).map(|i| eval(&[coord(0, i)])).collect();
            for i in 0..counts[0] {
                if !vals[i].is_finite() {
                    continue;
                }
                let left_ok = i == 0 || vals[i] <= vals[i - 1];
                let right_ok = i + 1 == counts[0] || vals[i] <= vals[i + 1];
                if left_ok && right_ok {
                    out.push(Vector::from_vec(vec![coord(0, i)])?);
                }
            }
        }
        _ => {
            let (nx, ny) = (counts[0], counts[1]);
            let mut vals = vec![0.0; nx * ny];
            for i in 0..nx {
                for j in 0..ny {
                    vals[i * ny + j] = eval(&[coord(0, i), coord(1, j)]);
                }
            }
            for i in 0..nx {
                for j in 0..ny {
                    let v = vals[i * ny + j];
                    if !v.is_finite() {
                        continue;
                    }
                    let mut is_min = true;
                    'scan: for di in -1i64..=1 {
                        for dj in -1i64..=1 {
                            if di == 0 && dj == 0 {
                                continue;
                            }
                            let (ni, nj) = (i as i64 + di, j as i64 + dj);
                            if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                                continue;
                            }
                            if vals[ni as usize * ny + nj as usize] < v {
                                is_min = false;
                                break 'scan;
                            }
                        }
                    }
                    if is_min {
                        out.push(Vector::from_vec(vec![coord(0, i), coord(1, j)])?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Scans `f` over `[lo, hi]` with the given step and returns the best
/// `(argmin, min)` pair. A plain reference oracle for one-dimensional
/// minimizations in tests.
pub fn grid_min_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    assert!(step > 0.0 && hi >= lo, "grid_min_1d needs step > 0 and hi >= lo");
    let mut best_x = lo;
    let mut best_v = f(lo);
    let n = ((hi - lo) / step).ceil() as usize;
    for i in 1..=n {
        let x = (lo + i as f64 * step).min(hi);
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    (best_x, best_v)
}
