//! Stagewise stochastic optimization for difference-of-convex objectives.
//!
//! The objective shape is `F(x) = g(x) + r(x) − h(x)`: a smooth or
//! finite-sum convex part `g`, a proximable regularizer `r`, and a convex
//! part `h` entering with a minus sign. Each stage linearizes `h` at the
//! current center, adds a proximal quadratic, and hands the resulting convex
//! subproblem to a stochastic inner solver (smooth-step or nonsmooth-step
//! proximal subgradient, adaptive dual averaging, or variance reduction).
//! The reported iterate is sampled over stage centers, which is what the
//! convergence guarantees are stated for.
//!
//! Supporting pieces: gradient-mapping criticality certificates
//! ([`criticality`]), an envelope-smoothing reduction that moves hard
//! regularizers into the concave slot ([`moreau`], [`driver::ssdc_moreau_run`]),
//! proximable penalties split into convex differences ([`penalty`]),
//! and metered oracles so gradient-evaluation budgets mean the same thing
//! across solvers ([`oracle`]).

pub mod criticality;
pub mod driver;
pub mod error;
pub mod majorant;
pub mod moreau;
pub mod oracle;
pub mod penalty;
pub mod problem;
pub mod prox;
pub mod solvers;
pub mod vector;

pub use crate::criticality::{
    brute_force_critical, holder_criticality, prox_point, CriticalityEstimate, GridSpec,
    SmoothSide,
};
pub use crate::driver::{
    default_spg_gamma, mu_for_target, schedule_gamma, ssdc_moreau_run, ssdc_run, AdaGradParams,
    GammaSchedule, MoreauInfo, RunOptions, RunReport, SamplingLaw, SmoothingTarget, SolverKind,
    StageRecord,
};
pub use crate::error::{Result, SsdcError};
pub use crate::majorant::{build_majorant, HBatch, MajorantSubproblem};
pub use crate::moreau::MoreauEnvelope;
pub use crate::oracle::{
    ConvexOracle, CountingOracle, DiagQuadratic, IsoQuadratic, LinearOracle, MoreauComplement,
    QuadraticComponents, SumOracle, ZeroOracle,
};
pub use crate::penalty::{dc_penalty, DcPenalty, PenaltyComplement, PenaltyKind};
pub use crate::problem::{DcProblem, ProblemConstants};
pub use crate::prox::{
    prox_l0, prox_l1, prox_lp_half, shifted_prox, BoxBounds, L0, L1, LpHalf, Regularizer, SqL2,
    ZeroReg,
};
pub use crate::solvers::{
    adagrad_solve, spg_solve, svrg_contraction, svrg_solve, AdaGradConfig, SolveOutput, SpgConfig,
    SpgOption, SvrgConfig,
};
pub use crate::vector::Vector;
