//! Flat key-value experiment configuration.
//!
//! One file describes one experiment: `key = value` lines with dotted
//! section prefixes, `#` comments, and comma-separated lists. Unknown keys
//! are rejected so typos fail loudly instead of silently running defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ssdc::{
    AdaGradParams, GammaSchedule, Regularizer, SamplingLaw, SmoothingTarget, SolverKind,
};
use ssdc_data::{LossSpec, ScaleMode, SyntheticSpec, Task};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("key '{key}': {detail}")]
    Value { key: String, detail: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("unknown key '{0}'")]
    Unknown(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn value_err(key: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), detail: detail.into() }
}

/// Raw parsed key-value pairs, kept around so tuning can override single
/// keys and rebuild.
pub type RawConfig = BTreeMap<String, String>;

/// Parses the flat `key = value` format.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            detail: "expected 'key = value'".to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: idx + 1, detail: "empty key".to_string() });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                detail: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(map)
}

/// Where the training data comes from.
#[derive(Debug, Clone)]
pub enum ProblemSource {
    Synthetic(SyntheticSpec),
    Libsvm { path: PathBuf, task: Task },
}

/// The regularizer slot.
#[derive(Debug, Clone)]
pub enum RegSpec {
    /// A difference-of-convex sparsity penalty (lsp/mcp/scad/tl1/capped_l1).
    Penalty(ssdc::DcPenalty),
    /// A plain proximable regularizer: `l1`, `l0`, or `lp_half` with weight λ.
    Plain { kind: PlainRegKind, lambda: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlainRegKind {
    L1,
    L0,
    LpHalf,
}

impl RegSpec {
    /// The `r`-slot regularizer for plain kinds; DC penalties contribute
    /// through the ERM builder instead.
    pub fn plain_regularizer(&self) -> Option<Arc<dyn Regularizer>> {
        match self {
            RegSpec::Plain { kind, lambda } => {
                let reg: Arc<dyn Regularizer> = match kind {
                    PlainRegKind::L1 => Arc::new(ssdc::L1::new(*lambda).expect("validated")),
                    PlainRegKind::L0 => Arc::new(ssdc::L0::new(*lambda).expect("validated")),
                    PlainRegKind::LpHalf => {
                        Arc::new(ssdc::LpHalf::new(*lambda).expect("validated"))
                    }
                };
                Some(reg)
            }
            RegSpec::None => Some(Arc::new(ssdc::ZeroReg)),
            RegSpec::Penalty(_) => None,
        }
    }
}

/// One algorithm column in the trace output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    SpgSmooth,
    SpgNonsmooth,
    AdaGrad,
    Svrg,
    MoreauSpgSmooth,
    MoreauSvrg,
    /// Proximal stochastic subgradient with step `η₀/√t`.
    ProxSgd,
    /// Deterministic proximal gradient.
    ProxGd,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::SpgSmooth => "spg-smooth",
            Variant::SpgNonsmooth => "spg-nonsmooth",
            Variant::AdaGrad => "adagrad",
            Variant::Svrg => "svrg",
            Variant::MoreauSpgSmooth => "moreau-spg-smooth",
            Variant::MoreauSvrg => "moreau-svrg",
            Variant::ProxSgd => "prox-sgd",
            Variant::ProxGd => "prox-gd",
        }
    }

    pub fn parse(token: &str) -> Result<Self, ConfigError> {
        Ok(match token {
            "spg-smooth" => Variant::SpgSmooth,
            "spg-nonsmooth" => Variant::SpgNonsmooth,
            "adagrad" => Variant::AdaGrad,
            "svrg" => Variant::Svrg,
            "moreau-spg-smooth" => Variant::MoreauSpgSmooth,
            "moreau-svrg" => Variant::MoreauSvrg,
            "prox-sgd" => Variant::ProxSgd,
            "prox-gd" => Variant::ProxGd,
            other => {
                return Err(ConfigError::Invalid(format!("unknown variant '{other}'")));
            }
        })
    }

    pub fn is_baseline(&self) -> bool {
        matches!(self, Variant::ProxSgd | Variant::ProxGd)
    }

    pub fn is_moreau(&self) -> bool {
        matches!(self, Variant::MoreauSpgSmooth | Variant::MoreauSvrg)
    }

    /// The stagewise solver behind this variant, for non-baselines.
    pub fn solver(&self, adagrad: AdaGradParams) -> Option<SolverKind> {
        match self {
            Variant::SpgSmooth | Variant::MoreauSpgSmooth => Some(SolverKind::SpgSmooth),
            Variant::SpgNonsmooth => Some(SolverKind::SpgNonsmooth),
            Variant::AdaGrad => Some(SolverKind::AdaGrad(adagrad)),
            Variant::Svrg | Variant::MoreauSvrg => Some(SolverKind::Svrg),
            Variant::ProxSgd | Variant::ProxGd => None,
        }
    }
}

/// Gamma schedule description; `None` value means "default to 3L once the
/// problem's smoothness is known".
#[derive(Debug, Clone, Copy)]
pub struct GammaSpec {
    pub kind: GammaKind,
    pub value: Option<f64>,
    pub beta: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaKind {
    Constant,
    Power,
    Holder,
}

impl GammaSpec {
    /// Materializes the schedule, filling the default base `3L` when no
    /// explicit value was configured.
    pub fn build(&self, smoothness: Option<f64>) -> Result<GammaSchedule, ConfigError> {
        let base = match (self.value, smoothness) {
            (Some(v), _) => v,
            (None, Some(l)) => 3.0 * l,
            (None, None) => {
                return Err(ConfigError::Invalid(
                    "gamma.value is required when the problem has no smoothness constant"
                        .to_string(),
                ));
            }
        };
        let schedule = match self.kind {
            GammaKind::Constant => GammaSchedule::constant(base),
            GammaKind::Power => GammaSchedule::power(base, self.beta),
            GammaKind::Holder => GammaSchedule::holder(base, self.nu),
        };
        schedule.map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Overrides for problem constants the oracles cannot state themselves.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantOverrides {
    pub smoothness: Option<f64>,
    pub grad_bound: Option<f64>,
    pub reg_bound: Option<f64>,
    pub gap_bound: Option<f64>,
}

/// Tuning request: sweep one numeric key over a grid on a holdout seed.
#[derive(Debug, Clone)]
pub struct TuneSpec {
    pub param: String,
    pub values: Vec<f64>,
    pub seed: u64,
}

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: ProblemSource,
    pub scale: ScaleMode,
    pub loss: LossSpec,
    pub reg: RegSpec,
    pub ridge: f64,
    pub moreau_eps: Option<f64>,
    pub moreau_target: SmoothingTarget,
    pub variants: Vec<Variant>,
    pub stages: usize,
    pub gamma: GammaSpec,
    pub law: SamplingLaw,
    pub seeds: Vec<u64>,
    pub budget: Option<u64>,
    pub adagrad: AdaGradParams,
    pub eta0: f64,
    pub trace_stride: usize,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub constants: ConstantOverrides,
    pub tune: Option<TuneSpec>,
    /// The raw pairs this config was built from, for single-key overrides.
    pub raw: RawConfig,
}

const KNOWN_KEYS: &[&str] = &[
    "problem.source",
    "problem.path",
    "problem.task",
    "problem.scale",
    "synthetic.n",
    "synthetic.d",
    "synthetic.sparsity",
    "synthetic.noise",
    "synthetic.seed",
    "loss.kind",
    "loss.delta",
    "loss.alpha",
    "reg.kind",
    "reg.lambda",
    "reg.theta",
    "reg.ridge",
    "moreau.eps",
    "moreau.target",
    "run.variants",
    "run.stages",
    "run.seeds",
    "run.budget",
    "gamma.kind",
    "gamma.value",
    "gamma.beta",
    "gamma.nu",
    "sampling.law",
    "sampling.alpha",
    "adagrad.step_scale",
    "adagrad.norm_balance",
    "adagrad.max_iterations",
    "baseline.eta0",
    "output.dir",
    "output.trace_stride",
    "threads",
    "tune.param",
    "tune.values",
    "tune.seed",
    "constants.smoothness",
    "constants.grad_bound",
    "constants.reg_bound",
    "constants.gap_bound",
];

struct Reader<'a> {
    map: &'a RawConfig,
}

impl<'a> Reader<'a> {
    fn str_opt(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn str_req(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.str_opt(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.str_opt(key) {
            None => Ok(None),
            Some(s) => {
                let v: f64 =
                    s.parse().map_err(|_| value_err(key, format!("not a number: '{s}'")))?;
                if !v.is_finite() {
                    return Err(value_err(key, "must be finite"));
                }
                Ok(Some(v))
            }
        }
    }

    fn f64_default(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.str_opt(key) {
            None => Ok(None),
            Some(s) => {
                let v: usize =
                    s.parse().map_err(|_| value_err(key, format!("not a count: '{s}'")))?;
                Ok(Some(v))
            }
        }
    }

    fn u64_opt(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.str_opt(key) {
            None => Ok(None),
            Some(s) => {
                let v: u64 = s
                    .parse()
                    .map_err(|_| value_err(key, format!("not an integer: '{s}'")))?;
                Ok(Some(v))
            }
        }
    }

    fn list(&self, key: &str) -> Result<Vec<&'a str>, ConfigError> {
        let raw = self.str_req(key)?;
        let items: Vec<&str> = raw.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(value_err(key, "list must be nonempty"));
        }
        Ok(items)
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(parse_raw(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        for key in raw.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::Unknown(key.clone()));
            }
        }
        let r = Reader { map: &raw };

        let task = match r.str_opt("problem.task").unwrap_or("classification") {
            "classification" => Task::Classification,
            "regression" => Task::Regression,
            other => return Err(value_err("problem.task", format!("unknown task '{other}'"))),
        };
        let source = match r.str_req("problem.source")? {
            "synthetic" => {
                let n = r.usize_opt("synthetic.n")?.ok_or(ConfigError::Missing("synthetic.n".into()))?;
                let d = r.usize_opt("synthetic.d")?.ok_or(ConfigError::Missing("synthetic.d".into()))?;
                ProblemSource::Synthetic(SyntheticSpec {
                    n,
                    d,
                    task,
                    sparsity: r.usize_opt("synthetic.sparsity")?.unwrap_or(d.min(5)),
                    noise: r.f64_default("synthetic.noise", 0.1)?,
                    seed: r.u64_opt("synthetic.seed")?.unwrap_or(0),
                })
            }
            "libsvm" => ProblemSource::Libsvm {
                path: PathBuf::from(r.str_req("problem.path")?),
                task,
            },
            other => {
                return Err(value_err("problem.source", format!("unknown source '{other}'")));
            }
        };
        let scale = match r.str_opt("problem.scale").unwrap_or("max_abs") {
            "max_abs" => ScaleMode::MaxAbs,
            "off" => ScaleMode::Off,
            other => return Err(value_err("problem.scale", format!("unknown mode '{other}'"))),
        };

        let loss = Self::parse_loss(&r, &source)?;
        let reg = Self::parse_reg(&r)?;
        let ridge = r.f64_default("reg.ridge", 0.0)?;
        if ridge < 0.0 {
            return Err(value_err("reg.ridge", "must be nonnegative"));
        }

        let moreau_eps = r.f64_opt("moreau.eps")?;
        if let Some(eps) = moreau_eps {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(value_err("moreau.eps", "must lie in (0, 1)"));
            }
        }
        let moreau_target = match r.str_opt("moreau.target").unwrap_or("lower_bounded") {
            "lipschitz" => SmoothingTarget::LipschitzR,
            "lower_bounded" => SmoothingTarget::LowerBoundedR,
            "compact" => SmoothingTarget::CompactR,
            other => return Err(value_err("moreau.target", format!("unknown target '{other}'"))),
        };

        let mut variants = Vec::new();
        for token in r.list("run.variants")? {
            let v = Variant::parse(token)?;
            if variants.contains(&v) {
                return Err(value_err("run.variants", format!("duplicate variant '{token}'")));
            }
            variants.push(v);
        }
        if variants.iter().any(Variant::is_moreau) && moreau_eps.is_none() {
            return Err(ConfigError::Missing("moreau.eps".into()));
        }

        let stages = r.usize_opt("run.stages")?.unwrap_or(0);
        if variants.iter().any(|v| !v.is_baseline()) && stages == 0 {
            return Err(ConfigError::Missing("run.stages".into()));
        }

        let mut seeds = Vec::new();
        for token in r.list("run.seeds")? {
            let s: u64 = token
                .parse()
                .map_err(|_| value_err("run.seeds", format!("bad seed '{token}'")))?;
            seeds.push(s);
        }

        let budget = r.u64_opt("run.budget")?;
        if budget == Some(0) {
            return Err(value_err("run.budget", "must be positive when set"));
        }
        if variants.iter().any(Variant::is_baseline) && budget.is_none() {
            return Err(ConfigError::Missing("run.budget".into()));
        }

        let gamma = GammaSpec {
            kind: match r.str_opt("gamma.kind").unwrap_or("constant") {
                "constant" => GammaKind::Constant,
                "power" => GammaKind::Power,
                "holder" => GammaKind::Holder,
                other => return Err(value_err("gamma.kind", format!("unknown kind '{other}'"))),
            },
            value: r.f64_opt("gamma.value")?,
            beta: r.f64_default("gamma.beta", 0.5)?,
            nu: r.f64_default("gamma.nu", 1.0)?,
        };
        if let Some(v) = gamma.value {
            if v <= 0.0 {
                return Err(value_err("gamma.value", "must be positive"));
            }
        }

        let law = match r.str_opt("sampling.law").unwrap_or("power") {
            "uniform" => SamplingLaw::Uniform,
            "power" => {
                let alpha = r.f64_default("sampling.alpha", 2.0)?;
                SamplingLaw::power(alpha).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            other => return Err(value_err("sampling.law", format!("unknown law '{other}'"))),
        };

        let adagrad = AdaGradParams {
            step_scale: r.f64_default("adagrad.step_scale", 1.0)?,
            norm_balance: r.f64_default("adagrad.norm_balance", 1.0)?,
            max_iterations: r.usize_opt("adagrad.max_iterations")?.unwrap_or(200_000),
        };
        if adagrad.step_scale <= 0.0 || adagrad.norm_balance <= 0.0 || adagrad.max_iterations == 0
        {
            return Err(ConfigError::Invalid(
                "adagrad parameters must be positive".to_string(),
            ));
        }

        let eta0 = r.f64_default("baseline.eta0", 0.1)?;
        if eta0 <= 0.0 {
            return Err(value_err("baseline.eta0", "must be positive"));
        }

        let trace_stride = r.usize_opt("output.trace_stride")?.unwrap_or(0);
        let out_dir = PathBuf::from(r.str_opt("output.dir").unwrap_or("out"));
        let threads = r.usize_opt("threads")?;
        if threads == Some(0) {
            return Err(value_err("threads", "must be positive when set"));
        }

        let constants = ConstantOverrides {
            smoothness: r.f64_opt("constants.smoothness")?,
            grad_bound: r.f64_opt("constants.grad_bound")?,
            reg_bound: r.f64_opt("constants.reg_bound")?,
            gap_bound: r.f64_opt("constants.gap_bound")?,
        };

        let tune = match r.str_opt("tune.param") {
            None => {
                if raw.contains_key("tune.values") || raw.contains_key("tune.seed") {
                    return Err(ConfigError::Missing("tune.param".into()));
                }
                None
            }
            Some(param) => {
                if !KNOWN_KEYS.contains(&param) {
                    return Err(value_err("tune.param", format!("unknown key '{param}'")));
                }
                let mut values = Vec::new();
                for token in r.list("tune.values")? {
                    let v: f64 = token
                        .parse()
                        .map_err(|_| value_err("tune.values", format!("bad number '{token}'")))?;
                    values.push(v);
                }
                let seed = r.u64_opt("tune.seed")?.unwrap_or(seeds[0]);
                Some(TuneSpec { param: param.to_string(), values, seed })
            }
        };

        Ok(ExperimentConfig {
            source,
            scale,
            loss,
            reg,
            ridge,
            moreau_eps,
            moreau_target,
            variants,
            stages,
            gamma,
            law,
            seeds,
            budget,
            adagrad,
            eta0,
            trace_stride,
            out_dir,
            threads,
            constants,
            tune,
            raw,
        })
    }

    fn parse_loss(r: &Reader, source: &ProblemSource) -> Result<LossSpec, ConfigError> {
        let kind = r.str_req("loss.kind")?;
        let to_cfg = |e: ssdc_data::DataError| ConfigError::Invalid(e.to_string());
        Ok(match kind {
            "logistic" => LossSpec::logistic(),
            "squared" => LossSpec::squared(),
            "hinge" => LossSpec::hinge(),
            "absolute" => LossSpec::absolute(),
            "sigmoid_ls" => LossSpec::sigmoid_ls(),
            "huber" => LossSpec::huber(r.f64_default("loss.delta", 1.0)?).map_err(to_cfg)?,
            "truncated_ls" => match r.f64_opt("loss.alpha")? {
                Some(alpha) => LossSpec::truncated_ls(alpha).map_err(to_cfg)?,
                None => {
                    let n = match source {
                        ProblemSource::Synthetic(spec) => spec.n,
                        ProblemSource::Libsvm { .. } => {
                            return Err(ConfigError::Missing("loss.alpha".into()));
                        }
                    };
                    LossSpec::truncated_ls_default(n).map_err(to_cfg)?
                }
            },
            other => return Err(value_err("loss.kind", format!("unknown loss '{other}'"))),
        })
    }

    fn parse_reg(r: &Reader) -> Result<RegSpec, ConfigError> {
        let kind = r.str_opt("reg.kind").unwrap_or("none");
        if kind == "none" {
            return Ok(RegSpec::None);
        }
        let lambda = r
            .f64_opt("reg.lambda")?
            .ok_or(ConfigError::Missing("reg.lambda".into()))?;
        let penalty_kind = match kind {
            "lsp" => Some(ssdc::PenaltyKind::Lsp),
            "mcp" => Some(ssdc::PenaltyKind::Mcp),
            "scad" => Some(ssdc::PenaltyKind::Scad),
            "tl1" => Some(ssdc::PenaltyKind::Tl1),
            "capped_l1" => Some(ssdc::PenaltyKind::CappedL1),
            _ => None,
        };
        if let Some(pk) = penalty_kind {
            let theta = r
                .f64_opt("reg.theta")?
                .ok_or(ConfigError::Missing("reg.theta".into()))?;
            let penalty = ssdc::DcPenalty::new(pk, lambda, theta)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            return Ok(RegSpec::Penalty(penalty));
        }
        let plain = match kind {
            "l1" => PlainRegKind::L1,
            "l0" => PlainRegKind::L0,
            "lp_half" => PlainRegKind::LpHalf,
            other => return Err(value_err("reg.kind", format!("unknown regularizer '{other}'"))),
        };
        if lambda <= 0.0 {
            return Err(value_err("reg.lambda", "must be positive"));
        }
        Ok(RegSpec::Plain { kind: plain, lambda })
    }

    /// Rebuilds the config with one raw key replaced (command-line flags and
    /// programmatic overrides).
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self, ConfigError> {
        let mut raw = self.raw.clone();
        raw.insert(key.to_string(), value.to_string());
        Self::from_raw(raw)
    }

    /// Derives the config for one tuning grid point: the swept key replaced,
    /// the seed list collapsed to the holdout, and the tune block dropped so
    /// the point does not recurse into another sweep.
    pub fn sweep_point(&self, param: &str, value: f64, seed: u64) -> Result<Self, ConfigError> {
        let mut raw = self.raw.clone();
        raw.insert(param.to_string(), format!("{value}"));
        raw.insert("run.seeds".to_string(), seed.to_string());
        raw.remove("tune.param");
        raw.remove("tune.values");
        raw.remove("tune.seed");
        Self::from_raw(raw)
    }
}
