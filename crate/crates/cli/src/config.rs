//! Experiment configuration.
//!
//! Values are resolved in order of increasing priority: built-in defaults,
//! `HVSCAL_OUT_DIR` (output directory only), the `--config` file, then
//! command-line flags. A config file is TOML, or JSON; a JSON manifest
//! written by a previous run is accepted as-is and reproduces that run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use hvscal_core::hypervolume::{HvMode, DEFAULT_NUM_WEIGHTS};
use hvscal_core::whitebox::{FrontierSpec, Profile, DEFAULT_EPSILON, DEFAULT_GRID_N};
use hvscal_core::HvExponent;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::method::{default_methods, Method};

pub const OUT_DIR_ENV: &str = "HVSCAL_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "runs";
/// Largest candidate front whose exact hypervolume is computed for bandit
/// regret when `k > 3`.
pub const DEFAULT_REGRET_FRONT_LIMIT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Whitebox,
    Bandit,
    HvCheck,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Whitebox => "whitebox",
            Self::Bandit => "bandit",
            Self::HvCheck => "hv-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "whitebox" => Ok(Self::Whitebox),
            "bandit" => Ok(Self::Bandit),
            "hv-check" => Ok(Self::HvCheck),
            other => Err(format!("unknown experiment '{other}'")),
        }
    }
}

/// `exact`, `mc` or `mc:<num_weights>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HvModeArg(pub HvMode);

impl FromStr for HvModeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mode = match s.split_once(':') {
            None if s == "exact" => HvMode::Exact,
            None if s == "mc" => HvMode::MonteCarlo {
                num_weights: DEFAULT_NUM_WEIGHTS,
            },
            Some(("mc", m)) => match m.parse::<usize>() {
                Ok(n) if n > 0 => HvMode::MonteCarlo { num_weights: n },
                _ => return Err(format!("invalid Monte-Carlo weight count '{m}'")),
            },
            _ => return Err(format!("invalid hv mode '{s}' (expected exact, mc or mc:<m>)")),
        };
        Ok(Self(mode))
    }
}

impl fmt::Display for HvModeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            HvMode::Exact => f.write_str("exact"),
            HvMode::MonteCarlo { num_weights } => write!(f, "mc:{num_weights}"),
        }
    }
}

impl TryFrom<String> for HvModeArg {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<HvModeArg> for String {
    fn from(m: HvModeArg) -> Self {
        m.to_string()
    }
}

/// Hypervolume scalarization exponent, `pow-k` or `altered`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HvExponentArg(pub HvExponent);

impl FromStr for HvExponentArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.parse().map(Self).map_err(|e: hvscal_core::Error| e.to_string())
    }
}

impl TryFrom<String> for HvExponentArg {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<HvExponentArg> for String {
    fn from(e: HvExponentArg) -> Self {
        e.0.to_string()
    }
}

/// Whitebox surface `g1(x)·g2(y)`, written `g1,g2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FrontierArg(pub Profile, pub Profile);

impl FromStr for FrontierArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<Profile>().map_err(|e| e.to_string());
        match s.split_once(',') {
            Some((a, b)) => Ok(Self(parse(a)?, parse(b)?)),
            None => {
                let g = parse(s)?;
                Ok(Self(g, g))
            }
        }
    }
}

impl fmt::Display for FrontierArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl TryFrom<String> for FrontierArg {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<FrontierArg> for String {
    fn from(a: FrontierArg) -> Self {
        a.to_string()
    }
}

/// A single value broadcast to every objective, or one value per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceArg {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl FromStr for ReferenceArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("invalid reference value '{v}'")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(match values.as_slice() {
            [v] => Self::Scalar(*v),
            _ => Self::Vector(values),
        })
    }
}

impl ReferenceArg {
    fn expand(&self, k: usize) -> std::result::Result<Vec<f64>, String> {
        match self {
            Self::Scalar(v) => Ok(vec![*v; k]),
            Self::Vector(v) if v.len() == k => Ok(v.clone()),
            Self::Vector(v) => Err(format!("reference has {} values but k = {k}", v.len())),
        }
    }
}

/// Settings that may come from flags or from a config file. Every field is
/// optional; unset fields fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Only read from config files, where it must match the subcommand.
    #[arg(skip)]
    pub experiment: Option<Experiment>,
    /// Comma-separated method labels, e.g. hypervolume-uniform,linear-boxed.
    #[arg(long, visible_alias = "scalarizers", value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Number of objectives.
    #[arg(long)]
    pub k: Option<usize>,
    /// Action dimension (bandit).
    #[arg(long)]
    pub d: Option<usize>,
    /// Trials per run.
    #[arg(long, visible_alias = "T")]
    pub trials: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Whitebox surface profiles `g1,g2` (neg-exp, three-minus-exp, cos-plus-one).
    #[arg(long)]
    pub frontier: Option<FrontierArg>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Whitebox reference offset; the reference point is −epsilon·1.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Standard deviation of the anti-correlated pair perturbation.
    #[arg(long)]
    pub perturb_std: Option<f64>,
    /// Read --perturb-std as a fraction of the partner row's norm.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub perturb_relative: Option<bool>,
    /// Number of random candidate actions (bandit).
    #[arg(long)]
    pub n_actions: Option<usize>,
    /// Reward noise standard deviation (bandit).
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Multiplier on the confidence radius (bandit).
    #[arg(long)]
    pub ucb_scale: Option<f64>,
    /// Reference point: one value for all objectives or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<ReferenceArg>,
    /// Hypervolume evaluation: exact, mc or mc:<num_weights>.
    #[arg(long)]
    pub hv_mode: Option<HvModeArg>,
    /// Hypervolume scalarization exponent: altered or pow-k.
    #[arg(long)]
    pub hv_exponent: Option<HvExponentArg>,
    /// Record hypervolume every N trials (and at the last trial).
    #[arg(long)]
    pub hv_every: Option<usize>,
    /// Largest candidate front for which bandit regret is computed when k > 3.
    #[arg(long)]
    pub regret_front_limit: Option<usize>,
    /// Also write frontier.csv with candidate, frontier and selected points.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub snapshot: Option<bool>,
    /// Fill the elapsed_ms column.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub timing: Option<bool>,
    /// Output directory [default: $HVSCAL_OUT_DIR or ./runs].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML or JSON config file (a previous run's manifest.json works too).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Overrides {
            $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)*
        }
    };
}

impl Overrides {
    /// Field-wise `self` if set, else `lower`.
    pub fn over(&self, lower: &Overrides) -> Overrides {
        merge_fields!(self, lower; experiment, methods, k, d, trials, repeats, seed, frontier,
            grid_n, epsilon, perturb_std, perturb_relative, n_actions, noise_std, ucb_scale,
            reference, hv_mode, hv_exponent, hv_every, regret_front_limit, snapshot, timing, out,
            config)
    }
}

/// Fully resolved configuration; serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub methods: Vec<String>,
    pub k: usize,
    pub d: usize,
    pub trials: usize,
    pub repeats: usize,
    pub seed: u64,
    pub frontier: FrontierArg,
    pub grid_n: usize,
    pub epsilon: f64,
    pub perturb_std: f64,
    pub perturb_relative: bool,
    pub n_actions: usize,
    pub noise_std: f64,
    pub ucb_scale: f64,
    pub reference: Vec<f64>,
    pub hv_mode: HvModeArg,
    pub hv_exponent: HvExponentArg,
    pub hv_every: usize,
    pub regret_front_limit: usize,
    pub snapshot: bool,
    pub timing: bool,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for `experiment` with every override applied.
    pub fn resolve(experiment: Experiment, o: &Overrides) -> Result<Self> {
        if let Some(e) = o.experiment {
            if e != experiment {
                return Err(CliError::Config(format!(
                    "config file is for experiment '{e}' but '{experiment}' was requested"
                )));
            }
        }
        let (k, trials, repeats) = match experiment {
            Experiment::Whitebox => (3, 500, 10),
            Experiment::Bandit => (2, 200, 5),
            Experiment::HvCheck => (3, 100, 10),
        };
        let k = o.k.unwrap_or(k);
        let epsilon = o.epsilon.unwrap_or(DEFAULT_EPSILON);
        let perturb_relative = o.perturb_relative.unwrap_or(false);
        let reference = match &o.reference {
            Some(r) => r.expand(k).map_err(CliError::Config)?,
            None => match experiment {
                Experiment::Whitebox => vec![-epsilon; k],
                Experiment::Bandit => vec![hvscal_core::bandit::DEFAULT_REFERENCE; k],
                Experiment::HvCheck => vec![0.0; k],
            },
        };
        let out = o
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let config = Self {
            experiment,
            methods: o.methods.clone().unwrap_or_else(|| default_methods(experiment)),
            k,
            d: o.d.unwrap_or(5),
            trials: o.trials.unwrap_or(trials),
            repeats: o.repeats.unwrap_or(repeats),
            seed: o.seed.unwrap_or(0),
            frontier: o.frontier.unwrap_or(FrontierArg(Profile::NegExp, Profile::NegExp)),
            grid_n: o.grid_n.unwrap_or(DEFAULT_GRID_N),
            epsilon,
            perturb_std: o.perturb_std.unwrap_or(if perturb_relative {
                0.1
            } else {
                hvscal_core::bandit::DEFAULT_PERTURB_STD
            }),
            perturb_relative,
            n_actions: o.n_actions.unwrap_or(hvscal_core::bandit::DEFAULT_NUM_ACTIONS),
            noise_std: o.noise_std.unwrap_or(1.0),
            ucb_scale: o.ucb_scale.unwrap_or(hvscal_core::bandit::DEFAULT_UCB_SCALE),
            reference,
            hv_mode: o.hv_mode.unwrap_or(HvModeArg(HvMode::Exact)),
            hv_exponent: o.hv_exponent.unwrap_or(HvExponentArg(HvExponent::Altered)),
            hv_every: o.hv_every.unwrap_or(1),
            regret_front_limit: o.regret_front_limit.unwrap_or(DEFAULT_REGRET_FRONT_LIMIT),
            snapshot: o.snapshot.unwrap_or(false),
            timing: o.timing.unwrap_or(false),
            out,
        };
        config.validate()?;
        Ok(config)
    }

    /// Flags over the config file named by `flags.config`, if any.
    pub fn from_sources(experiment: Experiment, flags: &Overrides) -> Result<Self> {
        let merged = match &flags.config {
            Some(path) => flags.over(&load_overrides(path)?),
            None => flags.clone(),
        };
        Self::resolve(experiment, &merged)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        if self.repeats == 0 {
            return fail("repeats must be >= 1".into());
        }
        if self.k == 0 {
            return fail("k must be >= 1".into());
        }
        if self.hv_every == 0 {
            return fail("hv-every must be >= 1".into());
        }
        if self.reference.len() != self.k {
            return fail(format!("reference has {} values but k = {}", self.reference.len(), self.k));
        }
        if self.reference.iter().any(|v| !v.is_finite()) {
            return fail("reference must be finite".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        let mut labels = Vec::new();
        for m in self.parsed_methods()? {
            if labels.contains(&m.label().to_string()) {
                return fail(format!("method '{}' listed twice", m.label()));
            }
            labels.push(m.label().to_string());
        }
        match self.experiment {
            Experiment::Whitebox => {
                if self.k != 3 {
                    return fail(format!("whitebox frontiers have k = 3 objectives, got k = {}", self.k));
                }
                if let Err(e) = self.frontier_spec().validate() {
                    return fail(e.to_string());
                }
                if self.reference != vec![-self.epsilon; 3] {
                    return fail("the whitebox reference point is -epsilon in every objective; set --epsilon instead".into());
                }
            }
            Experiment::Bandit => {
                if self.d < 2 {
                    return fail("d must be >= 2".into());
                }
                if !self.trials.is_multiple_of(2) {
                    return fail(format!(
                        "bandit trials alternate exploration and exploitation and must be even, got {}",
                        self.trials
                    ));
                }
                if self.n_actions == 0 {
                    return fail("n-actions must be >= 1".into());
                }
                for (name, v) in [
                    ("noise-std", self.noise_std),
                    ("ucb-scale", self.ucb_scale),
                    ("perturb-std", self.perturb_std),
                ] {
                    if !(v.is_finite() && v >= 0.0) {
                        return fail(format!("{name} must be finite and >= 0, got {v}"));
                    }
                }
            }
            Experiment::HvCheck => {}
        }
        Ok(())
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods
            .iter()
            .map(|l| Method::parse(l, self.experiment, self.hv_exponent.0).map_err(CliError::Config))
            .collect()
    }

    pub fn frontier_spec(&self) -> FrontierSpec {
        let mut spec = FrontierSpec::product(self.frontier.0, self.frontier.1);
        spec.grid_n = self.grid_n;
        spec.epsilon = self.epsilon;
        spec
    }

    /// Whether trial `t` (0-based) gets a hypervolume value.
    pub fn is_checkpoint(&self, t: usize) -> bool {
        (t + 1).is_multiple_of(self.hv_every) || t + 1 == self.trials
    }
}

/// Reads overrides from a TOML or JSON file. A JSON object with a `config`
/// member (a run manifest) contributes that member.
pub fn load_overrides(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let bad = |e: String| CliError::Config(format!("invalid config file {}: {e}", path.display()));
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))
    }
}
