//! Run configuration: a JSON document and/or flags, resolved and validated
//! before any computation starts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use pqbbh::analysis::{
    CorpusFunction, Grid2D, IntervalUnion, LipschitzParams, ParamSchedule, KOROVKIN_SET,
};
use pqbbh::bivariate::{GeneralizedSpec, OperatorSpec};
use pqbbh::suite::{Fault, SuiteConfig};
use pqbbh::PqParams;
use serde::Deserialize;
use serde_json::json;

/// A configuration that names the constraint it violates. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Moments,
    Converge,
    Rate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Moments => "moments",
            Command::Converge => "converge",
            Command::Rate => "rate",
        }
    }
}

/// Every setting, all optional. Read from `--config` and from flags; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// JSON configuration file; flags override its values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Degree on both axes
    #[arg(long)]
    pub n: Option<usize>,
    /// Strictly increasing degrees, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Fixed p on both axes (requires --q); overrides the schedule
    #[arg(long)]
    pub p: Option<f64>,
    /// Fixed q on both axes (requires --p)
    #[arg(long)]
    pub q: Option<f64>,
    /// Parameter schedule: default or invsq
    #[arg(long)]
    pub schedule: Option<String>,
    /// Grid points per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Largest transformed coordinate t = x/(1+x) on the grid
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Function ids, comma separated (e00..e22, f_sum_ratios, f_exp_decay, f_sin_ratio)
    #[arg(long, value_delimiter = ',')]
    pub func: Option<Vec<String>>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Lipschitz constant
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<f64>,
    /// Set E as R+ or a union such as [1,2]u[4,5]
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub e: Option<String>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the identity-suite input sampling
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write per-point error surfaces next to the converge output
    #[arg(long)]
    #[serde(default)]
    pub surfaces: bool,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Random inputs per exact identity
    #[arg(long)]
    pub exact_trials: Option<usize>,
    /// Random draws per floating-point identity
    #[arg(long)]
    pub float_trials: Option<usize>,
    /// Deliberately break a check, to exercise failure reporting
    #[arg(long, hide = true)]
    #[serde(skip)]
    pub inject_fault: Option<String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> anyhow::Result<Settings> {
        let text = fs::read_to_string(path)
            .map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())).into())
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlay(self, flags: Settings) -> Settings {
        Settings {
            config: flags.config.or(self.config),
            n: flags.n.or(self.n),
            n_list: flags.n_list.or(self.n_list),
            p: flags.p.or(self.p),
            q: flags.q.or(self.q),
            schedule: flags.schedule.or(self.schedule),
            grid: flags.grid.or(self.grid),
            t_max: flags.t_max.or(self.t_max),
            func: flags.func.or(self.func),
            alpha1: flags.alpha1.or(self.alpha1),
            alpha2: flags.alpha2.or(self.alpha2),
            m: flags.m.or(self.m),
            e: flags.e.or(self.e),
            gamma1: flags.gamma1.or(self.gamma1),
            gamma2: flags.gamma2.or(self.gamma2),
            beta1: flags.beta1.or(self.beta1),
            beta2: flags.beta2.or(self.beta2),
            out: flags.out.or(self.out),
            seed: flags.seed.or(self.seed),
            surfaces: flags.surfaces || self.surfaces,
            threads: flags.threads.or(self.threads),
            exact_trials: flags.exact_trials.or(self.exact_trials),
            float_trials: flags.float_trials.or(self.float_trials),
            inject_fault: flags.inject_fault.or(self.inject_fault),
        }
    }

    /// Loads `--config` if given and lays the flags over it.
    pub fn load(flags: Settings) -> anyhow::Result<Settings> {
        match &flags.config {
            Some(path) => Ok(Settings::from_file(path)?.overlay(flags)),
            None => Ok(flags),
        }
    }
}

pub const DEFAULT_N: usize = 16;
pub const DEFAULT_N_LIST: [usize; 5] = [8, 16, 32, 64, 128];

/// A fully resolved and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub schedule_id: String,
    pub schedule: ParamSchedule,
    pub fixed: Option<PqParams>,
    pub grid: Grid2D,
    pub functions: Vec<CorpusFunction>,
    pub lipschitz: Option<LipschitzParams>,
    pub gamma: (f64, f64),
    pub beta: (f64, f64),
    pub out: Option<PathBuf>,
    pub surfaces: bool,
    pub threads: Option<usize>,
    pub suite: SuiteConfig,
}

impl RunConfig {
    pub fn resolve(command: Command, s: Settings) -> Result<RunConfig, ConfigError> {
        let schedule_id = s.schedule.clone().unwrap_or_else(|| "default".into());
        let schedule: ParamSchedule = schedule_id
            .parse()
            .map_err(|e| invalid(format!("--schedule: {e}")))?;

        let fixed = match (s.p, s.q) {
            (Some(p), Some(q)) => {
                Some(PqParams::new(p, q).map_err(|e| invalid(format!("--p/--q: {e}")))?)
            }
            (None, None) => None,
            _ => return Err(invalid("--p and --q must be given together")),
        };
        if fixed.is_some() && command == Command::Converge {
            return Err(invalid(
                "converge runs over a schedule; --p/--q are not accepted",
            ));
        }

        let n = s.n.unwrap_or(DEFAULT_N);
        if n == 0 {
            return Err(invalid("--n must be >= 1"));
        }
        let n_list = s.n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
        if n_list.is_empty() || !n_list.windows(2).all(|w| w[1] > w[0]) {
            return Err(invalid(format!(
                "--n-list must be nonempty and strictly increasing, got {n_list:?}"
            )));
        }
        let first_valid = schedule.first_valid_degree();
        let schedule_degrees: &[usize] = match command {
            Command::Converge => &n_list,
            Command::Moments | Command::Rate if fixed.is_none() => std::slice::from_ref(&n),
            _ => &[],
        };
        if let Some(bad) = schedule_degrees.iter().find(|&&d| d < first_valid) {
            return Err(invalid(format!(
                "schedule {schedule_id} is defined only for n >= {first_valid}, got n = {bad}"
            )));
        }

        let grid = Grid2D::new(
            s.grid.unwrap_or(pqbbh::analysis::grid::DEFAULT_POINTS),
            s.t_max.unwrap_or(pqbbh::analysis::grid::DEFAULT_T_MAX),
        )
        .map_err(|e| invalid(format!("--grid/--t-max: {e}")))?;

        let functions = match &s.func {
            Some(ids) => ids
                .iter()
                .map(|id| {
                    id.trim()
                        .parse::<CorpusFunction>()
                        .map_err(|e| invalid(format!("--func: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None if command == Command::Rate => vec![CorpusFunction::SumRatios],
            None => KOROVKIN_SET.to_vec(),
        };
        if functions.is_empty() {
            return Err(invalid("--func must name at least one function"));
        }

        let lipschitz =
            if s.alpha1.is_some() || s.alpha2.is_some() || s.m.is_some() || s.e.is_some() {
                let e: IntervalUnion = match &s.e {
                    Some(text) => text.parse().map_err(|e| invalid(format!("--E: {e}")))?,
                    None => IntervalUnion::half_line(),
                };
                Some(
                    LipschitzParams::new(
                        s.alpha1.unwrap_or(1.0),
                        s.alpha2.unwrap_or(1.0),
                        s.m.unwrap_or(1.0),
                        e,
                    )
                    .map_err(|e| invalid(format!("--alpha1/--alpha2/--M/--E: {e}")))?,
                )
            } else {
                None
            };

        let gamma = (s.gamma1.unwrap_or(0.0), s.gamma2.unwrap_or(0.0));
        let beta = (s.beta1.unwrap_or(0.0), s.beta2.unwrap_or(0.0));
        if ![gamma.0, gamma.1]
            .iter()
            .all(|g| g.is_finite() && *g >= 0.0)
        {
            return Err(invalid(format!(
                "--gamma1/--gamma2 must be finite and >= 0, got {gamma:?}"
            )));
        }
        if ![beta.0, beta.1].iter().all(|b| b.is_finite() && *b >= 0.0) {
            return Err(invalid(format!(
                "--beta1/--beta2 must be finite and >= 0, got {beta:?}"
            )));
        }

        if s.surfaces && s.out.is_none() {
            return Err(invalid("--surfaces needs --out to name the companion file"));
        }
        if s.threads == Some(0) {
            return Err(invalid("--threads must be >= 1"));
        }
        let fault = match s.inject_fault.as_deref() {
            None => None,
            Some("relation16-sign") => Some(Fault::Relation16Sign),
            Some(other) => return Err(invalid(format!("unknown fault '{other}'"))),
        };
        let defaults = SuiteConfig::default();
        let suite = SuiteConfig {
            seed: s.seed.unwrap_or(defaults.seed),
            exact_trials: s.exact_trials.unwrap_or(defaults.exact_trials),
            float_trials: s.float_trials.unwrap_or(defaults.float_trials),
            fault,
        };

        Ok(RunConfig {
            command,
            n,
            n_list,
            schedule_id,
            schedule,
            fixed,
            grid,
            functions,
            lipschitz,
            gamma,
            beta,
            out: s.out,
            surfaces: s.surfaces,
            threads: s.threads,
            suite,
        })
    }

    /// Parameters at degree `n`: the fixed pair if given, else the schedule.
    pub fn params(&self, n: usize) -> Result<PqParams, ConfigError> {
        match self.fixed {
            Some(p) => Ok(p),
            None => self.schedule.params(n).map_err(|e| invalid(e.to_string())),
        }
    }

    pub fn spec(&self) -> Result<OperatorSpec, ConfigError> {
        let params = self.params(self.n)?;
        OperatorSpec::symmetric(self.n, params).map_err(|e| invalid(e.to_string()))
    }

    pub fn generalized_spec(&self) -> Result<GeneralizedSpec, ConfigError> {
        GeneralizedSpec::new(self.spec()?, self.gamma, self.beta)
            .map_err(|e| invalid(e.to_string()))
    }

    /// One-line JSON echo of every setting that affects results. The output
    /// path and thread count are left out so that reruns compare byte for byte.
    pub fn echo(&self) -> String {
        let functions: Vec<String> = self.functions.iter().map(ToString::to_string).collect();
        let value = json!({
            "command": self.command.name(),
            "n": self.n,
            "n_list": self.n_list,
            "schedule": self.schedule_id,
            "p": self.fixed.map(|p| p.p()),
            "q": self.fixed.map(|p| p.q()),
            "grid": self.grid.len(),
            "t_max": self.grid.t_max(),
            "func": functions,
            "alpha1": self.lipschitz.as_ref().map(|l| l.alpha1),
            "alpha2": self.lipschitz.as_ref().map(|l| l.alpha2),
            "M": self.lipschitz.as_ref().map(|l| l.m),
            "E": self.lipschitz.as_ref().map(|l| l.e.to_string()),
            "gamma1": self.gamma.0,
            "gamma2": self.gamma.1,
            "beta1": self.beta.0,
            "beta2": self.beta.1,
            "seed": self.suite.seed,
            "surfaces": self.surfaces,
        });
        value.to_string()
    }
}
