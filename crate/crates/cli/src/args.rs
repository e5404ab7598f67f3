use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use resetfpt::optimize::{lin_grid, log_grid};
use resetfpt::resetting::DerivativeMode;
use resetfpt::{ModelSpec, ProblemSpec};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "resetfpt",
    version,
    about = "Passage and exit times of diffusions under Poissonian resetting",
    args_override_self = true
)]
pub struct Cli {
    /// Key-value file (`key = value` per line) supplying defaults for any
    /// flag; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform E[exp(-lam tau)] and its survival counterpart.
    Lt {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        lam: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expected passage or exit time at one resetting rate.
    Mean {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Second moment and variance at one resetting rate.
    SecondMoment {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, value_enum, default_value_t = Derivative::Auto)]
        derivative: Derivative,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Resetting rate minimizing the expected time.
    Optimize {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expected time over a grid of rates.
    Scan {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Rates as `min:max:count@log|lin`.
        #[arg(long = "r-grid", value_name = "GRID")]
        r_grid: Grid,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Optimal rate across start or reset positions.
    #[command(group(ArgGroup::new("over").required(true).args(["x_grid", "x_r_grid"])))]
    Profile {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Start positions as `min:max:count@log|lin`.
        #[arg(long = "x-grid", value_name = "GRID")]
        x_grid: Option<Grid>,
        /// Reset positions as `min:max:count@log|lin`.
        #[arg(long = "x-r-grid", value_name = "GRID")]
        x_r_grid: Option<Grid>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the first two moments.
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute one of the reference tables.
    Table {
        /// One of tab1..tab16.
        #[arg(long)]
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lt { .. } => "lt",
            Command::Mean { .. } => "mean",
            Command::SecondMoment { .. } => "second-moment",
            Command::Optimize { .. } => "optimize",
            Command::Scan { .. } => "scan",
            Command::Profile { .. } => "profile",
            Command::Simulate { .. } => "simulate",
            Command::Table { .. } => "table",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Lt { output, .. }
            | Command::Mean { output, .. }
            | Command::SecondMoment { output, .. }
            | Command::Optimize { output, .. }
            | Command::Scan { output, .. }
            | Command::Profile { output, .. }
            | Command::Simulate { output, .. }
            | Command::Table { output, .. } => output,
        }
    }
}

const COMMANDS: [&str; 8] = [
    "lt",
    "mean",
    "second-moment",
    "optimize",
    "scan",
    "profile",
    "simulate",
    "table",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bm,
    Ou,
    Cir,
    Feller,
    Wf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Fpt,
    Fet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Derivative {
    Auto,
    Analytic,
    Fd,
}

impl From<Derivative> for DerivativeMode {
    fn from(d: Derivative) -> Self {
        match d {
            Derivative::Auto => DerivativeMode::Auto,
            Derivative::Analytic => DerivativeMode::Analytic,
            Derivative::Fd => DerivativeMode::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    /// Exact transitions (Euler–Maruyama is never used for Brownian models).
    Exact,
    Euler,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Bm)]
    pub model: ModelArg,
    /// Drift of Brownian motion.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eta: f64,
    /// OU / CIR mean-reversion rate.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// OU / CIR noise amplitude.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Fpt)]
    pub kind: KindArg,
    /// Start position; optional for `profile --x-grid`.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Reset position; defaults to the start position.
    #[arg(long = "x-r", allow_negative_numbers = true)]
    pub x_r: Option<f64>,
    /// Upper boundary for exit problems.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
}

impl ProblemArgs {
    pub fn model_spec(&self) -> ModelSpec {
        match self.model {
            ModelArg::Bm => ModelSpec::bm(self.eta),
            ModelArg::Ou => ModelSpec::ou(self.mu, self.sigma),
            ModelArg::Cir => ModelSpec::cir(self.mu, self.sigma),
            ModelArg::Feller => ModelSpec::feller(),
            ModelArg::Wf => ModelSpec::wright_fisher(),
        }
    }

    /// Validated problem; `fallback_x` stands in for a missing `--x`.
    pub fn spec_with(&self, fallback_x: Option<f64>) -> Result<ProblemSpec, CliError> {
        let x = self
            .x
            .or(fallback_x)
            .ok_or_else(|| CliError::Usage("missing required key 'x'".into()))?;
        let x_r = self.x_r.unwrap_or(x);
        let spec = match (self.kind, self.b) {
            (KindArg::Fpt, None) => ProblemSpec::fpt(self.model_spec(), x, x_r),
            (KindArg::Fpt, Some(_)) => {
                return Err(CliError::Usage("'b' only applies to --kind fet".into()))
            }
            (KindArg::Fet, Some(b)) => ProblemSpec::fet(self.model_spec(), x, x_r, b),
            (KindArg::Fet, None) => {
                return Err(CliError::Usage(
                    "missing required key 'b' for --kind fet".into(),
                ))
            }
        };
        Ok(spec.validate()?)
    }

    pub fn spec(&self) -> Result<ProblemSpec, CliError> {
        self.spec_with(None)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of simulated paths.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Censoring horizon; defaults to 50 times the analytic mean.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Disable the Brownian-bridge crossing check between steps.
    #[arg(long = "no-bridge")]
    pub no_bridge: bool,
    /// Transition scheme for OU and CIR.
    #[arg(long, value_enum, default_value_t = SchemeArg::Exact)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Lin,
}

/// `min:max:count`, logarithmic unless suffixed `@lin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.count),
            Spacing::Lin => lin_grid(self.min, self.max, self.count),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (range, spacing) = match s.split_once('@') {
            None => (s, Spacing::Log),
            Some((range, "log")) => (range, Spacing::Log),
            Some((range, "lin")) => (range, Spacing::Lin),
            Some((_, other)) => return Err(format!("unknown spacing '{other}', use log or lin")),
        };
        let parts: Vec<&str> = range.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("expected min:max:count, got '{range}'"));
        };
        let min: f64 = min.trim().parse().map_err(|_| format!("bad grid minimum '{min}'"))?;
        let max: f64 = max.trim().parse().map_err(|_| format!("bad grid maximum '{max}'"))?;
        let count: usize = count.trim().parse().map_err(|_| format!("bad grid count '{count}'"))?;
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(format!("grid bounds must be finite with min <= max, got {min}:{max}"));
        }
        if count == 0 || (count > 1 && min == max) {
            return Err("grid needs at least one point and distinct bounds for more".into());
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err("log grid needs a positive minimum".into());
        }
        Ok(Grid {
            min,
            max,
            count,
            spacing,
        })
    }
}

/// Splices the entries of a `--config` file into the argument list, right
/// after the subcommand, so that explicit flags override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    let bin = iter.next().unwrap_or_else(|| "resetfpt".into());
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let value = iter
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a file path".into()))?;
            path = Some(PathBuf::from(value));
        } else if let Some(value) = text.strip_prefix("--config=") {
            path = Some(PathBuf::from(value));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        let mut out = vec![bin];
        out.extend(rest);
        return Ok(out);
    };

    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut command = None;
    let mut flags: Vec<OsString> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key = value", path.display(), n + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        match (key.as_str(), value.as_str()) {
            ("command", _) => command = Some(value),
            ("config", _) => {
                return Err(CliError::Usage("config files cannot include other files".into()))
            }
            (_, "true") => flags.push(format!("--{key}").into()),
            (_, "false") => {}
            _ => {
                flags.push(format!("--{key}").into());
                flags.push(value.into());
            }
        }
    }

    let given = rest
        .first()
        .map(|a| a.to_string_lossy().into_owned())
        .filter(|a| COMMANDS.contains(&a.as_str()));
    let mut out = vec![bin];
    match (given, command) {
        (Some(given), Some(file)) if given != file => {
            return Err(CliError::Usage(format!(
                "command '{given}' conflicts with command = {file} in {}",
                path.display()
            )));
        }
        (Some(_), _) => out.push(rest.remove(0)),
        (None, Some(file)) => out.push(file.into()),
        (None, None) => {}
    }
    out.extend(flags);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn grid_syntax() {
        let g: Grid = "0.1:10:3".parse().unwrap();
        assert_eq!(g.spacing, Spacing::Log);
        let p = g.points();
        assert_eq!(p.len(), 3);
        assert!((p[1] - 1.0).abs() < 1e-12);
        let g: Grid = "0:1:5@lin".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!("2:2:1".parse::<Grid>().unwrap().points(), vec![2.0]);
        for bad in ["0:1:5", "1:0:3@lin", "1:2", "1:2:0", "1:2:3@cubic", "a:2:3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn config_entries_precede_explicit_flags() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.conf");
        fs::write(&file, "# query\ncommand = mean\nx_r = 2\nr = 1.5\nno_bridge = false\n").unwrap();
        let f = file.to_str().unwrap();
        let out = expand_config(os(&["resetfpt", "--config", f, "--x", "1", "--r", "3"])).unwrap();
        assert_eq!(out, os(&["resetfpt", "mean", "--x-r", "2", "--r", "1.5", "--x", "1", "--r", "3"]));
        let cli = Cli::try_parse_from(out).unwrap();
        let Command::Mean { r, problem, .. } = cli.command else {
            panic!("wrong command");
        };
        assert_eq!(r, 3.0);
        assert_eq!(problem.x_r, Some(2.0));

        assert!(expand_config(os(&["resetfpt", "lt", "--config", f])).is_err());
        let plain = os(&["resetfpt", "mean", "--x", "1"]);
        assert_eq!(expand_config(plain.clone()).unwrap(), plain);
    }
}
