//! Run configuration: command-line flags layered over an optional JSON file.

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use randtime_lse::sampling::{JitterKind, SamplingScheme};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "RANDTIME_LSE_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Jittered,
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Uniform,
    Triangular,
    RaisedCosine,
}

impl From<NoiseArg> for JitterKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Uniform => JitterKind::Uniform,
            NoiseArg::Triangular => JitterKind::Triangular,
            NoiseArg::RaisedCosine => JitterKind::RaisedCosine,
        }
    }
}

/// Flags shared by every command. Each is optional so that a config file
/// can fill in whatever was not given on the command line.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    /// Grid size(s) N; comma separated or repeated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n: Option<Vec<usize>>,
    /// Observed fraction(s) alpha in (0, 1].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub drift: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed; falls back to $RANDTIME_LSE_SEED, then 1.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// JSON file with any of these flags as keys, or a run manifest.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Leave out replications whose last observation time exceeds 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exclude_exceeded: Option<bool>,
    /// Also render an SVG figure.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
}

impl RunArgs {
    /// Fills unset fields from `file`.
    fn or(self, file: RunArgs) -> RunArgs {
        RunArgs {
            scheme: self.scheme.or(file.scheme),
            noise: self.noise.or(file.noise),
            n: self.n.or(file.n),
            alpha: self.alpha.or(file.alpha),
            drift: self.drift.or(file.drift),
            reps: self.reps.or(file.reps),
            seed: self.seed.or(file.seed),
            threads: self.threads.or(file.threads),
            out_dir: self.out_dir.or(file.out_dir),
            config: self.config,
            exclude_exceeded: self.exclude_exceeded.or(file.exclude_exceeded),
            svg: self.svg.or(file.svg),
        }
    }
}

fn load_file(path: &Path) -> Result<RunArgs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    // A run manifest carries its resolved config under "config".
    if value.get("command").is_some() {
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
    }
    serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
}

/// Fully resolved settings; what a manifest records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub scheme: SchemeArg,
    pub noise: NoiseArg,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub drift: f64,
    pub reps: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub exclude_exceeded: bool,
    pub svg: bool,
}

/// Per-command defaults.
pub struct Defaults {
    pub n: Vec<usize>,
    pub reps: usize,
    /// `None` means α = 1 for jittered and 0.98 for renewal.
    pub alpha: Option<Vec<f64>>,
    pub scheme: SchemeArg,
}

pub fn resolve(args: RunArgs, defaults: Defaults) -> Result<Resolved> {
    let args = match &args.config {
        Some(path) => {
            let file = load_file(path)?;
            args.or(file)
        }
        None => args,
    };
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))?,
            Err(_) => DEFAULT_SEED,
        },
    };
    let scheme = args.scheme.unwrap_or(defaults.scheme);
    let alpha = match (args.alpha, defaults.alpha) {
        (Some(a), _) => a,
        (None, Some(a)) => a,
        (None, None) => vec![if scheme == SchemeArg::Renewal { 0.98 } else { 1.0 }],
    };
    let n = args.n.unwrap_or(defaults.n);
    if n.is_empty() || alpha.is_empty() {
        bail!("--n and --alpha need at least one value");
    }
    let reps = args.reps.unwrap_or(defaults.reps);
    if reps == 0 {
        bail!("--reps must be >= 1");
    }
    if args.threads == Some(0) {
        bail!("--threads must be >= 1");
    }
    Ok(Resolved {
        scheme,
        noise: args.noise.unwrap_or(NoiseArg::Uniform),
        n,
        alpha,
        drift: args.drift.unwrap_or(0.0),
        reps,
        seed,
        threads: args.threads,
        out_dir: args.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        exclude_exceeded: args.exclude_exceeded.unwrap_or(false),
        svg: args.svg.unwrap_or(false),
    })
}

impl Resolved {
    /// The single α of a scheme-level run.
    pub fn single_alpha(&self) -> Result<f64> {
        match self.alpha.as_slice() {
            [a] => Ok(*a),
            _ => bail!("this command takes a single --alpha"),
        }
    }

    pub fn scheme_at(&self, n: usize) -> Result<SamplingScheme> {
        let alpha = self.single_alpha()?;
        Ok(match self.scheme {
            SchemeArg::Jittered => {
                if alpha != 1.0 {
                    bail!("jittered sampling observes the whole interval; --alpha must be 1");
                }
                SamplingScheme::jittered(n, self.noise.into())?
            }
            SchemeArg::Renewal => SamplingScheme::renewal(n, alpha)?,
        })
    }
}
