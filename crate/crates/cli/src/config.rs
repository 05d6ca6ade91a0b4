//! Command-line arguments, the optional TOML config file, and their merge
//! into fully resolved per-command settings.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::exit::Failure;

#[derive(Debug, Parser)]
#[command(name = "rbki", version, about = "Randomized block Krylov experiments")]
pub struct Cli {
    /// TOML file with defaults for any flag; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed.
    #[arg(long, global = true, env = "RBKI_SEED")]
    pub seed: Option<u64>,

    /// Worker threads (default: available cores). `1` implies `--strict`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Strict-deterministic output: sequential trials, no wall-clock columns.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate a matrix with RBKI and write its factors.
    Approx(ApproxArgs),
    /// Conditioning experiments on square random block Krylov matrices.
    Lab(LabArgs),
    /// Accuracy-versus-cost sweep over block sizes.
    Bench(BenchArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

/// Either a fixed iteration count or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QLiteral", into = "QLiteral")]
pub enum QChoice {
    Fixed(usize),
    Auto,
}

/// TOML spelling of [`QChoice`]: an integer or the string `"auto"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QLiteral {
    Count(usize),
    Word(String),
}

impl TryFrom<QLiteral> for QChoice {
    type Error = String;

    fn try_from(v: QLiteral) -> Result<Self, String> {
        match v {
            QLiteral::Count(q) => Ok(QChoice::Fixed(q)),
            QLiteral::Word(w) => w.parse(),
        }
    }
}

impl From<QChoice> for QLiteral {
    fn from(q: QChoice) -> Self {
        match q {
            QChoice::Fixed(q) => QLiteral::Count(q),
            QChoice::Auto => QLiteral::Word("auto".into()),
        }
    }
}

impl FromStr for QChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(QChoice::Auto);
        }
        s.parse()
            .map(QChoice::Fixed)
            .map_err(|_| format!("expected \"auto\" or a positive integer, got {s:?}"))
    }
}

impl fmt::Display for QChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QChoice::Fixed(q) => write!(f, "{q}"),
            QChoice::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    Mtx,
    Raw,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceArgs {
    /// Input matrix file (`.mtx` is Matrix Market, anything else raw binary).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Override the format implied by the file extension.
    #[arg(long, value_enum)]
    pub format: Option<FileFormat>,

    /// Synthetic spectrum, e.g. `geometric:0.9`, `poly:1`, `gap:0.97:10,20:0.6`, `list:3,2,1`.
    #[arg(long)]
    pub spec: Option<String>,

    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long)]
    pub d: Option<usize>,

    /// Seed of the synthetic singular vectors (default: the master seed).
    #[arg(long)]
    pub matrix_seed: Option<u64>,

    /// Compute an exact SVD of a file input to report accuracy.
    #[arg(long)]
    #[serde(default)]
    pub exact_reference: bool,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxArgs {
    #[command(flatten)]
    #[serde(default, rename = "matrix")]
    pub source: SourceArgs,

    #[arg(long)]
    pub k: Option<usize>,

    /// Block sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<usize>>,

    /// Iteration count or `auto`.
    #[arg(long)]
    pub q: Option<QChoice>,

    #[arg(long)]
    pub eps: Option<f64>,

    #[arg(long)]
    pub delta: Option<f64>,

    /// Diagonal smoothing width; enables the perturbed variant.
    #[arg(long)]
    pub gamma: Option<f64>,

    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabArgs {
    #[arg(long)]
    pub k: Option<usize>,

    /// Block sizes, each dividing k.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<usize>>,

    /// Singular value spectrum; eigenvalues are its squares.
    #[arg(long)]
    pub spectrum: Option<String>,

    #[arg(long)]
    pub trials: Option<usize>,

    #[arg(long)]
    pub delta: Option<f64>,

    /// Multiplier of the sigma_min lower bound.
    #[arg(long)]
    pub calibration_c: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(default, rename = "matrix")]
    pub source: SourceArgs,

    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<usize>>,

    /// Target Frobenius error ratio.
    #[arg(long)]
    pub target: Option<f64>,

    #[arg(long)]
    pub trials: Option<usize>,

    /// Stop a run after this many matvecs.
    #[arg(long)]
    pub max_matvecs: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Print the criteria without running them.
    #[arg(long)]
    #[serde(default)]
    pub list: bool,

    /// Multiplier of the sigma_min lower bound in criterion 2.
    #[arg(long)]
    pub calibration_c: Option<f64>,

    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub strict: Option<bool>,
    pub out: Option<PathBuf>,
    pub approx: Option<ApproxArgs>,
    pub lab: Option<LabArgs>,
    pub bench: Option<BenchArgs>,
    pub verify: Option<VerifyArgs>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(anyhow::anyhow!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// Settings shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Common {
    pub seed: u64,
    pub threads: usize,
    pub strict: bool,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 20_240_915;

pub fn resolve_common(cli: &Cli, file: &FileConfig) -> Result<Common, Failure> {
    let threads = match cli.threads.or(file.threads) {
        Some(0) => return Err(Failure::config("--threads must be at least 1")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let explicit_single = cli.threads.or(file.threads) == Some(1);
    Ok(Common {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        threads,
        strict: cli.strict || file.strict.unwrap_or(false) || explicit_single,
        out: cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("rbki-out")),
    })
}

/// `cli` value, else `file` value.
pub trait Overlay {
    fn overlay(self, file: Option<Self>) -> Self
    where
        Self: Sized;
}

macro_rules! overlay_fields {
    ($ty:ty { $($field:ident),* } $(, flags { $($flag:ident),* })? $(, nested { $($nested:ident),* })?) => {
        impl Overlay for $ty {
            fn overlay(self, file: Option<Self>) -> Self {
                let Some(file) = file else { return self };
                Self {
                    $($field: self.$field.or(file.$field),)*
                    $($($flag: self.$flag || file.$flag,)*)?
                    $($($nested: self.$nested.overlay(Some(file.$nested)),)*)?
                }
            }
        }
    };
}

overlay_fields!(SourceArgs { input, format, spec, n, d, matrix_seed }, flags { exact_reference });
overlay_fields!(ApproxArgs { k, b, q, eps, delta, gamma, trials }, nested { source });
overlay_fields!(LabArgs { k, b, spectrum, trials, delta, calibration_c });
overlay_fields!(BenchArgs { k, b, target, trials, max_matvecs }, nested { source });
overlay_fields!(VerifyArgs { calibration_c, only }, flags { list });

/// Where the matrix comes from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    File {
        path: PathBuf,
        format: FileFormat,
        exact_reference: bool,
    },
    Synthetic {
        spec: String,
        n: usize,
        d: usize,
        matrix_seed: u64,
    },
}

pub fn resolve_source(args: &SourceArgs, seed: u64) -> Result<Source, Failure> {
    match (&args.input, &args.spec) {
        (Some(_), Some(_)) => Err(Failure::config("give either --input or --spec, not both")),
        (None, None) => Err(Failure::config("one of --input or --spec is required")),
        (Some(path), None) => {
            let format = args.format.unwrap_or(match rbki::MatrixFormat::from_path(path) {
                rbki::MatrixFormat::MatrixMarket => FileFormat::Mtx,
                rbki::MatrixFormat::RawBinary => FileFormat::Raw,
            });
            Ok(Source::File {
                path: path.clone(),
                format,
                exact_reference: args.exact_reference,
            })
        }
        (None, Some(spec)) => {
            spec.parse::<rbki::SpectrumKind>().map_err(Failure::from)?;
            let n = args.n.ok_or_else(|| Failure::config("--spec needs --n"))?;
            Ok(Source::Synthetic {
                spec: spec.clone(),
                n,
                d: args.d.unwrap_or(n),
                matrix_seed: args.matrix_seed.unwrap_or(seed),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxConfig {
    pub source: Source,
    pub k: usize,
    pub b: Vec<usize>,
    pub q: QChoice,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    pub trials: usize,
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::config(format!("missing required --{flag}")))
}

fn nonempty(list: Vec<usize>, flag: &str) -> Result<Vec<usize>, Failure> {
    if list.is_empty() || list.contains(&0) {
        return Err(Failure::config(format!("--{flag} needs positive entries")));
    }
    Ok(list)
}

fn positive_count(value: usize, flag: &str) -> Result<usize, Failure> {
    if value == 0 {
        return Err(Failure::config(format!("--{flag} must be at least 1")));
    }
    Ok(value)
}

pub fn resolve_approx(args: ApproxArgs, seed: u64) -> Result<ApproxConfig, Failure> {
    Ok(ApproxConfig {
        source: resolve_source(&args.source, seed)?,
        k: required(args.k, "k")?,
        b: nonempty(required(args.b, "b")?, "b")?,
        q: args.q.unwrap_or(QChoice::Auto),
        epsilon: args.eps.unwrap_or(0.25),
        delta: args.delta.unwrap_or(0.05),
        gamma: args.gamma,
        trials: positive_count(args.trials.unwrap_or(1), "trials")?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LabConfig {
    pub k: usize,
    pub b: Vec<usize>,
    pub spectrum: String,
    pub trials: usize,
    pub delta: f64,
    pub calibration_c: f64,
}

pub const LAB_MAX_K: usize = 200;

pub fn resolve_lab(args: LabArgs) -> Result<LabConfig, Failure> {
    let k = required(args.k, "k")?;
    if k == 0 || k > LAB_MAX_K {
        return Err(Failure::config(format!("lab needs 1 <= k <= {LAB_MAX_K}, got {k}")));
    }
    let b = nonempty(required(args.b, "b")?, "b")?;
    if let Some(bad) = b.iter().find(|b| k % **b != 0) {
        return Err(Failure::config(format!("block size b = {bad} does not divide k = {k}")));
    }
    let delta = args.delta.unwrap_or(0.1);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Failure::config(format!("--delta must lie in (0, 1), got {delta}")));
    }
    let calibration_c = args.calibration_c.unwrap_or(1.0);
    if !(calibration_c > 0.0 && calibration_c.is_finite()) {
        return Err(Failure::config("--calibration-c must be positive and finite"));
    }
    Ok(LabConfig {
        k,
        b,
        spectrum: args.spectrum.unwrap_or_else(|| "geometric:0.9".into()),
        trials: positive_count(args.trials.unwrap_or(200), "trials")?,
        delta,
        calibration_c,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub source: Source,
    pub k: usize,
    pub b: Vec<usize>,
    pub target: f64,
    pub trials: usize,
    pub max_matvecs: Option<u64>,
}

pub fn resolve_bench(args: BenchArgs, seed: u64) -> Result<BenchConfig, Failure> {
    let target = args.target.unwrap_or(1.01);
    if target.is_nan() || target < 1.0 {
        return Err(Failure::config(format!("--target is an error ratio and must be >= 1, got {target}")));
    }
    Ok(BenchConfig {
        source: resolve_source(&args.source, seed)?,
        k: required(args.k, "k")?,
        b: nonempty(required(args.b, "b")?, "b")?,
        target,
        trials: positive_count(args.trials.unwrap_or(10), "trials")?,
        max_matvecs: args.max_matvecs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_choice_parses() {
        assert_eq!("auto".parse::<QChoice>().unwrap(), QChoice::Auto);
        assert_eq!("12".parse::<QChoice>().unwrap(), QChoice::Fixed(12));
        assert!("-3".parse::<QChoice>().is_err());
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("sed = 3").is_err());
        assert!(toml::from_str::<FileConfig>("[approx]\nkk = 3").is_err());
        let cfg: FileConfig = toml::from_str("seed = 3\n[approx]\nk = 4\nq = \"auto\"\n[approx.matrix]\nspec = \"poly:1\"").unwrap();
        assert_eq!(cfg.seed, Some(3));
        let approx = cfg.approx.unwrap();
        assert_eq!(approx.q, Some(QChoice::Auto));
        assert_eq!(approx.source.spec.as_deref(), Some("poly:1"));
    }

    #[test]
    fn cli_values_win_over_file() {
        let cli = ApproxArgs { k: Some(5), ..Default::default() };
        let file = ApproxArgs { k: Some(9), eps: Some(0.5), ..Default::default() };
        let merged = cli.overlay(Some(file));
        assert_eq!(merged.k, Some(5));
        assert_eq!(merged.eps, Some(0.5));
    }
}
