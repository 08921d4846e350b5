//! Command-line surface and its validated run configuration.

use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qmeasure_core::analytics::N2Measure;
use qmeasure_core::ensembles::{Beta, MeasureSpec};
use qmeasure_core::stats::Functional;

use crate::error::{CliError, CliResult};

/// Default seed when neither `--seed` nor `QMEASURE_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_010_803;
pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "qmeasure", version, about = "Random density matrices: sampling, estimation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Write sampled spectra (or full matrices) one per row.
    Sample(SampleArgs),
    /// Monte Carlo mean of a spectral functional, with the exact value when known.
    Estimate(EstimateArgs),
    /// Tabulate an analytic density on a uniform grid.
    Density(DensityArgs),
    /// Histogram N = 3 spectra over a triangular grid of the simplex.
    Ternary(TernaryArgs),
    /// Run the acceptance battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Induced,
    Product,
    Bures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalKind {
    Entropy,
    Purity,
    Participation,
    Tangle,
    Concurrence,
    TracePower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    /// Bloch radius of a 2 × 2 measure.
    Radial,
    /// One unordered eigenvalue of a 2 × 2 measure.
    Eigenvalue,
    Tangle,
    Concurrence,
    SchmidtAngle,
    /// `x₁/(x₁+x₂)` for independent uniform `x₁, x₂`.
    Rescale,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value_t = MeasureKind::Induced)]
    pub measure: MeasureKind,
    /// Hilbert-space dimension N.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Environment dimension K of the induced measure (defaults to N).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2, value_parser = clap::builder::PossibleValuesParser::new(["1", "2", "4"]).map(|s| s.parse::<u32>().expect("listed value")))]
    pub beta: u32,
    /// Dirichlet parameter of the product measure.
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, env = "QMEASURE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[command(flatten)]
    pub run: RunArgs,
    /// Write full matrices (interleaved re, im, row-major) instead of spectra.
    #[arg(long)]
    pub matrices: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, value_enum)]
    pub functional: FunctionalKind,
    /// Exponent ν of the trace-power functional.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Report entropy in bits rather than nats.
    #[arg(long)]
    pub bits: bool,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, value_enum, default_value_t = Law::Radial)]
    pub law: Law,
    /// Grid intervals; the grid has `bins + 1` points including both ends.
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TernaryArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 30)]
    pub resolution: usize,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// 10⁴ samples with widened statistical thresholds.
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Estimate,
    Density,
    Ternary,
    Verify,
}

/// Validated settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub measure: Option<MeasureSpec>,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub bins: usize,
    pub resolution: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub matrices: bool,
    pub quick: bool,
    pub bits: bool,
    pub functional: Option<Functional>,
    pub law: Option<Law>,
}

impl RunConfig {
    fn base(command: Command) -> Self {
        Self {
            command,
            measure: None,
            samples: 0,
            seed: DEFAULT_SEED,
            workers: DEFAULT_WORKERS,
            bins: 0,
            resolution: 0,
            out: None,
            format: Format::Csv,
            matrices: false,
            quick: false,
            bits: false,
            functional: None,
            law: None,
        }
    }

    pub fn from_cli(command: &CommandArgs) -> CliResult<Self> {
        let config = match command {
            CommandArgs::Sample(a) => Self {
                measure: Some(measure_spec(&a.measure)?),
                samples: a.samples,
                seed: a.run.seed,
                workers: a.run.workers,
                out: a.output.out.clone(),
                format: a.output.format,
                matrices: a.matrices,
                ..Self::base(Command::Sample)
            },
            CommandArgs::Estimate(a) => Self {
                measure: Some(measure_spec(&a.measure)?),
                samples: a.samples,
                seed: a.run.seed,
                workers: a.run.workers,
                out: a.out.clone(),
                format: a.format,
                bits: a.bits,
                functional: Some(functional(a.functional, a.nu)?),
                ..Self::base(Command::Estimate)
            },
            CommandArgs::Density(a) => Self {
                measure: Some(measure_spec(&a.measure)?),
                bins: a.bins,
                out: a.output.out.clone(),
                format: a.output.format,
                law: Some(a.law),
                ..Self::base(Command::Density)
            },
            CommandArgs::Ternary(a) => Self {
                measure: Some(measure_spec(&a.measure)?),
                samples: a.samples,
                seed: a.run.seed,
                workers: a.run.workers,
                resolution: a.resolution,
                out: a.output.out.clone(),
                format: a.output.format,
                ..Self::base(Command::Ternary)
            },
            CommandArgs::Verify(a) => Self {
                samples: if a.quick { 10_000 } else { a.samples },
                seed: a.run.seed,
                workers: a.run.workers,
                out: a.out.clone(),
                format: Format::Json,
                quick: a.quick,
                ..Self::base(Command::Verify)
            },
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks the fields the command needs.
    pub fn validate(&self) -> CliResult<()> {
        let config = |msg: String| Err(CliError::Config(msg));
        if let Some(m) = &self.measure {
            m.validate()?;
        }
        let needs_samples = matches!(
            self.command,
            Command::Sample | Command::Estimate | Command::Ternary | Command::Verify
        );
        if needs_samples && self.samples == 0 {
            return config("--samples must be positive".into());
        }
        if needs_samples && self.workers == 0 {
            return config("--workers must be positive".into());
        }
        match self.command {
            Command::Estimate => {
                let f = self.functional.expect("estimate has a functional");
                let n = self.measure.map(|m| m.n()).unwrap_or(0);
                if matches!(f, Functional::Tangle | Functional::Concurrence) && n != 2 {
                    return config(format!("{} needs --n 2", f.label()));
                }
                if self.bits && f != Functional::Entropy {
                    return config("--bits applies to entropy".into());
                }
            }
            Command::Density => {
                if self.bins < 2 {
                    return config("--bins must be at least 2".into());
                }
                let law = self.law.expect("density has a law");
                if matches!(law, Law::Radial | Law::Eigenvalue) {
                    let m = self.measure.expect("density has a measure");
                    if m.n() != 2 {
                        return config(format!("{law:?} law needs --n 2"));
                    }
                    if law == Law::Radial && N2Measure::from_spec(&m).is_none() {
                        return config(
                            "radial law exists for induced (beta 2), product (s = 1 or 1/2) and bures".into(),
                        );
                    }
                }
            }
            Command::Ternary => {
                if self.measure.map(|m| m.n()) != Some(3) {
                    return config("ternary histograms need --n 3".into());
                }
                if self.resolution == 0 {
                    return config("--resolution must be positive".into());
                }
            }
            Command::Sample | Command::Verify => {}
        }
        Ok(())
    }
}

fn measure_spec(a: &MeasureArgs) -> CliResult<MeasureSpec> {
    let spec = match a.measure {
        MeasureKind::Induced => {
            if a.s.is_some() {
                return Err(CliError::Config("--s applies to the product measure".into()));
            }
            MeasureSpec::Induced {
                n: a.n,
                k: a.k.unwrap_or(a.n),
                beta: Beta::try_from(a.beta)?,
            }
        }
        MeasureKind::Product => {
            if a.k.is_some() {
                return Err(CliError::Config("--k applies to the induced measure".into()));
            }
            MeasureSpec::ProductDirichlet {
                n: a.n,
                s: a.s.unwrap_or(1.0),
            }
        }
        MeasureKind::Bures => {
            if a.k.is_some() || a.s.is_some() {
                return Err(CliError::Config("bures takes only --n".into()));
            }
            MeasureSpec::Bures { n: a.n }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn functional(kind: FunctionalKind, nu: Option<f64>) -> CliResult<Functional> {
    if nu.is_some() && kind != FunctionalKind::TracePower {
        return Err(CliError::Config("--nu applies to trace-power".into()));
    }
    Ok(match kind {
        FunctionalKind::Entropy => Functional::Entropy,
        FunctionalKind::Purity => Functional::Purity,
        FunctionalKind::Participation => Functional::Participation,
        FunctionalKind::Tangle => Functional::Tangle,
        FunctionalKind::Concurrence => Functional::Concurrence,
        FunctionalKind::TracePower => {
            let nu = nu.ok_or_else(|| CliError::Config("trace-power needs --nu".into()))?;
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(CliError::Config(format!("--nu must be positive, got {nu}")));
            }
            Functional::TracePower(nu)
        }
    })
}

/// `induced(n=2,k=2,beta=2)`, `product(n=2,s=1)` or `bures(n=2)`.
pub fn measure_label(m: &MeasureSpec) -> String {
    match *m {
        MeasureSpec::Induced { n, k, beta } => format!("induced(n={n},k={k},beta={})", beta as u8),
        MeasureSpec::ProductDirichlet { n, s } => format!("product(n={n},s={s})"),
        MeasureSpec::Bures { n } => format!("bures(n={n})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CliResult<RunConfig> {
        let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
        RunConfig::from_cli(&cli.command)
    }

    #[test]
    fn sample_defaults() {
        let c = parse(&["qmeasure", "sample", "--seed", "7"]).unwrap();
        assert_eq!(c.measure, Some(MeasureSpec::hilbert_schmidt(2)));
        assert_eq!((c.seed, c.samples, c.workers), (7, 1000, DEFAULT_WORKERS));
    }

    #[test]
    fn measure_variants() {
        let c = parse(&["qmeasure", "sample", "--measure", "product", "--n", "3", "--s", "0.5"]).unwrap();
        assert_eq!(c.measure, Some(MeasureSpec::ProductDirichlet { n: 3, s: 0.5 }));
        let c = parse(&["qmeasure", "sample", "--measure", "induced", "--n", "2", "--k", "5", "--beta", "1"]).unwrap();
        assert_eq!(c.measure, Some(MeasureSpec::Induced { n: 2, k: 5, beta: Beta::Real }));
        assert!(parse(&["qmeasure", "sample", "--beta", "3"]).is_err());
        assert!(parse(&["qmeasure", "sample", "--measure", "bures", "--n", "7"]).is_err());
        assert!(parse(&["qmeasure", "sample", "--measure", "bures", "--k", "3"]).is_err());
    }

    #[test]
    fn command_specific_validation() {
        assert!(parse(&["qmeasure", "ternary", "--n", "2"]).is_err());
        assert!(parse(&["qmeasure", "estimate", "--functional", "trace-power"]).is_err());
        assert!(parse(&["qmeasure", "estimate", "--functional", "tangle", "--n", "3"]).is_err());
        assert!(parse(&["qmeasure", "density", "--measure", "product", "--s", "0.3"]).is_err());
        assert!(parse(&["qmeasure", "sample", "--samples", "0"]).is_err());
        let c = parse(&["qmeasure", "estimate", "--functional", "trace-power", "--nu", "3"]).unwrap();
        assert_eq!(c.functional, Some(Functional::TracePower(3.0)));
        let c = parse(&["qmeasure", "verify", "--quick"]).unwrap();
        assert_eq!((c.samples, c.quick), (10_000, true));
    }

    #[test]
    fn config_errors_exit_with_two() {
        let e = parse(&["qmeasure", "ternary", "--n", "2"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse(&["qmeasure", "sample", "--measure", "product", "--s", "-1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn labels() {
        assert_eq!(measure_label(&MeasureSpec::hilbert_schmidt(2)), "induced(n=2,k=2,beta=2)");
        assert_eq!(measure_label(&MeasureSpec::orthogonal(2)), "product(n=2,s=0.5)");
        assert_eq!(measure_label(&MeasureSpec::Bures { n: 3 }), "bures(n=3)");
    }
}
