//! Experiment runner for perturbed-instance campaigns.
//!
//! Every subcommand assembles an experiment config, runs it, and writes a
//! CSV document whose first line is a `#` comment with the config JSON, its
//! hash, and the tool version.  `--config file.json` bypasses the flags and
//! runs a saved config verbatim, which is the reproducible way to re-run an
//! experiment.
//!
//! Exit codes: 0 when all asserted bounds hold, 1 when some bound was
//! violated, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smoothed_core::harness::{
    BaseGraphSpec, CodecCheckConfig, ColorSimConfig, DeltaGrid, ExperimentConfig, GapSimConfig,
    HarnessError, SchemeInner, SchemeSimConfig, SolveConfig, StructureSpec, TailCheckConfig,
};

#[derive(Parser)]
#[command(
    name = "smoothed",
    about = "Monte Carlo campaigns over phi-bounded perturbed instances",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    /// Run a saved experiment config instead of building one from flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master seed; every trial derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 1000)]
    trials: u64,

    /// Output file (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Adaptive bit-revealing solver on sampled knapsack-style instances.
    Solve(SolveArgs),
    /// Winner/loser gap tail estimates against the delta*phi^(1/n)*n bound.
    Gapsim(GapsimArgs),
    /// Clique-gated k-coloring on perturbed graphs.
    Colorsim(ColorsimArgs),
    /// Injectivity, length, and round-trip checks for a family's code.
    CodecCheck(CodecCheckArgs),
    /// Bottom rates of the budgeted errorless scheme over a delta grid.
    SchemeSim(SchemeSimArgs),
    /// Moment and tail-curve estimates for the solve campaign.
    Tailcheck(TailcheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Solution structure: subsets, card:K, nonzero, or file:PATH.
    #[arg(long, default_value = "subsets")]
    structure: String,
    #[arg(long)]
    n: usize,
    /// Coefficient bit width (defaults to n).
    #[arg(long = "W")]
    width: Option<u32>,
    /// Density multiplier; phi = rho / 2^(n*W).
    #[arg(long, default_value = "1")]
    rho: String,
    /// Constraint threshold (defaults to n * 2^(W-2)).
    #[arg(long = "t")]
    threshold: Option<u64>,
    /// Starting bits per coefficient (defaults to ceil(log2 n) + 1).
    #[arg(long)]
    b0: Option<u32>,
}

impl SolveArgs {
    fn into_config(self, g: &GlobalArgs) -> Result<SolveConfig, HarnessError> {
        Ok(SolveConfig {
            n: self.n,
            width: self.width.unwrap_or(self.n as u32),
            rho: self.rho,
            structure: StructureSpec::parse_cli(&self.structure)?,
            threshold: self.threshold,
            start_bits: self.b0,
            trials: g.trials,
            master_seed: g.seed,
            threads: g.threads,
        })
    }
}

#[derive(Args)]
struct GapsimArgs {
    /// Solution structure: subsets, card:K, nonzero, or file:PATH.
    /// The all-zero vector must be excluded.
    #[arg(long, default_value = "nonzero")]
    structure: String,
    #[arg(long)]
    n: usize,
    #[arg(long = "W")]
    width: Option<u32>,
    #[arg(long, default_value = "1")]
    rho: String,
    #[arg(long = "t")]
    threshold: Option<i64>,
    /// Delta grid as lo:hi:step (inclusive).
    #[arg(long = "delta-grid", default_value = "1:8:1")]
    delta_grid: String,
    /// Use the adversarial non-monotone ranking (n^2 bound).
    #[arg(long)]
    non_monotone: bool,
}

#[derive(Args)]
struct ColorsimArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// phi = 2^-E; mutually exclusive with --eps.
    #[arg(long = "phi-exp")]
    phi_exp: Option<u32>,
    /// Explicit flip probability in [0, 1/2].
    #[arg(long)]
    eps: Option<f64>,
    /// Base graph: empty, complete, or random.
    #[arg(long, default_value = "random")]
    base: String,
    /// Add random edges only, never remove.
    #[arg(long)]
    add_only: bool,
}

#[derive(Args)]
struct CodecCheckArgs {
    /// Family spec JSON file (see README for the schema).
    #[arg(long)]
    family: PathBuf,
    /// Scan the whole support instead of 256 sampled points.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct SchemeSimArgs {
    /// Inner algorithm: solve or color.
    #[arg(long, default_value = "solve")]
    inner: String,
    /// Comma-separated failure budgets, e.g. 1/2,1/4,1/8.
    #[arg(long = "delta-grid", default_value = "1/2,1/4,1/8")]
    delta_grid: String,
    /// Budget exponent denominator m (the tail exponent is 1/m).
    #[arg(long, default_value_t = 3)]
    eps_denom: u32,
    /// Cross-check the doubling construction against the inner algorithm.
    #[arg(long)]
    roundtrip: bool,

    // Inner solve parameters.
    #[arg(long)]
    n: usize,
    #[arg(long = "W")]
    width: Option<u32>,
    #[arg(long, default_value = "1")]
    rho: String,
    #[arg(long, default_value = "subsets")]
    structure: String,
    #[arg(long = "t")]
    threshold: Option<u64>,

    // Inner color parameters.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "phi-exp")]
    phi_exp: Option<u32>,
    #[arg(long, default_value = "random")]
    base: String,
}

#[derive(Args)]
struct TailcheckArgs {
    #[arg(long, default_value = "subsets")]
    structure: String,
    #[arg(long)]
    n: usize,
    #[arg(long = "W")]
    width: Option<u32>,
    #[arg(long, default_value = "1")]
    rho: String,
    #[arg(long = "t")]
    threshold: Option<u64>,
    /// Tail exponent epsilon.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Polynomial exponent c in p(n) = n^c.
    #[arg(long = "c", default_value_t = 3)]
    poly_exp: u32,
    #[arg(long, default_value_t = 16)]
    grid_points: usize,
}

fn build_config(command: Command, g: &GlobalArgs) -> Result<ExperimentConfig, HarnessError> {
    Ok(match command {
        Command::Solve(args) => ExperimentConfig::Solve(args.into_config(g)?),
        Command::Gapsim(args) => ExperimentConfig::Gapsim(GapSimConfig {
            n: args.n,
            width: args.width.unwrap_or(args.n as u32),
            rho: args.rho,
            structure: StructureSpec::parse_cli(&args.structure)?,
            threshold: args.threshold,
            delta_grid: DeltaGrid::parse_cli(&args.delta_grid)?,
            non_monotone: args.non_monotone,
            trials: g.trials,
            master_seed: g.seed,
            threads: g.threads,
        }),
        Command::Colorsim(args) => ExperimentConfig::Colorsim(ColorSimConfig {
            n: args.n,
            k: args.k,
            phi_exp: args.phi_exp,
            eps: args.eps,
            base: BaseGraphSpec::parse_cli(&args.base)?,
            add_only: args.add_only,
            trials: g.trials,
            master_seed: g.seed,
            threads: g.threads,
        }),
        Command::CodecCheck(args) => {
            let body = std::fs::read_to_string(&args.family)?;
            let family = smoothed_core::dist::spec::FamilySpec::from_json(&body)
                .map_err(|e| HarnessError::Validation(vec![format!("bad family file: {e}")]))?;
            ExperimentConfig::CodecCheck(CodecCheckConfig {
                family,
                exhaustive: args.exhaustive,
                master_seed: g.seed,
            })
        }
        Command::SchemeSim(args) => {
            let inner = match args.inner.as_str() {
                "solve" => SchemeInner::Solve {
                    n: args.n,
                    width: args.width.unwrap_or(args.n as u32),
                    rho: args.rho,
                    structure: StructureSpec::parse_cli(&args.structure)?,
                    threshold: args.threshold,
                },
                "color" => SchemeInner::Color {
                    n: args.n,
                    k: args.k.ok_or_else(|| {
                        HarnessError::Validation(vec!["--k is required for --inner color".into()])
                    })?,
                    phi_exp: args.phi_exp.ok_or_else(|| {
                        HarnessError::Validation(vec![
                            "--phi-exp is required for --inner color".into(),
                        ])
                    })?,
                    base: BaseGraphSpec::parse_cli(&args.base)?,
                },
                other => {
                    return Err(HarnessError::Validation(vec![format!(
                        "unknown inner algorithm {other:?}; expected solve or color"
                    )]))
                }
            };
            ExperimentConfig::SchemeSim(SchemeSimConfig {
                inner,
                eps_denom: args.eps_denom,
                deltas: args.delta_grid.split(',').map(str::to_owned).collect(),
                trials: g.trials,
                master_seed: g.seed,
                threads: g.threads,
                roundtrip: args.roundtrip,
            })
        }
        Command::Tailcheck(args) => ExperimentConfig::Tailcheck(TailCheckConfig {
            solve: SolveConfig {
                n: args.n,
                width: args.width.unwrap_or(args.n as u32),
                rho: args.rho,
                structure: StructureSpec::parse_cli(&args.structure)?,
                threshold: args.threshold,
                start_bits: None,
                trials: g.trials,
                master_seed: g.seed,
                threads: g.threads,
            },
            epsilon: args.eps,
            poly_exp: args.poly_exp,
            grid_points: args.grid_points,
        }),
    })
}

fn run(cli: Cli) -> Result<bool, anyhow::Error> {
    let config = match (&cli.config, cli.command) {
        (Some(path), _) => {
            let body = std::fs::read_to_string(path)?;
            ExperimentConfig::from_json(&body)?
        }
        (None, Some(command)) => build_config(command, &cli.global)?,
        (None, None) => anyhow::bail!("a subcommand or --config is required"),
    };

    let is_codec_check = matches!(config, ExperimentConfig::CodecCheck(_));
    let (csv, output) = config.run_to_csv()?;

    // codec-check emits its JSON report; everything else emits CSV.
    let document = if is_codec_check {
        let mut report = output.summary.clone();
        report["config_hash"] = config.hash().into();
        format!("{}\n", serde_json::to_string_pretty(&report)?)
    } else {
        csv
    };
    match &cli.global.out {
        Some(path) => {
            std::fs::write(path, document)?;
            println!("{}", output.summary);
        }
        None => {
            print!("{document}");
            eprintln!("{}", output.summary);
        }
    }
    Ok(output.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::from(0),
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
