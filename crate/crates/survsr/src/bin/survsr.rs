use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use survsr::runner::{self, KSpec, Method, RunConfig};
use survsr::synth::{Generator, SynthSpec};

/// Interpretable survival regression: evolved symbolic Cox models and
/// glass-box baseline Pareto fronts.
#[derive(Parser)]
#[command(name = "survsr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration file
    #[arg(long)]
    config: PathBuf,
    /// Override the configured method (sr, cx, st)
    #[arg(long)]
    method: Option<String>,
    /// Override the number of repetitions
    #[arg(long)]
    repetitions: Option<u64>,
    /// Override the base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured method over repeated train/test splits
    Run(RunArgs),
    /// Run a glass-box baseline (method must be cx or st)
    Baseline(RunArgs),
    /// Aggregate result files into summary tables
    Aggregate {
        /// Directory holding front CSVs and manifests from `run`
        #[arg(long)]
        results: PathBuf,
        /// Comma-separated dims caps, e.g. "3,5,7,max"
        #[arg(long, default_value = "3,5,7,max")]
        k: String,
    },
    /// Generate a synthetic dataset with known ground truth
    Synth {
        /// Risk function: linear, quadratic, or log-interaction
        #[arg(long)]
        generator: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Target censoring fraction in [0, 0.9)
        #[arg(long, default_value_t = 0.3)]
        censoring: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path (truth and schema files written alongside)
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(args: &RunArgs, baseline_only: bool) -> Result<RunConfig, String> {
    let mut config = RunConfig::from_toml_file(&args.config).map_err(|e| e.to_string())?;
    if let Some(m) = &args.method {
        config.method = Method::parse(m).ok_or_else(|| format!("unknown method `{m}`"))?;
    }
    if let Some(r) = args.repetitions {
        config.repetitions = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(o) = &args.output {
        config.output_dir = o.clone();
    }
    if baseline_only && config.method == Method::Sr {
        return Err("`baseline` requires method cx or st".into());
    }
    Ok(config)
}

fn run(args: &RunArgs, baseline_only: bool) -> Result<(), String> {
    let config = load_config(args, baseline_only)?;
    let summary = runner::cmd_run(&config).map_err(|e| e.to_string())?;
    println!(
        "{} repetitions succeeded, {} failed; manifest: {}",
        summary.n_success,
        summary.n_failed,
        summary.manifest_path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result: Result<(), String> = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Baseline(args) => run(args, true),
        Command::Aggregate { results, k } => (|| {
            let ks: Vec<KSpec> = k
                .split(',')
                .map(|s| KSpec::parse(s.trim()).ok_or_else(|| format!("bad k value `{s}`")))
                .collect::<Result<_, _>>()?;
            let tables = runner::cmd_aggregate(results, &ks).map_err(|e| e.to_string())?;
            println!("tables written to {}", tables.out_dir.display());
            Ok(())
        })(),
        Command::Synth {
            generator,
            n,
            d,
            censoring,
            seed,
            out,
        } => (|| {
            let generator = Generator::parse(generator)
                .ok_or_else(|| format!("unknown generator `{generator}`"))?;
            let spec = SynthSpec {
                generator,
                n: *n,
                d: *d,
                censoring_rate: *censoring,
                seed: *seed,
            };
            runner::cmd_synth(&spec, out).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
