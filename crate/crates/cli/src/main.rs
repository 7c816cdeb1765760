//! `xsens`: simulate, estimate, combine and evaluate coil sensitivity maps.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult, Kind, EXIT_CODES_HELP};

#[derive(Debug, Parser)]
#[command(name = "xsens", version, about = "Coil sensitivity estimation for multi-coil spectroscopic imaging")]
struct Cli {
    /// Configuration file of `key = value` lines
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (config key `output_dir`)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Phantom width and height in pixels
    #[arg(long, value_name = "N")]
    phantom_size: Option<String>,
    /// Number of spectral bins
    #[arg(long, value_name = "N")]
    spectrum_bins: Option<String>,
    /// Number of coils on the ring
    #[arg(long, value_name = "N")]
    n_coils: Option<String>,
    /// Rank of the coupled sensitivity matrix
    #[arg(long, value_name = "R")]
    coupling_rank: Option<String>,
}

#[derive(Debug, Args)]
struct EstimatorArgs {
    /// refpeak or l2
    #[arg(long)]
    method: Option<String>,
    /// spectral, spectral-time, metabolite-time or all
    #[arg(long)]
    index_set: Option<String>,
    /// Frame used by the spectral index set
    #[arg(long)]
    frame: Option<String>,
    /// Metabolite used by spectral index sets
    #[arg(long)]
    metabolite: Option<String>,
    /// Bin used by the metabolite-time index set, or `auto`
    #[arg(long)]
    bin: Option<String>,
    /// Vacant-voxel energy fraction in [0, 1)
    #[arg(long)]
    threshold: Option<String>,
    /// L2 regressor: magnitude or literal
    #[arg(long)]
    regressor: Option<String>,
    /// RefPeak peak row: shared or per-coil
    #[arg(long)]
    refpeak_bin: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the phantom, its support, the spectrum and the true maps
    Phantom {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Simulate a multi-coil spectral dataset and write it with the true maps
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// SNR, or `inf` for noiseless data
        #[arg(long)]
        snr: Option<String>,
        /// Noise seed
        #[arg(long)]
        seed: Option<String>,
        /// Time frames (a gamma-variate bolus is applied when > 1)
        #[arg(long)]
        frames: Option<String>,
        /// Domain of the written dataset: image or kspace
        #[arg(long)]
        domain: Option<String>,
    },
    /// Estimate sensitivity maps from a dataset
    Estimate {
        /// Dataset container
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Combine the coil images of one slice into a single image
    Combine {
        /// Dataset container
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        /// Map container, required for Roemer combination
        #[arg(long, value_name = "FILE")]
        maps: Option<PathBuf>,
        /// roemer or rss
        #[arg(long)]
        combination: Option<String>,
        /// Bin to combine, or `auto` for the highest-energy bin
        #[arg(long)]
        bin: Option<String>,
        /// Frame to combine
        #[arg(long)]
        frame: Option<String>,
        /// Metabolite to combine
        #[arg(long)]
        metabolite: Option<String>,
    },
    /// Mean squared error of estimated maps against reference maps
    Evaluate {
        /// Estimated map container
        #[arg(long, value_name = "FILE")]
        estimate: PathBuf,
        /// Reference map container; its nonzero voxels form the support
        #[arg(long, value_name = "FILE")]
        truth: PathBuf,
        /// Remove each voxel's best-fit global phase before scoring
        #[arg(long)]
        phase_align: bool,
    },
    /// Monte Carlo MSE of both estimators per SNR, with difference maps
    #[command(name = "reproduce-table1")]
    ReproduceTable1 {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Master seed
        #[arg(long)]
        seed: Option<String>,
        /// Trials per SNR
        #[arg(long)]
        trials: Option<String>,
        /// Comma-separated SNR list, e.g. inf,50,20,10
        #[arg(long)]
        snr_list: Option<String>,
        /// Full-white value of the difference maps
        #[arg(long)]
        difference_scale: Option<String>,
    },
}

type Overrides = Vec<(&'static str, Option<String>)>;

impl ScenarioArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("phantom_size", self.phantom_size.clone()),
            ("spectrum_bins", self.spectrum_bins.clone()),
            ("n_coils", self.n_coils.clone()),
            ("coupling_rank", self.coupling_rank.clone()),
        ]
    }
}

impl EstimatorArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("method", self.method.clone()),
            ("index_set", self.index_set.clone()),
            ("frame", self.frame.clone()),
            ("metabolite", self.metabolite.clone()),
            ("bin", self.bin.clone()),
            ("threshold", self.threshold.clone()),
            ("regressor", self.regressor.clone()),
            ("refpeak_bin", self.refpeak_bin.clone()),
        ]
    }
}

impl Command {
    fn overrides(&self) -> Overrides {
        match self {
            Command::Phantom { scenario } => scenario.overrides(),
            Command::Simulate { scenario, snr, seed, frames, domain } => {
                let mut o = scenario.overrides();
                o.extend([("snr", snr.clone()), ("seed", seed.clone()), ("frames", frames.clone()), ("domain", domain.clone())]);
                o
            }
            Command::Estimate { estimator, .. } => estimator.overrides(),
            Command::Combine { combination, bin, frame, metabolite, .. } => vec![
                ("combination", combination.clone()),
                ("bin", bin.clone()),
                ("frame", frame.clone()),
                ("metabolite", metabolite.clone()),
            ],
            Command::Evaluate { phase_align, .. } => vec![("phase_align", phase_align.then(|| "true".to_string()))],
            Command::ReproduceTable1 { scenario, seed, trials, snr_list, difference_scale } => {
                let mut o = scenario.overrides();
                o.extend([
                    ("seed", seed.clone()),
                    ("n_trials", trials.clone()),
                    ("snr_list", snr_list.clone()),
                    ("difference_scale", difference_scale.clone()),
                ]);
                o
            }
        }
    }
}

fn effective_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut overrides = cli.command.overrides();
    overrides.push(("output_dir", cli.out.clone()));
    for (key, value) in overrides {
        if let Some(v) = value {
            let flag = format!("--{}", key.replace('_', "-"));
            cfg.set(key, &v).map_err(|e| CliError::new(Kind::Usage, format!("{flag}: {}", e.message)))?;
        }
    }
    Ok(cfg)
}

fn report(files: &[String], dir: &Path) {
    for f in files {
        println!("wrote {}", dir.join(f).display());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = effective_config(&cli)?;
    let dir = cfg.output_dir();
    match &cli.command {
        Command::Phantom { .. } => report(&commands::phantom(&cfg)?, &dir),
        Command::Simulate { .. } => report(&commands::simulate(&cfg)?, &dir),
        Command::Estimate { dataset, .. } => report(&commands::estimate(&cfg, dataset)?, &dir),
        Command::Combine { dataset, maps, .. } => report(&commands::combine(&cfg, dataset, maps.as_deref())?, &dir),
        Command::Evaluate { estimate, truth, .. } => {
            let (files, aggregate) = commands::evaluate(&cfg, estimate, truth)?;
            println!("mse = {aggregate:e}");
            report(&files, &dir);
        }
        Command::ReproduceTable1 { .. } => {
            let (files, csv) = commands::reproduce_table1_cmd(&cfg)?;
            print!("{csv}");
            report(&files, &dir);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let command = Cli::command().after_help(format!("{}\n{}", config::keys_help(), EXIT_CODES_HELP));
    let parsed = command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) => {
            let _ = e.print();
            return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                ExitCode::from(Kind::Usage.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid usage").trim_start_matches("error: ");
            let err = CliError::new(Kind::Usage, first);
            eprintln!("{}", err.line());
            return ExitCode::from(Kind::Usage.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
