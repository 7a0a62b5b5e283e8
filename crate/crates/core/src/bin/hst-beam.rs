use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hst_beam::harness::{self, ExperimentConfig, ExperimentKind};

const DEFAULTS: &str = "\
Defaults (override with `key = value` lines in --config):
  d0_m = 50                 perpendicular base-station distance
  h0_m = 20                 base-station antenna height
  v0_kmh = 360              train speed (100 m/s)
  l_m = 800                 half coverage length
  alpha0 = 3                path-loss exponent
  carrier_ghz = 2.4         carrier frequency
  spacing_wavelengths = 0.5 element spacing d = lambda/2
  element_count = 128       physical elements M
  beam_count = 128          beams N
  design_constant = 2.782   beamwidth constant C
  array_type = broadside
  theta_b_deg = 45          reference base-station angle
  sigma_m = 1               positioning error standard deviation
  p_th = 0.9                required effective beamforming probability
  p0_dbm = 43               average transmit power
  noise_dbm = -104          receiver noise power
  eta = 0                   encounter offset
  beam_weight_1/2           directivity of beam_count beams (128)
  seed = 42";

#[derive(Parser)]
#[command(name = "hst-beam", version, about = "Location-aware uplink beam planning for high-speed trains", after_help = DEFAULTS)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized runs (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluate sweep points concurrently; output order is unchanged.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    /// Optimal beam count across base-station angles.
    Theta,
    /// Optimal directivity across positioning errors.
    Sigma,
}

#[derive(Subcommand)]
enum Command {
    /// Directivity against beamwidth.
    Tradeoff,
    /// Beam-count search under positioning error.
    SearchN {
        #[arg(long, value_enum, default_value = "theta")]
        sweep: Sweep,
    },
    /// Beam selection along one pass with noisy position estimates.
    Traverse,
    /// Two-train achievable rate region for each eta in `eta_grid`.
    RateRegion,
    /// Largest common rate against eta for each power in `p0_dbm_grid`.
    Symmetric,
    /// Writes the phase codebook.
    ExportCodebook,
    /// Runs the experiment named by `experiment` in the config.
    Run,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => {
            harness::load_config(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.parallel |= cli.parallel;

    let (run, tables) = match cli.command {
        Command::Tradeoff => ("tradeoff", harness::tradeoff(&cfg)?),
        Command::SearchN {
            sweep: Sweep::Theta,
        } => ("d-vs-theta", harness::d_vs_theta(&cfg)?),
        Command::SearchN {
            sweep: Sweep::Sigma,
        } => ("directivity-vs-sigma", harness::directivity_vs_sigma(&cfg)?),
        Command::Traverse => ("traverse", harness::traverse(&cfg)?),
        Command::RateRegion => ("rate-region", harness::rate_region(&cfg)?),
        Command::Symmetric => ("symmetric", harness::symmetric(&cfg)?),
        Command::ExportCodebook => ("export-codebook", harness::export_codebook(&cfg)?),
        Command::Run => (
            cfg.experiment.name(),
            harness::run_kind(&cfg, cfg.experiment)?,
        ),
    };
    let manifest = harness::write_outputs(&cfg.output_dir, run, &cfg, &tables)?;
    for f in &manifest.files {
        println!(
            "{}: {} rows",
            cfg.output_dir.join(&f.file).display(),
            f.rows
        );
    }
    if run == ExperimentKind::DVsTheta.name() && !manifest.reference_theta_b_in_coverage {
        eprintln!("note: theta_b = pi/4 lies outside the coverage interval; the sweep covers the interval instead");
    }
    Ok(())
}
