//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pilot_ofdm::analytic::ReachCriterion;
use pilot_ofdm::{BerConvention, ModulationScheme, SystemKind, VarianceMode};

use crate::commands;
use crate::config::{ConfigLayer, RunConfig};
use crate::output::Table;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "pilot-ofdm", version, about = "Phase-noise penalty of RF-pilot OFDM over dispersive fiber")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Adjacent-bin dispersion delay against length.
    Tau,
    /// Per-bin CPE, ICI and total phase variance.
    Variance,
    /// Worst-bin and band-averaged BER against length.
    Ber,
    /// Data series behind the variance and BER figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
        which: u8,
    },
    /// Length at which the BER reaches the target.
    Reach,
    /// Monte-Carlo simulation next to the closed-form values.
    Mc,
    /// List the built-in presets.
    Presets,
}

/// Configuration flags; they override `--config`, which overrides `--preset`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Built-in starting configuration (see `presets`).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// co or dd.
    #[arg(long, global = true)]
    pub kind: Option<SystemKind>,
    /// e.g. 4psk, 16psk, 16qam.
    #[arg(long, global = true)]
    pub modulation: Option<ModulationScheme>,
    #[arg(long, global = true)]
    pub n_bins: Option<usize>,
    #[arg(long, global = true)]
    pub delta_f_hz: Option<f64>,
    /// ps/nm/km.
    #[arg(long, global = true)]
    pub dispersion: Option<f64>,
    #[arg(long, global = true)]
    pub wavelength_nm: Option<f64>,
    #[arg(long, global = true)]
    pub linewidth_tx_mhz: Option<f64>,
    #[arg(long, global = true)]
    pub linewidth_lo_mhz: Option<f64>,
    /// m/s.
    #[arg(long, global = true)]
    pub light_speed: Option<f64>,
    /// Explicit lengths in km; replaces the sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub length_km: Option<Vec<f64>>,
    /// paper_linear or exact_filtered.
    #[arg(long, global = true)]
    pub mode: Option<VarianceMode>,
    /// as_printed or symmetric_average.
    #[arg(long, global = true)]
    pub convention: Option<BerConvention>,
    #[arg(long, global = true)]
    pub include_ici: bool,
    /// worst_bin or band_average.
    #[arg(long, global = true)]
    pub criterion: Option<ReachCriterion>,
    #[arg(long, global = true)]
    pub target_ber: Option<f64>,
    #[arg(long, global = true)]
    pub max_length_km: Option<f64>,
    /// Bin indices for per-bin output.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub bins: Option<Vec<i64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub systems: Option<Vec<SystemKind>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub modulations: Option<Vec<ModulationScheme>>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples_per_symbol: Option<usize>,
    #[arg(long, global = true)]
    pub steps_per_symbol: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl ConfigArgs {
    fn flag_layer(&self) -> ConfigLayer {
        let mut layer = ConfigLayer::default();
        let s = &mut layer.system;
        s.kind = self.kind;
        s.modulation = self.modulation;
        s.n_bins = self.n_bins;
        s.delta_f_hz = self.delta_f_hz;
        s.dispersion_ps_nm_km = self.dispersion;
        s.wavelength_nm = self.wavelength_nm;
        s.linewidth_tx_mhz = self.linewidth_tx_mhz;
        s.linewidth_lo_mhz = self.linewidth_lo_mhz;
        s.light_speed_m_s = self.light_speed;
        layer.sweep.lengths_km = self.length_km.clone();
        layer.variance_mode = self.mode;
        layer.convention = self.convention;
        layer.include_ici = self.include_ici.then_some(true);
        layer.criterion = self.criterion;
        layer.target_ber = self.target_ber;
        layer.max_length_km = self.max_length_km;
        layer.bins = self.bins.clone();
        layer.systems = self.systems.clone();
        layer.modulations = self.modulations.clone();
        layer.mc.trials = self.trials;
        layer.mc.seed = self.seed;
        layer.mc.samples_per_symbol = self.samples_per_symbol;
        layer.mc.steps_per_symbol = self.steps_per_symbol;
        layer.output.path = self.output.clone();
        layer
    }

    /// Merges preset, file and flags, then resolves.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut layer = match &self.preset {
            Some(name) => ConfigLayer::preset(name)?,
            None => ConfigLayer::default(),
        };
        if let Some(path) = &self.config {
            layer.merge(&ConfigLayer::from_file(path)?);
        }
        layer.merge(&self.flag_layer());
        RunConfig::resolve(&layer)
    }
}

/// Runs one command and returns the table with the resolved configuration.
pub fn run_table(command: &Command, cfg: &RunConfig) -> Result<Table, CliError> {
    match command {
        Command::Tau => Ok(commands::cmd_tau(cfg)),
        Command::Variance => commands::cmd_variance(cfg),
        Command::Ber => commands::cmd_ber(cfg),
        Command::Figure { which } => commands::cmd_figure(*which, cfg),
        Command::Reach => commands::cmd_reach(cfg),
        Command::Mc => commands::cmd_mc(cfg),
        Command::Presets => commands::cmd_presets(),
    }
}

/// Resolves the configuration, runs the command and renders the CSV
/// document. Returns the text and the output path, if any.
pub fn execute(cli: &Cli) -> Result<(String, Option<PathBuf>), CliError> {
    if matches!(cli.command, Command::Presets) {
        let table = commands::cmd_presets()?;
        return Ok((table.to_csv("presets"), cli.config.output.clone()));
    }
    let cfg = cli.config.resolve()?;
    let table = run_table(&cli.command, &cfg)?;
    let comment = format!("config {}", cfg.to_json());
    Ok((table.to_csv(&comment), cfg.output.clone()))
}
