//! Subcommand bodies. Each returns a [`Table`]; rendering and I/O live in
//! the binary.

use pilot_ofdm::analytic::{
    band_ber, ber_bin, cpe_variance, dispersion_delay, ici_total_variance, solve_reach,
    total_variance, variance_report, ReachCriterion, ReachSettings,
};
use pilot_ofdm::simkernel::{run_trials, McSettings};
use pilot_ofdm::{BerConvention, SystemParams, VarianceMode};

use crate::config::{RunConfig, PRESET_NAMES};
use crate::output::{Cell, Table};
use crate::CliError;

fn meters(km: f64) -> f64 {
    km * 1e3
}

/// Adjacent-bin dispersion delay over the sweep.
pub fn cmd_tau(cfg: &RunConfig) -> Table {
    let mut t = Table::new(&["L_km", "tau_ps"]);
    for &l in &cfg.lengths_km {
        t.push(vec![l.into(), (dispersion_delay(&cfg.params, meters(l)) * 1e12).into()]);
    }
    t
}

/// Per-bin variances of the configured system; every bin unless `bins` is set.
pub fn cmd_variance(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut t = Table::new(&[
        "system",
        "k",
        "L_km",
        "tau_ps",
        "cpe_var_rad2",
        "ici_var_rad2",
        "total_var_rad2",
        "variance_mode",
    ]);
    for &l in &cfg.lengths_km {
        let report = variance_report(p, meters(l), cfg.variance_mode)?;
        for b in &report.per_bin {
            if let Some(bins) = &cfg.bins {
                if !bins.contains(&b.k) {
                    continue;
                }
            }
            t.push(vec![
                p.kind().label().into(),
                b.k.into(),
                l.into(),
                (report.tau * 1e12).into(),
                b.cpe.into(),
                b.ici.into(),
                b.total.into(),
                cfg.variance_mode.label().into(),
            ]);
        }
    }
    Ok(t)
}

/// Band BER of the configured system under both conventions, with the worst bin.
pub fn cmd_ber(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut t = Table::new(&[
        "system",
        "modulation",
        "L_km",
        "worst_bin_ber",
        "band_ber_as_printed",
        "band_ber_symmetric_average",
        "variance_mode",
        "include_ici",
    ]);
    for &l in &cfg.lengths_km {
        let printed = band_ber(p, meters(l), cfg.variance_mode, cfg.include_ici, BerConvention::AsPrinted)?;
        let sym = band_ber(
            p,
            meters(l),
            cfg.variance_mode,
            cfg.include_ici,
            BerConvention::SymmetricAverage,
        )?;
        t.push(vec![
            p.kind().label().into(),
            p.modulation().to_string().into(),
            l.into(),
            printed.worst_bin_ber().into(),
            printed.band_ber.into(),
            sym.band_ber.into(),
            cfg.variance_mode.label().into(),
            cfg.include_ici.into(),
        ]);
    }
    Ok(t)
}

/// CPE and total variance against length for representative bins of each system.
fn figure_2(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "system",
        "k",
        "L_km",
        "cpe_var_rad2",
        "ici_var_rad2",
        "total_var_rad2",
    ]);
    for &kind in &cfg.systems {
        let p = cfg.variant(kind, cfg.params.modulation());
        for k in cfg.representative_bins(&p) {
            for &l in &cfg.lengths_km {
                let cpe = cpe_variance(&p, k, meters(l), cfg.variance_mode)?;
                let ici = ici_total_variance(&p, k, meters(l))?;
                t.push(vec![
                    kind.label().into(),
                    k.into(),
                    l.into(),
                    cpe.into(),
                    ici.into(),
                    (cpe + ici).into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Per-bin BER against length.
fn figure_3(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&["system", "modulation", "k", "L_km", "ber"]);
    for &kind in &cfg.systems {
        for &modulation in &cfg.modulations {
            let p = cfg.variant(kind, modulation);
            for k in cfg.representative_bins(&p) {
                for &l in &cfg.lengths_km {
                    let v = total_variance(&p, k, meters(l), cfg.variance_mode, cfg.include_ici)?;
                    t.push(vec![
                        kind.label().into(),
                        modulation.to_string().into(),
                        k.into(),
                        l.into(),
                        ber_bin(v, modulation)?.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// Band-averaged BER against length, with the worst-bin BER alongside.
fn figure_4(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "system",
        "modulation",
        "L_km",
        "band_ber",
        "convention",
        "worst_bin_ber",
    ]);
    for &kind in &cfg.systems {
        for &modulation in &cfg.modulations {
            let p = cfg.variant(kind, modulation);
            for &l in &cfg.lengths_km {
                let r = band_ber(&p, meters(l), cfg.variance_mode, cfg.include_ici, cfg.convention)?;
                t.push(vec![
                    kind.label().into(),
                    modulation.to_string().into(),
                    l.into(),
                    r.band_ber.into(),
                    cfg.convention.label().into(),
                    r.worst_bin_ber().into(),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn cmd_figure(which: u8, cfg: &RunConfig) -> Result<Table, CliError> {
    match which {
        2 => figure_2(cfg),
        3 => figure_3(cfg),
        4 => figure_4(cfg),
        _ => Err(CliError::Usage(format!("figure must be 2, 3 or 4, got {which}"))),
    }
}

pub fn reach_settings(cfg: &RunConfig, convention: BerConvention) -> ReachSettings {
    ReachSettings {
        target_ber: cfg.target_ber,
        mode: cfg.variance_mode,
        include_ici: cfg.include_ici,
        convention,
        criterion: cfg.criterion,
        max_length: meters(cfg.max_length_km),
        ..Default::default()
    }
}

/// Reach for every configured (system, modulation) pair. The band criterion
/// is reported under both conventions.
pub fn cmd_reach(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "system",
        "modulation",
        "criterion",
        "convention",
        "variance_mode",
        "include_ici",
        "target_ber",
        "reach_km",
        "saturated",
    ]);
    let conventions = match cfg.criterion {
        ReachCriterion::BandAverage => vec![BerConvention::AsPrinted, BerConvention::SymmetricAverage],
        ReachCriterion::WorstBin => vec![cfg.convention],
    };
    for &kind in &cfg.systems {
        for &modulation in &cfg.modulations {
            let p = cfg.variant(kind, modulation);
            for &convention in &conventions {
                let reach = solve_reach(&p, &reach_settings(cfg, convention))?;
                t.push(vec![
                    kind.label().into(),
                    modulation.to_string().into(),
                    cfg.criterion.label().into(),
                    convention.label().into(),
                    cfg.variance_mode.label().into(),
                    cfg.include_ici.into(),
                    cfg.target_ber.into(),
                    (reach.length / 1e3).into(),
                    reach.saturated.into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn analytic_columns(p: &SystemParams, k: i64, length: f64, cfg: &RunConfig) -> Result<[f64; 4], CliError> {
    let linear = cpe_variance(p, k, length, VarianceMode::PaperLinear)?;
    let exact = cpe_variance(p, k, length, VarianceMode::ExactFiltered)?;
    let ici = ici_total_variance(p, k, length)?;
    let total = total_variance(p, k, length, cfg.variance_mode, cfg.include_ici)?;
    Ok([linear, exact, ici, ber_bin(total, p.modulation())?])
}

/// Monte-Carlo campaign over the sweep for the configured system, one row
/// per (length, representative bin), next to the closed-form values.
pub fn cmd_mc(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let settings = McSettings {
        trials: cfg.mc.trials,
        samples_per_symbol: cfg.mc.samples_per_symbol,
        steps_per_symbol: cfg.mc.steps_per_symbol,
        seed: cfg.mc.seed,
    };
    let bps = p.modulation().bits_per_symbol();
    let bins = cfg.representative_bins(p);
    let mut t = Table::new(&[
        "system",
        "modulation",
        "L_km",
        "k",
        "delay_ps",
        "trials",
        "meas_phase_var",
        "meas_phase_var_stderr",
        "meas_cpe_var",
        "meas_cpe_var_stderr",
        "meas_ici_var",
        "meas_ici_var_stderr",
        "analytic_paper_linear",
        "analytic_exact_filtered",
        "analytic_ici",
        "meas_ber",
        "analytic_ber",
    ]);
    for &l in &cfg.lengths_km {
        let metrics = run_trials(p, meters(l), &settings)?;
        for b in metrics.per_bin.iter().filter(|b| bins.contains(&b.k)) {
            let [linear, exact, ici, ber] = analytic_columns(p, b.k, meters(l), cfg)?;
            t.push(vec![
                p.kind().label().into(),
                p.modulation().to_string().into(),
                l.into(),
                b.k.into(),
                (b.delay * 1e12).into(),
                metrics.trials.into(),
                b.phase_var.value.into(),
                b.phase_var.stderr.into(),
                b.cpe_var.value.into(),
                b.cpe_var.stderr.into(),
                b.ici_var.value.into(),
                b.ici_var.stderr.into(),
                linear.into(),
                exact.into(),
                ici.into(),
                b.ber(bps).into(),
                ber.into(),
            ]);
        }
    }
    Ok(t)
}

/// Built-in presets with their JSON.
pub fn cmd_presets() -> Result<Table, CliError> {
    let mut t = Table::new(&["name", "config_json"]);
    for name in PRESET_NAMES {
        let layer = crate::config::ConfigLayer::preset(name)?;
        let json = serde_json::to_string(&layer).expect("preset serializes");
        t.push(vec![Cell::from(*name), json.into()]);
    }
    Ok(t)
}
