//! Run configuration: built-in presets, JSON files, and flag overrides.
//!
//! Layers apply in order preset → file → flags; later layers override
//! earlier ones key by key. Every `system` key must be supplied by some
//! layer; everything else has a default.

use std::fs;
use std::path::{Path, PathBuf};

use pilot_ofdm::analytic::ReachCriterion;
use pilot_ofdm::{
    BerConvention, LinkSpec, ModulationScheme, SystemKind, SystemParams, VarianceMode,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRESET_NAMES: &[&str] = &["paper-sec3"];

/// Partial `system` section; every key optional so layers can merge.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemLayer {
    pub kind: Option<SystemKind>,
    pub n_bins: Option<usize>,
    pub delta_f_hz: Option<f64>,
    pub dispersion_ps_nm_km: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub light_speed_m_s: Option<f64>,
    pub linewidth_tx_mhz: Option<f64>,
    pub linewidth_lo_mhz: Option<f64>,
    pub modulation: Option<ModulationScheme>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepLayer {
    pub start_km: Option<f64>,
    pub stop_km: Option<f64>,
    pub step_km: Option<f64>,
    pub lengths_km: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McLayer {
    pub trials: Option<u64>,
    pub samples_per_symbol: Option<usize>,
    pub steps_per_symbol: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputLayer {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

/// One configuration layer, as read from JSON or built from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    #[serde(default)]
    pub system: SystemLayer,
    #[serde(default)]
    pub sweep: SweepLayer,
    pub variance_mode: Option<VarianceMode>,
    pub convention: Option<BerConvention>,
    pub include_ici: Option<bool>,
    pub criterion: Option<ReachCriterion>,
    pub target_ber: Option<f64>,
    pub max_length_km: Option<f64>,
    pub bins: Option<Vec<i64>>,
    pub systems: Option<Vec<SystemKind>>,
    pub modulations: Option<Vec<ModulationScheme>>,
    #[serde(default)]
    pub mc: McLayer,
    #[serde(default)]
    pub output: OutputLayer,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),+) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )+
    };
}

impl ConfigLayer {
    /// Applies `other` on top of `self`.
    pub fn merge(&mut self, other: &ConfigLayer) {
        overlay!(self.system, other.system; kind, n_bins, delta_f_hz, dispersion_ps_nm_km,
            wavelength_nm, light_speed_m_s, linewidth_tx_mhz, linewidth_lo_mhz, modulation);
        let sweep_given = other.sweep.lengths_km.is_some()
            || other.sweep.start_km.is_some()
            || other.sweep.stop_km.is_some()
            || other.sweep.step_km.is_some();
        if sweep_given {
            // a new sweep replaces the old one wholesale
            self.sweep = other.sweep.clone();
        }
        overlay!(self, other; variance_mode, convention, include_ici, criterion, target_ber,
            max_length_km, bins, systems, modulations);
        overlay!(self.mc, other.mc; trials, samples_per_symbol, steps_per_symbol, seed);
        overlay!(self.output, other.output; path, format);
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        match name {
            "paper-sec3" => Ok(paper_sec3()),
            _ => Err(CliError::Usage(format!(
                "unknown preset {name:?}; available: {}",
                PRESET_NAMES.join(", ")
            ))),
        }
    }
}

/// 200 bins of 1 GHz over standard fiber at 1550 nm with a 4 MHz phase-noise
/// linewidth (the CO IF linewidth, carried here as Tx = 4 MHz and LO = 0 so
/// that DD sees the same 4 MHz), lengths up to 500 km.
fn paper_sec3() -> ConfigLayer {
    ConfigLayer {
        system: SystemLayer {
            kind: Some(SystemKind::Co),
            n_bins: Some(200),
            delta_f_hz: Some(1e9),
            dispersion_ps_nm_km: Some(16.0),
            wavelength_nm: Some(1550.0),
            light_speed_m_s: Some(3e8),
            linewidth_tx_mhz: Some(4.0),
            linewidth_lo_mhz: Some(0.0),
            modulation: Some(ModulationScheme::psk(4).expect("4PSK is supported")),
        },
        sweep: SweepLayer {
            start_km: Some(0.0),
            stop_km: Some(500.0),
            step_km: Some(5.0),
            lengths_km: None,
        },
        systems: Some(vec![SystemKind::Co, SystemKind::Dd]),
        modulations: Some(vec![
            ModulationScheme::psk(4).expect("4PSK is supported"),
            ModulationScheme::psk(16).expect("16PSK is supported"),
        ]),
        ..Default::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub trials: u64,
    pub samples_per_symbol: usize,
    pub steps_per_symbol: usize,
    pub seed: u64,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: LinkSpec,
    pub lengths_km: Vec<f64>,
    pub variance_mode: VarianceMode,
    pub convention: BerConvention,
    pub include_ici: bool,
    pub criterion: ReachCriterion,
    pub target_ber: f64,
    pub max_length_km: f64,
    pub bins: Option<Vec<i64>>,
    pub systems: Vec<SystemKind>,
    pub modulations: Vec<ModulationScheme>,
    pub mc: McConfig,
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub params: SystemParams,
}

fn required<T: Clone>(value: &Option<T>, key: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Parse(format!("missing key `{key}` (give it in the config file, as a flag, or use --preset paper-sec3)")))
}

fn sweep_lengths(sweep: &SweepLayer) -> Result<Vec<f64>, CliError> {
    let lengths = if let Some(list) = &sweep.lengths_km {
        if sweep.start_km.is_some() || sweep.stop_km.is_some() || sweep.step_km.is_some() {
            return Err(CliError::Parse(
                "sweep: give either `lengths_km` or `start_km`/`stop_km`/`step_km`, not both".into(),
            ));
        }
        list.clone()
    } else if *sweep == SweepLayer::default() {
        (0..=100).map(|i| 5.0 * i as f64).collect()
    } else {
        let start = sweep.start_km.unwrap_or(0.0);
        let stop = required(&sweep.stop_km, "sweep.stop_km")?;
        let step = required(&sweep.step_km, "sweep.step_km")?;
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::Parse(format!("sweep.step_km must be positive, got {step}")));
        }
        let mut v = Vec::new();
        let mut i = 0u64;
        loop {
            let l = start + i as f64 * step;
            if l > stop + 1e-9 * step {
                break;
            }
            v.push(l);
            i += 1;
        }
        v
    };
    if lengths.is_empty() {
        return Err(CliError::Parse("sweep is empty".into()));
    }
    if lengths.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(CliError::Parse("sweep lengths must be finite and nonnegative".into()));
    }
    if lengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Parse("sweep lengths must be strictly increasing".into()));
    }
    Ok(lengths)
}

impl RunConfig {
    pub fn resolve(layer: &ConfigLayer) -> Result<Self, CliError> {
        let s = &layer.system;
        let system = LinkSpec {
            kind: required(&s.kind, "system.kind")?,
            n_bins: required(&s.n_bins, "system.n_bins")?,
            delta_f_hz: required(&s.delta_f_hz, "system.delta_f_hz")?,
            dispersion_ps_nm_km: required(&s.dispersion_ps_nm_km, "system.dispersion_ps_nm_km")?,
            wavelength_nm: required(&s.wavelength_nm, "system.wavelength_nm")?,
            light_speed_m_s: s.light_speed_m_s.unwrap_or(pilot_ofdm::model::DEFAULT_LIGHT_SPEED),
            linewidth_tx_mhz: required(&s.linewidth_tx_mhz, "system.linewidth_tx_mhz")?,
            linewidth_lo_mhz: s.linewidth_lo_mhz.unwrap_or(0.0),
            modulation: required(&s.modulation, "system.modulation")?,
        };
        let params = system.validate().map_err(CliError::Validation)?;
        let lengths_km = sweep_lengths(&layer.sweep)?;

        if let Some(format) = &layer.output.format {
            if !format.eq_ignore_ascii_case("csv") {
                return Err(CliError::Parse(format!("unsupported output format {format:?} (only csv)")));
            }
        }
        let target_ber = layer.target_ber.unwrap_or(1e-4);
        let max_length_km = layer.max_length_km.unwrap_or(2000.0);
        if !(max_length_km.is_finite() && max_length_km > 0.0) {
            return Err(CliError::Parse(format!("max_length_km must be positive, got {max_length_km}")));
        }
        let systems = layer.systems.clone().unwrap_or_else(|| vec![system.kind]);
        let modulations = layer.modulations.clone().unwrap_or_else(|| vec![system.modulation]);
        if systems.is_empty() || modulations.is_empty() {
            return Err(CliError::Parse("`systems` and `modulations` must be nonempty".into()));
        }
        let mc = McConfig {
            trials: layer.mc.trials.unwrap_or(1000),
            samples_per_symbol: layer.mc.samples_per_symbol.unwrap_or(4 * system.n_bins),
            steps_per_symbol: layer
                .mc
                .steps_per_symbol
                .unwrap_or(pilot_ofdm::simkernel::DEFAULT_STEPS_PER_SYMBOL),
            seed: layer.mc.seed.unwrap_or(1),
        };
        Ok(RunConfig {
            system,
            lengths_km,
            variance_mode: layer.variance_mode.unwrap_or_default(),
            convention: layer.convention.unwrap_or_default(),
            include_ici: layer.include_ici.unwrap_or(false),
            criterion: layer.criterion.unwrap_or_default(),
            target_ber,
            max_length_km,
            bins: layer.bins.clone(),
            systems,
            modulations,
            mc,
            output: layer.output.path.clone(),
            params,
        })
    }

    /// One-line JSON record of the resolved configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// `params` with another system kind and modulation.
    pub fn variant(&self, kind: SystemKind, modulation: ModulationScheme) -> SystemParams {
        self.params.with_kind(kind).with_modulation(modulation)
    }

    /// Bins for per-bin tables: the configured list when given (dropping
    /// indices invalid for `params`), otherwise `{1, N/8, N/4, N/2}` for CO
    /// and `{1, N/2, N}` for DD.
    pub fn representative_bins(&self, params: &SystemParams) -> Vec<i64> {
        let n = params.n_bins() as i64;
        let mut bins: Vec<i64> = match &self.bins {
            Some(list) => list.iter().copied().filter(|&k| params.contains_bin(k)).collect(),
            None => match params.kind() {
                SystemKind::Co => vec![1, n / 8, n / 4, n / 2],
                SystemKind::Dd => vec![1, n / 2, n],
            },
        };
        bins.retain(|&k| params.contains_bin(k));
        bins.dedup();
        bins
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_resolves() {
        let cfg = RunConfig::resolve(&ConfigLayer::preset("paper-sec3").unwrap()).unwrap();
        assert_eq!(cfg.params.n_bins(), 200);
        assert_eq!(cfg.params.delta_f(), 1e9);
        assert!((cfg.params.dispersion() - 1.6e-5).abs() < 1e-20);
        assert!((cfg.params.wavelength() - 1.55e-6).abs() < 1e-20);
        assert_eq!(cfg.params.effective_linewidth(), 4e6);
        assert_eq!(cfg.params.with_kind(SystemKind::Dd).effective_linewidth(), 4e6);
        assert_eq!(cfg.lengths_km.len(), 101);
        assert_eq!(*cfg.lengths_km.last().unwrap(), 500.0);
        assert_eq!(cfg.representative_bins(&cfg.params), vec![1, 25, 50, 100]);
        assert_eq!(
            cfg.representative_bins(&cfg.params.with_kind(SystemKind::Dd)),
            vec![1, 100, 200]
        );
    }

    #[test]
    fn missing_key_is_named() {
        let text = r#"{"system": {"kind": "co", "n_bins": 8, "dispersion_ps_nm_km": 16,
            "wavelength_nm": 1550, "linewidth_tx_mhz": 4, "modulation": "4psk"},
            "sweep": {"lengths_km": [0, 10]}}"#;
        let layer = ConfigLayer::from_json(text, "test.json").unwrap();
        let err = RunConfig::resolve(&layer).unwrap_err();
        assert!(matches!(err, CliError::Parse(ref m) if m.contains("system.delta_f_hz")), "{err}");
    }

    #[test]
    fn json_errors_carry_position() {
        let err = ConfigLayer::from_json("{\n  \"system\": {\"n_bins\": \"x\"}\n}", "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cfg.json") && msg.contains("line 2"), "{msg}");
        let err = ConfigLayer::from_json(r#"{"sytem": {}}"#, "cfg.json").unwrap_err();
        assert!(err.to_string().contains("sytem"));
    }

    #[test]
    fn later_layers_win() {
        let mut layer = ConfigLayer::preset("paper-sec3").unwrap();
        let flags = ConfigLayer {
            sweep: SweepLayer {
                lengths_km: Some(vec![225.0]),
                ..Default::default()
            },
            system: SystemLayer {
                n_bins: Some(8),
                ..Default::default()
            },
            ..Default::default()
        };
        layer.merge(&flags);
        let cfg = RunConfig::resolve(&layer).unwrap();
        assert_eq!(cfg.lengths_km, vec![225.0]);
        assert_eq!(cfg.params.n_bins(), 8);
        assert_eq!(cfg.params.delta_f(), 1e9);
    }

    #[test]
    fn sweep_rules() {
        let sweep = |start, stop, step| SweepLayer {
            start_km: Some(start),
            stop_km: Some(stop),
            step_km: Some(step),
            lengths_km: None,
        };
        assert_eq!(sweep_lengths(&sweep(0.0, 10.0, 2.5)).unwrap(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert!(sweep_lengths(&sweep(0.0, 10.0, -1.0)).is_err());
        let list = |v: Vec<f64>| SweepLayer {
            lengths_km: Some(v),
            ..Default::default()
        };
        assert!(sweep_lengths(&list(vec![])).is_err());
        assert!(sweep_lengths(&list(vec![1.0, 1.0])).is_err());
        assert!(sweep_lengths(&list(vec![5.0, 1.0])).is_err());
        assert_eq!(sweep_lengths(&list(vec![225.0])).unwrap(), vec![225.0]);
    }

    #[test]
    fn validation_errors_surface() {
        let mut layer = ConfigLayer::preset("paper-sec3").unwrap();
        layer.system.n_bins = Some(201);
        assert!(matches!(RunConfig::resolve(&layer), Err(CliError::Validation(_))));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(ConfigLayer::preset("nope"), Err(CliError::Usage(_))));
    }
}
