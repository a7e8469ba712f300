//! Domain types shared by the analytic model, the simulator, and the CLI.
//!
//! Everything past [`LinkSpec::validate`] is in SI units: seconds, meters,
//! hertz, s/m² for dispersion and rad² for phase variances. The
//! engineering-unit record [`LinkSpec`] is what users write.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used by default, rounded as in the usual link-budget tables.
pub const DEFAULT_LIGHT_SPEED: f64 = 3e8;

/// ps/(nm·km) expressed in s/m².
const PS_PER_NM_KM: f64 = 1e-12 / (1e-9 * 1e3);

pub fn dispersion_to_si(ps_nm_km: f64) -> f64 {
    ps_nm_km * PS_PER_NM_KM
}

pub fn dispersion_from_si(s_per_m2: f64) -> f64 {
    s_per_m2 / PS_PER_NM_KM
}

/// Detection architecture, which fixes the pilot position relative to the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Coherent detection, pilot at band center, bins `-N/2..=-1, 1..=N/2`.
    Co,
    /// Direct detection, pilot `N` bins below a one-sided band `1..=N`.
    Dd,
}

impl SystemKind {
    pub fn label(self) -> &'static str {
        match self {
            SystemKind::Co => "CO",
            SystemKind::Dd => "DD",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "co" | "co-ofdm" => Ok(SystemKind::Co),
            "dd" | "dd-ofdm" => Ok(SystemKind::Dd),
            _ => Err(Error::InvalidSetting(format!("unknown system kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationFamily {
    Psk,
    Qam,
}

/// A PSK or square QAM constellation of `order` points.
///
/// The BER approximation is written for "nPSK" and "2nQAM": a PSK scheme of
/// order `n` has parameters `(n, n' = n)`, a QAM scheme of order `2n` has
/// `(n, n' = 2n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModulationScheme {
    family: ModulationFamily,
    order: u32,
}

impl ModulationScheme {
    pub fn new(family: ModulationFamily, order: u32) -> Result<Self> {
        let scheme = ModulationScheme { family, order };
        let ok = order >= 4
            && order.is_power_of_two()
            && match family {
                ModulationFamily::Psk => true,
                // square grid: even power of two
                ModulationFamily::Qam => order.trailing_zeros().is_multiple_of(2),
            };
        if ok {
            Ok(scheme)
        } else {
            Err(Error::UnsupportedModulation(scheme.to_string()))
        }
    }

    pub fn psk(order: u32) -> Result<Self> {
        Self::new(ModulationFamily::Psk, order)
    }

    pub fn qam(order: u32) -> Result<Self> {
        Self::new(ModulationFamily::Qam, order)
    }

    pub fn family(&self) -> ModulationFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    /// The `n` in the erfc argument `π / (n √2 σ)`.
    pub fn ber_n(&self) -> f64 {
        match self.family {
            ModulationFamily::Psk => self.order as f64,
            ModulationFamily::Qam => (self.order / 2) as f64,
        }
    }

    /// The `n'` in the prefactor `1 / (2 log2 n')`.
    pub fn ber_n_prime(&self) -> f64 {
        match self.family {
            ModulationFamily::Psk => self.order as f64,
            ModulationFamily::Qam => self.order as f64,
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            ModulationFamily::Psk => "PSK",
            ModulationFamily::Qam => "QAM",
        };
        write!(f, "{}{}", self.order, fam)
    }
}

impl FromStr for ModulationScheme {
    type Err = Error;

    /// Accepts `4psk`, `16PSK`, `16qam`, `qpsk`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "qpsk" {
            return Self::psk(4);
        }
        let (digits, family) = if let Some(d) = lower.strip_suffix("psk") {
            (d, ModulationFamily::Psk)
        } else if let Some(d) = lower.strip_suffix("qam") {
            (d, ModulationFamily::Qam)
        } else {
            return Err(Error::UnsupportedModulation(s.to_string()));
        };
        let order: u32 = digits
            .parse()
            .map_err(|_| Error::UnsupportedModulation(s.to_string()))?;
        Self::new(family, order)
    }
}

impl Serialize for ModulationScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModulationScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the symbol-period filtering of the phase difference is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// `(2/3)·2πΔν·d` for every delay.
    #[default]
    PaperLinear,
    /// Exact variance of the symbol-averaged Wiener phase difference.
    ExactFiltered,
}

impl VarianceMode {
    pub fn label(self) -> &'static str {
        match self {
            VarianceMode::PaperLinear => "paper_linear",
            VarianceMode::ExactFiltered => "exact_filtered",
        }
    }
}

impl FromStr for VarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "paper_linear" | "paper" | "linear" => Ok(VarianceMode::PaperLinear),
            "exact_filtered" | "exact" => Ok(VarianceMode::ExactFiltered),
            _ => Err(Error::InvalidSetting(format!("unknown variance mode {s:?}"))),
        }
    }
}

/// Normalization of the band-averaged BER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerConvention {
    /// `(1/N)·Σ_{r=1}^{N/2}` for CO and `(1/N)·Σ_{r=1}^{N}` for DD.
    #[default]
    AsPrinted,
    /// Mean over all `N` data bins (CO half-band sum doubled).
    SymmetricAverage,
}

impl BerConvention {
    pub fn label(self) -> &'static str {
        match self {
            BerConvention::AsPrinted => "as_printed",
            BerConvention::SymmetricAverage => "symmetric_average",
        }
    }
}

impl FromStr for BerConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "as_printed" | "printed" => Ok(BerConvention::AsPrinted),
            "symmetric_average" | "symmetric" => Ok(BerConvention::SymmetricAverage),
            _ => Err(Error::InvalidSetting(format!("unknown BER convention {s:?}"))),
        }
    }
}

/// User-facing link description in engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub kind: SystemKind,
    pub n_bins: usize,
    pub delta_f_hz: f64,
    pub dispersion_ps_nm_km: f64,
    pub wavelength_nm: f64,
    pub light_speed_m_s: f64,
    pub linewidth_tx_mhz: f64,
    pub linewidth_lo_mhz: f64,
    pub modulation: ModulationScheme,
}

impl LinkSpec {
    /// Checks every field and converts to SI.
    pub fn validate(&self) -> Result<SystemParams> {
        if !(self.delta_f_hz.is_finite() && self.delta_f_hz > 0.0) {
            return Err(Error::NonPositiveSpacing(self.delta_f_hz));
        }
        if self.n_bins < 2 || !self.n_bins.is_multiple_of(2) {
            return Err(Error::OddBinCount(self.n_bins));
        }
        for (name, value) in [
            ("linewidth_tx", self.linewidth_tx_mhz),
            ("linewidth_lo", self.linewidth_lo_mhz),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NegativeLinewidth { name, value: value * 1e6 });
            }
        }
        for (name, value) in [
            ("dispersion", self.dispersion_ps_nm_km),
            ("wavelength", self.wavelength_nm),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NegativeQuantity { name, value });
            }
        }
        if !(self.light_speed_m_s.is_finite() && self.light_speed_m_s > 0.0) {
            return Err(Error::NegativeQuantity {
                name: "light_speed",
                value: self.light_speed_m_s,
            });
        }
        // re-check in case the scheme was built without its constructor
        let modulation = ModulationScheme::new(self.modulation.family, self.modulation.order)?;

        Ok(SystemParams {
            kind: self.kind,
            n_bins: self.n_bins,
            delta_f: self.delta_f_hz,
            dispersion: dispersion_to_si(self.dispersion_ps_nm_km),
            wavelength: self.wavelength_nm * 1e-9,
            light_speed: self.light_speed_m_s,
            linewidth_tx: self.linewidth_tx_mhz * 1e6,
            linewidth_lo: self.linewidth_lo_mhz * 1e6,
            modulation,
        })
    }

    /// Standard single-mode fiber at 1550 nm, 200 bins of 1 GHz, 4 MHz linewidth.
    pub fn reference(kind: SystemKind, modulation: ModulationScheme) -> Self {
        LinkSpec {
            kind,
            n_bins: 200,
            delta_f_hz: 1e9,
            dispersion_ps_nm_km: 16.0,
            wavelength_nm: 1550.0,
            light_speed_m_s: DEFAULT_LIGHT_SPEED,
            linewidth_tx_mhz: 4.0,
            linewidth_lo_mhz: 0.0,
            modulation,
        }
    }
}

/// Validated link, OFDM and laser parameters in SI units.
///
/// Only obtainable through [`LinkSpec::validate`]; the symbol time is
/// always derived as `1 / delta_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    kind: SystemKind,
    n_bins: usize,
    delta_f: f64,
    dispersion: f64,
    wavelength: f64,
    light_speed: f64,
    linewidth_tx: f64,
    linewidth_lo: f64,
    modulation: ModulationScheme,
}

impl SystemParams {
    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn symbol_time(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Fiber dispersion in s/m².
    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn linewidth_tx(&self) -> f64 {
        self.linewidth_tx
    }

    pub fn linewidth_lo(&self) -> f64 {
        self.linewidth_lo
    }

    pub fn modulation(&self) -> ModulationScheme {
        self.modulation
    }

    /// Linewidth of the phase process left after detection: Tx + LO for
    /// coherent detection, Tx alone for self-heterodyne direct detection.
    pub fn effective_linewidth(&self) -> f64 {
        match self.kind {
            SystemKind::Co => self.linewidth_tx + self.linewidth_lo,
            SystemKind::Dd => self.linewidth_tx,
        }
    }

    /// Data-carrying bin indices in ascending order.
    pub fn bin_indices(&self) -> Vec<i64> {
        let n = self.n_bins as i64;
        match self.kind {
            SystemKind::Co => (-n / 2..=n / 2).filter(|&k| k != 0).collect(),
            SystemKind::Dd => (1..=n).collect(),
        }
    }

    pub fn contains_bin(&self, k: i64) -> bool {
        let n = self.n_bins as i64;
        match self.kind {
            SystemKind::Co => k != 0 && k.abs() <= n / 2,
            SystemKind::Dd => (1..=n).contains(&k),
        }
    }

    /// The bin farthest from the pilot, i.e. with the largest dispersion delay.
    pub fn worst_bin(&self) -> i64 {
        let n = self.n_bins as i64;
        match self.kind {
            SystemKind::Co => n / 2,
            SystemKind::Dd => n,
        }
    }

    pub fn with_kind(&self, kind: SystemKind) -> Self {
        SystemParams { kind, ..self.clone() }
    }

    pub fn with_modulation(&self, modulation: ModulationScheme) -> Self {
        SystemParams { modulation, ..self.clone() }
    }

    pub fn with_n_bins(&self, n_bins: usize) -> Result<Self> {
        if n_bins < 2 || !n_bins.is_multiple_of(2) {
            return Err(Error::OddBinCount(n_bins));
        }
        Ok(SystemParams { n_bins, ..self.clone() })
    }

    /// Replaces both laser linewidths (Hz).
    pub fn with_linewidths(&self, tx: f64, lo: f64) -> Result<Self> {
        for (name, value) in [("linewidth_tx", tx), ("linewidth_lo", lo)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NegativeLinewidth { name, value });
            }
        }
        Ok(SystemParams {
            linewidth_tx: tx,
            linewidth_lo: lo,
            ..self.clone()
        })
    }

    /// Back to engineering units.
    pub fn to_spec(&self) -> LinkSpec {
        LinkSpec {
            kind: self.kind,
            n_bins: self.n_bins,
            delta_f_hz: self.delta_f,
            dispersion_ps_nm_km: dispersion_from_si(self.dispersion),
            wavelength_nm: self.wavelength * 1e9,
            light_speed_m_s: self.light_speed,
            linewidth_tx_mhz: self.linewidth_tx * 1e-6,
            linewidth_lo_mhz: self.linewidth_lo * 1e-6,
            modulation: self.modulation,
        }
    }
}
