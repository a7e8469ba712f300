//! Closed-form phase-noise budget of a pilot-tone OFDM link.
//!
//! After the receiver multiplies by the conjugated pilot, the phase noise
//! left on bin `k` is the difference `ψ(t) − ψ(t + d_k)` between the pilot
//! and a dispersion-delayed copy of the same laser phase. Averaging that
//! difference over one symbol gives the common phase error (CPE); the
//! delayed phases of other bins leak in as inter-carrier interference (ICI).
//!
//! All functions are pure and take SI inputs.

use std::f64::consts::{PI, SQRT_2};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::model::{BerConvention, ModulationScheme, SystemKind, SystemParams, VarianceMode};

/// Dispersion-induced delay between adjacent bins, `τ = D·L·λ²·Δf / c`.
pub fn dispersion_delay(params: &SystemParams, length: f64) -> f64 {
    params.dispersion() * length * params.wavelength().powi(2) * params.delta_f()
        / params.light_speed()
}

/// Delay of bin `k` relative to the pilot: `|k|·τ` (CO) or `(N + k)·τ` (DD).
pub fn bin_delay(params: &SystemParams, k: i64, tau: f64) -> Result<f64> {
    if !params.contains_bin(k) {
        return Err(Error::BinOutOfRange { k });
    }
    let steps = match params.kind() {
        SystemKind::Co => k.unsigned_abs() as f64,
        SystemKind::Dd => (params.n_bins() as i64 + k) as f64,
    };
    Ok(steps * tau)
}

/// Variance of the symbol-averaged phase difference `(1/T)∫₀ᵀ ψ(t) − ψ(t+d) dt`
/// for a Wiener phase with linewidth `linewidth`.
///
/// With diffusion rate `q = 2πΔν` the two increments over `[t, t+d]` and
/// `[s, s+d]` have covariance `q·max(0, d − |t − s|)`; integrating over the
/// symbol square gives `q(d²/T − d³/3T²)` below `d = T` and `q(d − T/3)`
/// above. `PaperLinear` uses `(2/3)·q·d` throughout, which touches the
/// exact curve only at `d = T`.
pub fn filtered_variance(linewidth: f64, delay: f64, symbol_time: f64, mode: VarianceMode) -> f64 {
    let q = 2.0 * PI * linewidth;
    let (d, t) = (delay, symbol_time);
    match mode {
        VarianceMode::PaperLinear => 2.0 / 3.0 * q * d,
        VarianceMode::ExactFiltered if d <= t => q * (d * d / t - d * d * d / (3.0 * t * t)),
        VarianceMode::ExactFiltered => q * (d - t / 3.0),
    }
}

/// CPE variance of bin `k` at fiber length `length` (rad²).
pub fn cpe_variance(params: &SystemParams, k: i64, length: f64, mode: VarianceMode) -> Result<f64> {
    let d = bin_delay(params, k, dispersion_delay(params, length))?;
    Ok(filtered_variance(
        params.effective_linewidth(),
        d,
        params.symbol_time(),
        mode,
    ))
}

/// Phase variance that interferer `r` imposes on victim `k`:
/// `amp_ratio_sq · 4πΔν·d_r / (3√2)`.
pub fn ici_pair_variance(
    params: &SystemParams,
    k: i64,
    r: i64,
    length: f64,
    amp_ratio_sq: f64,
) -> Result<f64> {
    if r == k {
        return Err(Error::SameBin(k));
    }
    if !params.contains_bin(k) {
        return Err(Error::BinOutOfRange { k });
    }
    if !(amp_ratio_sq.is_finite() && amp_ratio_sq >= 0.0) {
        return Err(Error::NegativeQuantity {
            name: "amp_ratio_sq",
            value: amp_ratio_sq,
        });
    }
    let d_r = bin_delay(params, r, dispersion_delay(params, length))?;
    Ok(amp_ratio_sq * 4.0 * PI * params.effective_linewidth() * d_r / (3.0 * SQRT_2))
}

/// `⟨|a_r|²⟩ / min |a_k|²`: interferer power averaged over the constellation,
/// victim at its weakest point. Exactly 1 for PSK.
pub fn ici_amplitude_ratio(modulation: ModulationScheme) -> Result<f64> {
    let stats = Constellation::new(modulation)?.power_stats();
    Ok(stats.mean / stats.min)
}

/// Total ICI variance on bin `k`, summed over every other data bin.
pub fn ici_total_variance(params: &SystemParams, k: i64, length: f64) -> Result<f64> {
    if !params.contains_bin(k) {
        return Err(Error::BinOutOfRange { k });
    }
    let ratio = ici_amplitude_ratio(params.modulation())?;
    params
        .bin_indices()
        .into_iter()
        .filter(|&r| r != k)
        .map(|r| ici_pair_variance(params, k, r, length, ratio))
        .sum()
}

pub fn total_variance(
    params: &SystemParams,
    k: i64,
    length: f64,
    mode: VarianceMode,
    include_ici: bool,
) -> Result<f64> {
    let cpe = cpe_variance(params, k, length, mode)?;
    let ici = if include_ici {
        ici_total_variance(params, k, length)?
    } else {
        0.0
    };
    Ok(cpe + ici)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinVariance {
    pub k: i64,
    pub cpe: f64,
    pub ici: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub length: f64,
    pub tau: f64,
    pub per_bin: Vec<BinVariance>,
}

/// CPE, ICI and their sum for every data bin. `total` always includes ICI.
pub fn variance_report(params: &SystemParams, length: f64, mode: VarianceMode) -> Result<VarianceReport> {
    let per_bin = params
        .bin_indices()
        .into_iter()
        .map(|k| {
            let cpe = cpe_variance(params, k, length, mode)?;
            let ici = ici_total_variance(params, k, length)?;
            Ok(BinVariance {
                k,
                cpe,
                ici,
                total: cpe + ici,
            })
        })
        .collect::<Result<_>>()?;
    Ok(VarianceReport {
        length,
        tau: dispersion_delay(params, length),
        per_bin,
    })
}

/// Symbol-phase BER floor `erfc(π / (n√2σ)) / (2 log2 n')`.
pub fn ber_bin(sigma_sq: f64, modulation: ModulationScheme) -> Result<f64> {
    if sigma_sq.is_nan() || sigma_sq < 0.0 {
        return Err(Error::NegativeVariance(sigma_sq));
    }
    if sigma_sq == 0.0 {
        return Ok(0.0);
    }
    let prefactor = 1.0 / (2.0 * modulation.ber_n_prime().log2());
    let x = PI / (modulation.ber_n() * SQRT_2 * sigma_sq.sqrt());
    Ok(prefactor * libm::erfc(x))
}

/// Band-averaged BER from per-bin values.
///
/// CO sums only the positive half band `r = 1..=N/2`; `AsPrinted` divides
/// that sum by `N`, `SymmetricAverage` by `N/2`. DD sums all `N` bins and
/// both conventions divide by `N`. Bins missing from `per_bin` count as zero.
pub fn band_average(params: &SystemParams, per_bin: &[(i64, f64)], convention: BerConvention) -> f64 {
    let n = params.n_bins() as f64;
    let sum: f64 = per_bin
        .iter()
        .filter(|(k, _)| *k > 0 && params.contains_bin(*k))
        .map(|(_, b)| b)
        .sum();
    match (params.kind(), convention) {
        (SystemKind::Co, BerConvention::SymmetricAverage) => 2.0 * sum / n,
        _ => sum / n,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub length: f64,
    pub per_bin: Vec<(i64, f64)>,
    pub band_ber: f64,
    pub convention: BerConvention,
}

impl BerReport {
    pub fn worst_bin_ber(&self) -> f64 {
        self.per_bin.iter().map(|(_, b)| *b).fold(0.0, f64::max)
    }
}

pub fn band_ber(
    params: &SystemParams,
    length: f64,
    mode: VarianceMode,
    include_ici: bool,
    convention: BerConvention,
) -> Result<BerReport> {
    // Σ_{r≠k} d_r is shared by every victim, so compute ICI from the full sum.
    let tau = dispersion_delay(params, length);
    let bins = params.bin_indices();
    let ici_scale = if include_ici {
        ici_amplitude_ratio(params.modulation())? * 4.0 * PI * params.effective_linewidth()
            / (3.0 * SQRT_2)
    } else {
        0.0
    };
    let delays = bins
        .iter()
        .map(|&k| bin_delay(params, k, tau))
        .collect::<Result<Vec<_>>>()?;
    let delay_sum: f64 = delays.iter().sum();
    let per_bin = bins
        .iter()
        .zip(&delays)
        .map(|(&k, &d)| {
            let cpe = filtered_variance(params.effective_linewidth(), d, params.symbol_time(), mode);
            let ici = ici_scale * (delay_sum - d).max(0.0);
            Ok((k, ber_bin(cpe + ici, params.modulation())?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerReport {
        length,
        band_ber: band_average(params, &per_bin, convention),
        per_bin,
        convention,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReachCriterion {
    BandAverage,
    #[default]
    WorstBin,
}

impl ReachCriterion {
    pub fn label(self) -> &'static str {
        match self {
            ReachCriterion::BandAverage => "band_average",
            ReachCriterion::WorstBin => "worst_bin",
        }
    }
}

impl std::str::FromStr for ReachCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "band_average" | "band" => Ok(ReachCriterion::BandAverage),
            "worst_bin" | "worst" => Ok(ReachCriterion::WorstBin),
            _ => Err(Error::InvalidSetting(format!("unknown reach criterion {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachSettings {
    pub target_ber: f64,
    pub mode: VarianceMode,
    pub include_ici: bool,
    pub convention: BerConvention,
    pub criterion: ReachCriterion,
    /// Upper end of the search interval, meters.
    pub max_length: f64,
    /// Bisection stops once the bracket is narrower than this, meters.
    pub resolution: f64,
}

impl Default for ReachSettings {
    fn default() -> Self {
        ReachSettings {
            target_ber: 1e-4,
            mode: VarianceMode::PaperLinear,
            include_ici: false,
            convention: BerConvention::AsPrinted,
            criterion: ReachCriterion::WorstBin,
            max_length: 2000e3,
            resolution: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reach {
    /// Meters.
    pub length: f64,
    /// The criterion never exceeded the target inside the search interval.
    pub saturated: bool,
}

/// BER figure of merit that `solve_reach` compares against the target.
pub fn criterion_ber(params: &SystemParams, length: f64, settings: &ReachSettings) -> Result<f64> {
    let report = band_ber(
        params,
        length,
        settings.mode,
        settings.include_ici,
        settings.convention,
    )?;
    Ok(match settings.criterion {
        ReachCriterion::BandAverage => report.band_ber,
        ReachCriterion::WorstBin => report.worst_bin_ber(),
    })
}

/// Largest length whose BER criterion stays at or below the target, found
/// by bisection on `[0, max_length]`.
pub fn solve_reach(params: &SystemParams, settings: &ReachSettings) -> Result<Reach> {
    let target = settings.target_ber;
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::TargetOutOfRange(target));
    }
    if !(settings.max_length > 0.0 && settings.resolution > 0.0) {
        return Err(Error::InvalidSetting(
            "reach search needs positive max_length and resolution".into(),
        ));
    }
    let meets = |l: f64| criterion_ber(params, l, settings).map(|b| b <= target);
    if meets(settings.max_length)? {
        return Ok(Reach {
            length: settings.max_length,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0.0, settings.max_length);
    while hi - lo > settings.resolution {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Reach {
        length: lo,
        saturated: false,
    })
}
