//! One OFDM symbol through the transmitter, the dispersive fiber, pilot
//! cancellation, and the correlation receiver.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::{bin_delay, dispersion_delay};
use crate::error::{Error, Result};
use crate::model::SystemParams;

use super::wiener::WienerPath;

/// Received data samples and the matching pilot samples over one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSymbol {
    pub data: Vec<Complex64>,
    pub pilot: Vec<Complex64>,
    /// Per bin, `(1/M)·Σ_i exp(j(ψ(t_i + d_k) − ψ(t_i)))`: the factor the
    /// bin's own symbol is scaled by after pilot cancellation.
    pub cpe_factors: Vec<Complex64>,
}

/// `exp(j2πm/M)` for `m = 0..M`, indexed modulo `M`.
#[derive(Debug, Clone)]
pub(crate) struct Twiddles {
    table: Vec<Complex64>,
}

impl Twiddles {
    pub(crate) fn new(m: usize) -> Self {
        let table = (0..m)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64))
            .collect();
        Twiddles { table }
    }

    /// `exp(j2π·k·i/M)` for `i = 0..M`, exact in the index arithmetic.
    pub(crate) fn row(&self, k: i64) -> impl Iterator<Item = Complex64> + '_ {
        let m = self.table.len();
        let stride = k.rem_euclid(m as i64) as usize;
        let mut idx = 0usize;
        (0..m).map(move |_| {
            let w = self.table[idx];
            idx += stride;
            if idx >= m {
                idx -= m;
            }
            w
        })
    }
}

/// Dispersion delay of every data bin, in `bin_indices` order.
pub fn bin_delays(params: &SystemParams, length: f64) -> Result<Vec<f64>> {
    let tau = dispersion_delay(params, length);
    params
        .bin_indices()
        .into_iter()
        .map(|k| bin_delay(params, k, tau))
        .collect()
}

fn check_oversampling(params: &SystemParams, samples_per_symbol: usize) -> Result<()> {
    if samples_per_symbol < 4 * params.n_bins() {
        return Err(Error::InvalidSetting(format!(
            "samples_per_symbol = {samples_per_symbol} is below 4N = {}",
            4 * params.n_bins()
        )));
    }
    Ok(())
}

/// Samples `t_i = i·T/M` of
/// `Σ_k a_k·exp(j2πk t/T)·exp(jψ(t + d_k))` and of the pilot `exp(jψ(t))`.
///
/// `symbols` follows `params.bin_indices()` order. Bins sharing a delay
/// (±k in CO) share one phase-rotation vector.
pub fn synthesize_received(
    params: &SystemParams,
    symbols: &[Complex64],
    path: &WienerPath,
    length: f64,
    samples_per_symbol: usize,
) -> Result<ReceivedSymbol> {
    let twiddles = Twiddles::new(samples_per_symbol);
    synthesize_with(params, symbols, path, length, samples_per_symbol, &twiddles)
}

pub(crate) fn synthesize_with(
    params: &SystemParams,
    symbols: &[Complex64],
    path: &WienerPath,
    length: f64,
    samples_per_symbol: usize,
    twiddles: &Twiddles,
) -> Result<ReceivedSymbol> {
    check_oversampling(params, samples_per_symbol)?;
    let bins = params.bin_indices();
    if symbols.len() < bins.len() {
        return Err(Error::MissingSymbol(bins[symbols.len()]));
    }
    if symbols.len() > bins.len() {
        return Err(Error::LengthMismatch {
            expected: bins.len(),
            got: symbols.len(),
        });
    }
    let delays = bin_delays(params, length)?;
    let m = samples_per_symbol;
    let step = params.symbol_time() / m as f64;
    let d_max = delays.iter().copied().fold(0.0, f64::max);
    let need = step * (m - 1) as f64 + d_max;
    if path.span() < need * (1.0 - 1e-12) {
        return Err(Error::SpanTooShort {
            have: path.span(),
            need,
        });
    }

    let pilot: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(1.0, path.interpolate(i as f64 * step)))
        .collect();

    let mut data = vec![Complex64::new(0.0, 0.0); m];
    let mut cpe_factors = vec![Complex64::new(0.0, 0.0); bins.len()];
    let mut order: Vec<usize> = (0..bins.len()).collect();
    order.sort_by(|&a, &b| delays[a].total_cmp(&delays[b]));
    let mut rotation = vec![Complex64::new(0.0, 0.0); m];
    let mut current: Option<(f64, Complex64)> = None;
    for idx in order {
        let d = delays[idx];
        let cpe = match current {
            Some((cd, cpe)) if cd == d => cpe,
            _ => {
                for (i, rot) in rotation.iter_mut().enumerate() {
                    *rot = Complex64::from_polar(1.0, path.interpolate(i as f64 * step + d));
                }
                let cpe = rotation.iter().zip(&pilot).map(|(r, p)| r * p.conj()).sum::<Complex64>()
                    / m as f64;
                current = Some((d, cpe));
                cpe
            }
        };
        cpe_factors[idx] = cpe;
        let (k, a) = (bins[idx], symbols[idx]);
        for ((out, rot), w) in data.iter_mut().zip(&rotation).zip(twiddles.row(k)) {
            *out += a * w * rot;
        }
    }
    Ok(ReceivedSymbol {
        data,
        pilot,
        cpe_factors,
    })
}

/// Multiplies by the conjugated, magnitude-normalized pilot.
pub fn pilot_cancel(received: &[Complex64], pilot: &[Complex64]) -> Result<Vec<Complex64>> {
    if received.len() != pilot.len() {
        return Err(Error::LengthMismatch {
            expected: received.len(),
            got: pilot.len(),
        });
    }
    received
        .iter()
        .zip(pilot)
        .enumerate()
        .map(|(i, (r, p))| {
            let mag = p.norm();
            if mag == 0.0 || !mag.is_finite() {
                return Err(Error::ZeroPilotSample(i));
            }
            Ok(r * p.conj() / mag)
        })
        .collect()
}

/// Discrete correlation `(1/M)·Σ_i x(t_i)·exp(−j2πk t_i/T)` over one symbol.
pub fn demod_bin(corrected: &[Complex64], k: i64, samples_per_symbol: usize) -> Result<Complex64> {
    if corrected.len() != samples_per_symbol || samples_per_symbol == 0 {
        return Err(Error::LengthMismatch {
            expected: samples_per_symbol,
            got: corrected.len(),
        });
    }
    let twiddles = Twiddles::new(samples_per_symbol);
    Ok(demod_with(corrected, k, &twiddles))
}

pub(crate) fn demod_with(corrected: &[Complex64], k: i64, twiddles: &Twiddles) -> Complex64 {
    let m = corrected.len();
    let acc: Complex64 = corrected.iter().zip(twiddles.row(-k)).map(|(x, w)| x * w).sum();
    acc / m as f64
}
