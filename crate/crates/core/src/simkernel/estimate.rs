//! Monte-Carlo estimators over independent seeded trials.
//!
//! Trial `t` draws from `trial_rng(seed, t)`. Trials run in parallel in
//! fixed-size chunks whose partial sums are merged in chunk order, so every
//! result is bit-identical for a given seed regardless of thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::bin_delay;
use crate::analytic::dispersion_delay;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::model::SystemParams;

use super::ofdm::{bin_delays, demod_with, pilot_cancel, synthesize_with, Twiddles};
use super::wiener::{trial_rng, WienerPath};

/// Wiener grid steps per symbol period.
pub const DEFAULT_STEPS_PER_SYMBOL: usize = 4096;

const CHUNK: u64 = 64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Sum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// First four raw moments of a scalar sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    s1: Sum,
    s2: Sum,
    s3: Sum,
    s4: Sum,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let x2 = x * x;
        self.s1.add(x);
        self.s2.add(x2);
        self.s3.add(x2 * x);
        self.s4.add(x2 * x2);
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.s1.merge(&o.s1);
        self.s2.merge(&o.s2);
        self.s3.merge(&o.s3);
        self.s4.merge(&o.s4);
    }

    /// Unbiased sample variance and the standard error of that estimate,
    /// `√((m4 − m2²)/n)` with central moments `m2`, `m4`.
    fn variance(&self) -> Estimate {
        if self.n < 2 {
            return Estimate { value: 0.0, stderr: 0.0 };
        }
        let n = self.n as f64;
        let mean = self.s1.value() / n;
        let e2 = self.s2.value() / n;
        let e3 = self.s3.value() / n;
        let e4 = self.s4.value() / n;
        let m2 = (e2 - mean * mean).max(0.0);
        let m4 = (e4 - 4.0 * mean * e3 + 6.0 * mean * mean * e2 - 3.0 * mean.powi(4)).max(0.0);
        Estimate {
            value: m2 * n / (n - 1.0),
            stderr: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        }
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Runs `trials` in fixed chunks and merges the per-chunk accumulators in order.
fn chunked<A, F, M>(trials: u64, init: impl Fn() -> A + Sync, run: F, merge: M) -> Result<A>
where
    A: Send,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, &A),
{
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Result<A>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                run(&mut acc, t)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for p in partial {
        merge(&mut total, &p?);
    }
    Ok(total)
}

/// Trapezoidal `(1/T)∫₀ᵀ ψ(t) − ψ(t + d) dt` on the path's own grid.
fn averaged_difference(path: &WienerPath, delay: f64, steps: usize) -> f64 {
    let dt = path.dt();
    let s = path.samples();
    let mut acc = 0.0;
    for (j, &psi) in s[..=steps].iter().enumerate() {
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        let t = j as f64 * dt;
        acc += w * (psi - path.interpolate(t + delay));
    }
    acc / steps as f64
}

/// Empirical variance of the symbol-averaged phase difference at a given delay.
pub fn estimate_filtered_variance(
    linewidth: f64,
    delay: f64,
    symbol_time: f64,
    steps_per_symbol: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if steps_per_symbol == 0 {
        return Err(Error::InvalidSetting("steps_per_symbol must be positive".into()));
    }
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(Error::NegativeQuantity { name: "delay", value: delay });
    }
    if delay == 0.0 {
        return Ok(Estimate { value: 0.0, stderr: 0.0 });
    }
    let dt = symbol_time / steps_per_symbol as f64;
    let moments = chunked(
        trials,
        Moments::default,
        |acc, t| {
            let mut rng = trial_rng(seed, t);
            let path = WienerPath::generate(linewidth, dt, symbol_time + delay, &mut rng)?;
            acc.push(averaged_difference(&path, delay, steps_per_symbol));
            Ok(())
        },
        Moments::merge,
    )?;
    Ok(moments.variance())
}

/// Monte-Carlo CPE variance of bin `k`, to compare with the closed forms.
pub fn estimate_cpe_variance(
    params: &SystemParams,
    k: i64,
    length: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials < 1000 {
        return Err(Error::InvalidSetting(format!(
            "CPE estimation needs at least 1000 trials, got {trials}"
        )));
    }
    let delay = bin_delay(params, k, dispersion_delay(params, length))?;
    estimate_filtered_variance(
        params.effective_linewidth(),
        delay,
        params.symbol_time(),
        DEFAULT_STEPS_PER_SYMBOL,
        trials,
        seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McSettings {
    pub trials: u64,
    pub samples_per_symbol: usize,
    pub steps_per_symbol: usize,
    pub seed: u64,
}

impl McSettings {
    /// `M = 4N` samples per symbol, `T/4096` Wiener grid.
    pub fn for_params(params: &SystemParams, trials: u64, seed: u64) -> Self {
        McSettings {
            trials,
            samples_per_symbol: 4 * params.n_bins(),
            steps_per_symbol: DEFAULT_STEPS_PER_SYMBOL,
            seed,
        }
    }
}

/// Per-bin Monte-Carlo statistics.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BinMetrics {
    pub k: i64,
    pub delay: f64,
    /// Variance of `arg(r_k / a_k)`: CPE and ICI together.
    pub phase_var: Estimate,
    /// Variance of `arg((1/M)·Σ exp(j(ψ(t_i + d_k) − ψ(t_i))))`, the CPE alone.
    pub cpe_var: Estimate,
    /// Variance of the remainder `arg(r_k / a_k)` minus the CPE phase.
    pub ici_var: Estimate,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub symbols: u64,
}

impl BinMetrics {
    pub fn ber(&self, bits_per_symbol: u32) -> f64 {
        self.bit_errors as f64 / (self.symbols * bits_per_symbol as u64) as f64
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrialMetrics {
    pub trials: u64,
    pub per_bin: Vec<BinMetrics>,
    /// RMS error vector over all bins and trials, relative to RMS symbol magnitude.
    pub evm: f64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub symbols_sent: u64,
    pub bits_sent: u64,
}

#[derive(Debug, Clone, Default)]
struct BinAcc {
    phase: Moments,
    cpe: Moments,
    ici: Moments,
    symbol_errors: u64,
    bit_errors: u64,
}

#[derive(Debug, Clone)]
struct TrialAcc {
    bins: Vec<BinAcc>,
    err_power: Sum,
    sig_power: Sum,
}

impl TrialAcc {
    fn new(n: usize) -> Self {
        TrialAcc {
            bins: vec![BinAcc::default(); n],
            err_power: Sum::default(),
            sig_power: Sum::default(),
        }
    }

    fn merge(&mut self, o: &TrialAcc) {
        for (a, b) in self.bins.iter_mut().zip(&o.bins) {
            a.phase.merge(&b.phase);
            a.cpe.merge(&b.cpe);
            a.ici.merge(&b.ici);
            a.symbol_errors += b.symbol_errors;
            a.bit_errors += b.bit_errors;
        }
        self.err_power.merge(&o.err_power);
        self.sig_power.merge(&o.sig_power);
    }
}

fn wrap(phase: f64) -> f64 {
    use std::f64::consts::PI;
    (phase + PI).rem_euclid(2.0 * PI) - PI
}

/// End-to-end simulation: random symbols on every bin, one laser path per
/// trial, pilot cancellation, correlation demodulation, hard decisions.
pub fn run_trials(params: &SystemParams, length: f64, settings: &McSettings) -> Result<TrialMetrics> {
    if settings.trials == 0 {
        return Err(Error::InvalidSetting("at least one trial is required".into()));
    }
    if settings.steps_per_symbol == 0 {
        return Err(Error::InvalidSetting("steps_per_symbol must be positive".into()));
    }
    let constellation = Constellation::new(params.modulation())?;
    let bins = params.bin_indices();
    let delays = bin_delays(params, length)?;
    let m = settings.samples_per_symbol;
    let twiddles = Twiddles::new(m);
    let t_sym = params.symbol_time();
    let dt = t_sym / settings.steps_per_symbol as f64;
    let span = t_sym + delays.iter().copied().fold(0.0, f64::max);
    let linewidth = params.effective_linewidth();
    let acc = chunked(
        settings.trials,
        || TrialAcc::new(bins.len()),
        |acc, t| {
            let mut rng = trial_rng(settings.seed, t);
            let sent: Vec<usize> = (0..bins.len())
                .map(|_| rng.random_range(0..constellation.len()))
                .collect();
            let symbols: Vec<_> = sent.iter().map(|&i| constellation.points()[i]).collect();
            let path = WienerPath::generate(linewidth, dt, span, &mut rng)?;
            let rx = synthesize_with(params, &symbols, &path, length, m, &twiddles)?;
            let corrected = pilot_cancel(&rx.data, &rx.pilot)?;
            for (b, (&k, (&a, &s))) in bins.iter().zip(symbols.iter().zip(&sent)).enumerate() {
                let r = demod_with(&corrected, k, &twiddles);
                let phase_err = (r / a).arg();
                let cpe_phase = rx.cpe_factors[b].arg();
                let decided = constellation.nearest_symbol(r)?;
                let slot = &mut acc.bins[b];
                slot.phase.push(phase_err);
                slot.cpe.push(cpe_phase);
                slot.ici.push(wrap(phase_err - cpe_phase));
                if decided != s {
                    slot.symbol_errors += 1;
                    slot.bit_errors += constellation.bit_errors(s, decided)? as u64;
                }
                acc.err_power.add((r - a).norm_sqr());
                acc.sig_power.add(a.norm_sqr());
            }
            Ok(())
        },
        TrialAcc::merge,
    )?;

    let bps = constellation.bits_per_symbol() as u64;
    let per_bin: Vec<BinMetrics> = bins
        .iter()
        .zip(&delays)
        .zip(&acc.bins)
        .map(|((&k, &delay), b)| BinMetrics {
            k,
            delay,
            phase_var: b.phase.variance(),
            cpe_var: b.cpe.variance(),
            ici_var: b.ici.variance(),
            symbol_errors: b.symbol_errors,
            bit_errors: b.bit_errors,
            symbols: settings.trials,
        })
        .collect();
    let symbol_errors = per_bin.iter().map(|b| b.symbol_errors).sum();
    let bit_errors = per_bin.iter().map(|b| b.bit_errors).sum();
    let symbols_sent = settings.trials * bins.len() as u64;
    Ok(TrialMetrics {
        trials: settings.trials,
        per_bin,
        evm: (acc.err_power.value() / acc.sig_power.value()).sqrt(),
        symbol_errors,
        bit_errors,
        symbols_sent,
        bits_sent: symbols_sent * bps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::filtered_variance;
    use crate::model::{LinkSpec, ModulationScheme, SystemKind, VarianceMode};

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let mut s = Sum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn moments_of_known_sample() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        let v = m.variance();
        assert!((v.value - 5.0 / 3.0).abs() < 1e-14);
        // central m2 = 1.25, m4 = 2.5625 → √((2.5625 − 1.5625)/4) = 0.5
        assert!((v.stderr - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_delay_estimate() {
        let e = estimate_filtered_variance(4e6, 0.0, 1e-9, 4096, 10, 1).unwrap();
        assert_eq!(e, Estimate { value: 0.0, stderr: 0.0 });
        let p = LinkSpec::reference(SystemKind::Co, ModulationScheme::psk(4).unwrap())
            .validate()
            .unwrap();
        let e = estimate_cpe_variance(&p, 100, 0.0, 1000, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(estimate_cpe_variance(&p, 100, 0.0, 999, 1).is_err());
    }

    #[test]
    fn short_delay_estimate_tracks_exact_form() {
        let t = 1e-9;
        let d = 0.25 * t;
        let e = estimate_filtered_variance(4e6, d, t, 1024, 4000, 21).unwrap();
        let want = filtered_variance(4e6, d, t, VarianceMode::ExactFiltered);
        assert!((e.value - want).abs() < 3.0 * e.stderr, "{e:?} vs {want}");
    }

    #[test]
    fn small_run_is_consistent() {
        let p = LinkSpec {
            n_bins: 8,
            ..LinkSpec::reference(SystemKind::Dd, ModulationScheme::qam(16).unwrap())
        }
        .validate()
        .unwrap();
        let s = McSettings { trials: 70, samples_per_symbol: 32, steps_per_symbol: 256, seed: 5 };
        let m = run_trials(&p, 400e3, &s).unwrap();
        assert_eq!(m.symbols_sent, 70 * 8);
        assert_eq!(m.bits_sent, 70 * 8 * 4);
        assert!(m.bit_errors <= m.symbol_errors * 4);
        assert!(m.bit_errors >= m.symbol_errors);
        assert_eq!(m.per_bin.len(), 8);
        assert_eq!(m, run_trials(&p, 400e3, &s).unwrap());
    }
}
