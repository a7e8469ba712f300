use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Sampled laser phase `ψ(i·dt)` on `[0, span]`, pinned to `ψ(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    dt: f64,
    samples: Vec<f64>,
    seed: Option<u64>,
}

/// Independent RNG stream for one trial of a seeded campaign.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Wiener phase with increment variance `2πΔν·dt`, seeded.
pub fn wiener_path(linewidth: f64, dt: f64, span: f64, seed: u64) -> Result<WienerPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = WienerPath::generate(linewidth, dt, span, &mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

impl WienerPath {
    /// Draws a path from `rng`. The grid covers at least `span`.
    pub fn generate<R: Rng + ?Sized>(linewidth: f64, dt: f64, span: f64, rng: &mut R) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        if !(span.is_finite() && span >= 0.0) {
            return Err(Error::NegativeQuantity { name: "span", value: span });
        }
        if !(linewidth.is_finite() && linewidth >= 0.0) {
            return Err(Error::NegativeLinewidth { name: "linewidth", value: linewidth });
        }
        // small slack so that span = n·dt is not lost to rounding
        let steps = (span / dt * (1.0 - 1e-12)).ceil() as usize;
        let sigma = (2.0 * PI * linewidth * dt).sqrt();
        let mut samples = Vec::with_capacity(steps + 1);
        samples.push(0.0);
        let mut psi = 0.0;
        if sigma == 0.0 {
            samples.resize(steps + 1, 0.0);
        } else {
            for _ in 0..steps {
                let z: f64 = rng.sample(StandardNormal);
                psi += sigma * z;
                samples.push(psi);
            }
        }
        Ok(WienerPath { dt, samples, seed: None })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Last covered time.
    pub fn span(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation between the neighboring grid samples.
    pub fn sample_phase(&self, t: f64) -> Result<f64> {
        let span = self.span();
        if !(t >= 0.0 && t <= span * (1.0 + 1e-12)) {
            return Err(Error::OutOfSpan { t, span });
        }
        Ok(self.interpolate(t))
    }

    /// Unchecked variant for hot loops; `t` must lie inside the span.
    #[inline]
    pub(crate) fn interpolate(&self, t: f64) -> f64 {
        let x = t / self.dt;
        let last = self.samples.len() - 1;
        let i = (x.floor() as usize).min(last);
        if i == last {
            return self.samples[last];
        }
        let frac = x - i as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }
}
