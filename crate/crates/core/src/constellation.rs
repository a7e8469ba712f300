//! Unit-power PSK and square-QAM constellations with Gray labels and
//! minimum-distance hard decisions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModulationFamily, ModulationScheme};

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    scheme: ModulationScheme,
    points: Vec<Complex64>,
    labels: Vec<u32>,
}

impl Constellation {
    /// Builds the point set for `scheme`, normalized to unit mean power.
    ///
    /// PSK point `i` sits at angle `2πi/n` with label `gray(i)`. QAM point
    /// `i` is column `i % m`, row `i / m` of an `m × m` grid with odd integer
    /// coordinates; its label concatenates the Gray codes of row and column.
    pub fn new(scheme: ModulationScheme) -> Result<Self> {
        let scheme = ModulationScheme::new(scheme.family(), scheme.order())?;
        let order = scheme.order();
        let (points, labels): (Vec<_>, Vec<_>) = match scheme.family() {
            ModulationFamily::Psk => (0..order)
                .map(|i| {
                    let angle = 2.0 * PI * i as f64 / order as f64;
                    (Complex64::from_polar(1.0, angle), gray(i))
                })
                .unzip(),
            ModulationFamily::Qam => {
                let side = 1u32 << (scheme.bits_per_symbol() / 2);
                let half_bits = scheme.bits_per_symbol() / 2;
                let level = |j: u32| 2.0 * j as f64 - (side as f64 - 1.0);
                let raw: Vec<_> = (0..order)
                    .map(|i| {
                        let (col, row) = (i % side, i / side);
                        let z = Complex64::new(level(col), level(row));
                        (z, (gray(row) << half_bits) | gray(col))
                    })
                    .collect();
                let mean = raw.iter().map(|(z, _)| z.norm_sqr()).sum::<f64>() / order as f64;
                let scale = mean.sqrt().recip();
                raw.into_iter().map(|(z, l)| (z * scale, l)).unzip()
            }
        };
        Ok(Constellation {
            scheme,
            points,
            labels,
        })
    }

    pub fn scheme(&self) -> ModulationScheme {
        self.scheme
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.scheme.bits_per_symbol()
    }

    pub fn power_stats(&self) -> PowerStats {
        let mut stats = PowerStats {
            mean: 0.0,
            min: f64::INFINITY,
            max: 0.0,
        };
        for p in &self.points {
            let pw = p.norm_sqr();
            stats.mean += pw;
            stats.min = stats.min.min(pw);
            stats.max = stats.max.max(pw);
        }
        stats.mean /= self.points.len() as f64;
        stats
    }

    /// Index of the closest point; ties go to the lowest index.
    pub fn nearest_symbol(&self, z: Complex64) -> Result<usize> {
        if !z.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// Hamming distance between the labels of two points.
    pub fn bit_errors(&self, sent: usize, decided: usize) -> Result<u32> {
        let size = self.len();
        for index in [sent, decided] {
            if index >= size {
                return Err(Error::IndexOutOfRange { index, size });
            }
        }
        Ok((self.labels[sent] ^ self.labels[decided]).count_ones())
    }
}
