//! Error-rate analysis: the Gaussian tail, pairwise error probabilities, the
//! union bound on BER and the Monte Carlo harness ([`montecarlo`]).
//!
//! Simulation and bound share one noise convention: `N` has variance `N0 / 2`
//! per entry and `N0` follows from the Eb/N0 grid via
//! [`crate::channel::ebn0_to_n0`].

pub mod montecarlo;

pub use montecarlo::{
    simulate_curve, simulate_point, write_ber_csv, write_bound_csv, BaselineLink, BerRecord, BlockOutcome, Link,
    McConfig, PmDetector, PmLink, PointStats,
};

use serde::Serialize;

use crate::channel::{ebn0_to_n0, SignalEnergy};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::{transmit_matrix, PamConfig};

/// Gaussian tail `Q(r) = erfc(r / sqrt 2) / 2`.
pub fn qfunc(r: f64) -> f64 {
    0.5 * libm::erfc(r / std::f64::consts::SQRT_2)
}

/// `Q(sqrt(Es / (2 N0) ||H (S - S_hat)||^2))`.
pub fn pairwise_error_prob(s: &Mat, s_hat: &Mat, h: &Mat, es: f64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0) {
        return Err(Error::InvalidPam(format!("N0 must be positive, got {n0}")));
    }
    let d2 = h.matmul(&s.sub(s_hat)?)?.frobenius_sq();
    Ok(qfunc((es / (2.0 * n0) * d2).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub scheme: String,
    pub ebn0_db: Vec<f64>,
    pub values: Vec<f64>,
}

/// Pairwise distance table of a signaling set: `(Hamming distance between
/// labels, ||H (S1 - S2)||^2)` for every ordered pair of distinct labels.
#[derive(Debug, Clone)]
pub struct DistanceSpectrum {
    labels: u64,
    bits: u32,
    pairs: Vec<(u32, f64)>,
}

impl DistanceSpectrum {
    pub fn new(codebook: &Codebook, pam: &PamConfig, h: &Mat) -> Result<Self> {
        let levels = pam.levels();
        let labels = codebook.signaling_points(levels);
        let bits = codebook.bits_per_block(levels);
        let images = (0..labels)
            .map(|k| {
                let (q, m) = codebook.label_to_entry(k, levels)?;
                h.matmul(&transmit_matrix(codebook, pam, q, m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::new();
        for a in 0..labels {
            for b in 0..labels {
                if a != b {
                    let d2 = images[a as usize].sub(&images[b as usize])?.frobenius_sq();
                    pairs.push(((a ^ b).count_ones(), d2));
                }
            }
        }
        Ok(Self { labels, bits, pairs })
    }

    /// Smallest `||H (S1 - S2)||^2` over distinct pairs.
    pub fn min_distance_sq(&self) -> f64 {
        self.pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    /// Union bound at one noise level; see [`ber_union_bound`].
    pub fn bound_at(&self, n0: f64) -> f64 {
        let sum: f64 = self
            .pairs
            .iter()
            .map(|&(d, d2)| d as f64 * qfunc((d2 / (2.0 * n0)).sqrt()))
            .sum();
        sum / (self.labels as f64 * self.bits as f64)
    }
}

/// Union bound on ML bit error rate over the signaling set.
///
/// `1/(N b) sum_{k1 != k2} d_H(k1, k2) Q(sqrt(||H (S_k1 - S_k2)||^2 / (2 N0)))`
/// with N signaling labels of b bits each.
pub fn ber_union_bound(
    scheme: &str,
    codebook: &Codebook,
    pam: &PamConfig,
    h: &Mat,
    ebn0_grid: &[f64],
    energy: SignalEnergy,
) -> Result<BoundCurve> {
    let spectrum = DistanceSpectrum::new(codebook, pam, h)?;
    let es = energy.symbol_energy(pam.mean_power());
    let values = ebn0_grid
        .iter()
        .map(|&db| spectrum.bound_at(ebn0_to_n0(db, es, spectrum.bits)))
        .collect();
    Ok(BoundCurve { scheme: scheme.to_string(), ebn0_db: ebn0_grid.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixture_h02;
    use crate::codebook::enumerate_weight_w;

    #[test]
    fn qfunc_identities() {
        assert_eq!(qfunc(0.0), 0.5);
        for r in [0.1, 0.7, 1.9, 4.2] {
            assert!((qfunc(-r) - (1.0 - qfunc(r))).abs() < 1e-15);
        }
    }

    #[test]
    fn pep_of_identical_blocks_is_half() {
        let s = Mat::identity(4);
        assert_eq!(pairwise_error_prob(&s, &s, &Mat::identity(4), 1.0, 0.3).unwrap(), 0.5);
        assert!(pairwise_error_prob(&s, &s, &Mat::identity(4), 1.0, 0.0).is_err());
    }

    #[test]
    fn bound_is_nonincreasing() {
        let cb = enumerate_weight_w(4, 1).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| 90.0 + 2.0 * k as f64).collect();
        let curve =
            ber_union_bound("p", &cb, &PamConfig::unit(), fixture_h02().gains(), &grid, SignalEnergy::default())
                .unwrap();
        for w in curve.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(curve.values.iter().all(|&v| v >= 0.0));
    }
}
