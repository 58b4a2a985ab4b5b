//! Receivers for permutation-modulated blocks.
//!
//! * [`ml_detect`]: minimum Frobenius distance with known channel.
//! * [`bf_sd_detect`], [`iterative_sd_detect`]: channel-free soft decisions
//!   over the negated received block `Y_hat = -Y`.
//! * [`bb_detect`]: single-survivor tree search over weight-1 blocks.
//! * [`baseline`]: repetition coding and spatial modulation references.

pub mod baseline;
mod bb;
mod sd;

pub use bb::{bb_detect, bb_exact, bb_search, BbConfig, BbResult};
pub use sd::{
    bf_sd_detect, classify_weight, entry_cost, estimate_intensity, iterative_sd_detect, soft_costs, Calibration,
    SdConfig, SdDecoder, WeightMode,
};

use std::fmt;
use std::str::FromStr;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::{transmit_matrix, PamConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// 0-based codebook entry.
    pub entry: usize,
    /// Intensity level, `1..=M`.
    pub level: usize,
    pub weight: usize,
    /// Signaling label, `None` when `(entry, level)` lies outside the
    /// power-of-two signaling set.
    pub label: Option<u64>,
    pub bits: Option<Vec<u8>>,
    /// Value of the detector's decision metric for the chosen block.
    pub cost: f64,
    /// Assignments drawn (iterative detector only).
    pub iterations: usize,
    /// Elementary cost evaluations spent on this block.
    pub op_count: u64,
}

impl DetectionResult {
    pub(crate) fn new(
        codebook: &Codebook,
        pam: &PamConfig,
        entry: usize,
        level: usize,
        cost: f64,
        op_count: u64,
    ) -> Self {
        Self {
            entry,
            level,
            weight: codebook.entry(entry).weight(),
            label: codebook.entry_to_label(entry, level, pam.levels()).ok(),
            bits: codebook.entry_to_bits(entry, level, pam.levels()).ok(),
            cost,
            iterations: 0,
            op_count,
        }
    }
}

/// Side information granted to the receiver for one block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SideInfo {
    pub true_weight: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Ml,
    BfSd,
    IterativeSd,
    BranchAndBound,
    RandomGuess,
}

impl DetectorKind {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Ml => "ml",
            Self::BfSd => "bf-sd",
            Self::IterativeSd => "iter-sd",
            Self::BranchAndBound => "bb",
            Self::RandomGuess => "random",
        }
    }

    pub fn needs_csi(&self) -> bool {
        matches!(self, Self::Ml)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ml" => Self::Ml,
            "bf-sd" | "bf" => Self::BfSd,
            "iter-sd" | "iterative" | "sd" => Self::IterativeSd,
            "bb" => Self::BranchAndBound,
            "random" => Self::RandomGuess,
            other => return Err(Error::Scenario(format!("unknown detector `{other}`"))),
        })
    }
}

/// ML detector with the candidate images `H S` precomputed.
#[derive(Debug, Clone)]
pub struct MlDetector {
    codebook: Codebook,
    pam: PamConfig,
    /// (entry, level, H S, ||H S||^2) per signaling label.
    candidates: Vec<(usize, usize, Mat, f64)>,
}

impl MlDetector {
    pub fn new(channel: &Mat, codebook: &Codebook, pam: &PamConfig) -> Result<Self> {
        let levels = pam.levels();
        let candidates = (0..codebook.signaling_points(levels))
            .map(|label| {
                let (q, m) = codebook.label_to_entry(label, levels)?;
                let hs = channel.matmul(&transmit_matrix(codebook, pam, q, m)?)?;
                let energy = hs.frobenius_sq();
                Ok((q, m, hs, energy))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { codebook: codebook.clone(), pam: *pam, candidates })
    }

    pub fn detect(&self, y: &Mat) -> Result<DetectionResult> {
        let mut best = (f64::INFINITY, 0usize);
        let mut ops = 0u64;
        for (k, (_, _, hs, energy)) in self.candidates.iter().enumerate() {
            let metric = energy - 2.0 * y.dot(hs)?;
            ops += hs.as_slice().len() as u64;
            if metric < best.0 {
                best = (metric, k);
            }
        }
        let (q, m, _, _) = &self.candidates[best.1];
        let cost = best.0 + y.frobenius_sq();
        Ok(DetectionResult::new(&self.codebook, &self.pam, *q, *m, cost, ops))
    }
}

/// `argmin ||Y - H S||_F^2` over every signaling (entry, level); ties go to
/// the lowest (entry, level).
pub fn ml_detect(y: &Mat, channel: &Mat, codebook: &Codebook, pam: &PamConfig) -> Result<DetectionResult> {
    MlDetector::new(channel, codebook, pam)?.detect(y)
}
