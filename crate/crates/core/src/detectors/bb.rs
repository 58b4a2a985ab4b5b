//! Single-survivor tree search for weight-1 blocks.
//!
//! The root is the empty path whose cost is the sum of all of `Y_hat`. Level
//! `e` assigns a column to row `e`; a child's cost is the path cost so far,
//! plus its own cell, plus every cell still reachable (later rows, columns not
//! yet used). Only the cheapest child survives, so the search is greedy and can
//! miss the optimum that [`bb_exact`] finds.

use crate::assignment::{hungarian, Assignment};
use crate::codebook::{Codebook, Codeword};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::PamConfig;

use super::sd::{entry_cost, estimate_intensity, soft_costs, Calibration};
use super::DetectionResult;

#[derive(Debug, Clone, PartialEq)]
pub struct BbConfig {
    pub calibration: Calibration,
    /// Map a non-member output to the cheapest codebook entry instead of
    /// reporting an erasure.
    pub nearest_fallback: bool,
}

impl Default for BbConfig {
    fn default() -> Self {
        Self { calibration: Calibration::Fixed(crate::channel::fixture_h02().mean_gain()), nearest_fallback: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbResult {
    /// Column chosen for each row along the surviving path.
    pub perm: Vec<usize>,
    /// `sum_i Y_hat[i][perm[i]]`.
    pub cost: f64,
    /// Node cost of the survivor at each level, root included.
    pub path: Vec<f64>,
    /// `None` when the path is not a codebook entry and no fallback applies.
    pub detection: Option<DetectionResult>,
    pub op_count: u64,
}

/// Survivor search over `Y_hat = -Y`.
pub fn bb_search(y_hat: &Mat) -> Result<(Vec<usize>, Vec<f64>, u64)> {
    if !y_hat.is_square() {
        return Err(Error::Shape(format!("received block must be square, got {}x{}", y_hat.rows(), y_hat.cols())));
    }
    let n = y_hat.rows();
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut path = vec![y_hat.sum()];
    let mut prefix = 0.0;
    let mut ops = (n * n) as u64;
    for row in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for t in (0..n).filter(|&t| !used[t]) {
            let mut rest = 0.0;
            for r in row + 1..n {
                for c in (0..n).filter(|&c| c != t && !used[c]) {
                    rest += y_hat[(r, c)];
                }
            }
            let remaining = n - row - 1;
            ops += (remaining * remaining + 1) as u64;
            let cost = prefix + y_hat[(row, t)] + rest;
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((t, cost));
            }
        }
        let (t, cost) = best.expect("a free column remains on every level");
        used[t] = true;
        perm.push(t);
        prefix += y_hat[(row, t)];
        path.push(cost);
    }
    Ok((perm, path, ops))
}

/// Tree-search detection of a weight-1 block.
pub fn bb_detect(y: &Mat, codebook: &Codebook, pam: &PamConfig, config: &BbConfig) -> Result<BbResult> {
    if codebook.is_multiweight() || codebook.weights_present() != [1] {
        return Err(Error::Unsupported {
            detector: "bb".into(),
            reason: "codebooks with matrices of weight above 1".into(),
        });
    }
    if y.rows() != codebook.len() {
        return Err(Error::LengthMismatch { expected: codebook.len(), got: y.rows() });
    }
    let y_hat = soft_costs(y);
    let (perm, path, mut ops) = bb_search(&y_hat)?;
    let cost = perm.iter().enumerate().map(|(i, &j)| y_hat[(i, j)]).sum();
    let found = Codeword::from_columns(&perm).ok().and_then(|c| codebook.position(&c.to_matrix()));
    let chosen = match found {
        Some(q) => Some((q, cost)),
        None if config.nearest_fallback => {
            let mut best = (usize::MAX, f64::INFINITY);
            for q in 0..codebook.size() {
                let c = entry_cost(&y_hat, codebook.entry(q));
                ops += codebook.len() as u64;
                if c < best.1 {
                    best = (q, c);
                }
            }
            Some(best)
        }
        None => None,
    };
    let detection = match chosen {
        Some((q, c)) => {
            let m = estimate_intensity(y, codebook.entry(q), pam, &config.calibration);
            Some(DetectionResult::new(codebook, pam, q, m, c, ops))
        }
        None => None,
    };
    Ok(BbResult { perm, cost, path, detection, op_count: ops })
}

/// Exact minimum-cost assignment on `Y_hat = -Y`, the reference for [`bb_detect`].
pub fn bb_exact(y: &Mat) -> Result<Assignment> {
    hungarian(&soft_costs(y))
}
