//! Channel-free soft-decision detection.
//!
//! Both detectors work on `Y_hat = -Y` and look for the codebook entry whose
//! support minimises `sum Y_hat[i][j] P[i][j]`, i.e. maximises the received
//! intensity collected on the entry's active positions. For a weight-w entry
//! the cost is the sum of its w component-codeword costs.

use std::collections::{BTreeSet, HashMap};

use crate::assignment::Murty;
use crate::codebook::{Codebook, CodewordMatrix};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::{transmit_matrix, PamConfig};

use super::{DetectionResult, SideInfo};

/// How a receiver of a multiweight codebook decides the weight class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// The true weight is handed over as side information.
    Genie,
    /// Thresholds on the received block energy; only informative when the
    /// classes carry different power, otherwise behaves as `JointCost`.
    Energy,
    /// Minimum `||Y - g S||^2` over all signaling blocks with a scalar gain g.
    JointCost,
}

/// Gain reference used for intensity estimation and weight classification.
#[derive(Debug, Clone, PartialEq)]
pub enum Calibration {
    /// A configured scalar gain (no channel knowledge).
    Fixed(f64),
    /// Exact channel knowledge.
    Csi(Mat),
}

impl Calibration {
    /// Scalar gain seen on the active positions of `entry`.
    fn gain_on(&self, entry: &CodewordMatrix) -> f64 {
        match self {
            Self::Fixed(g) => *g,
            Self::Csi(h) => {
                let p = entry.to_mat();
                let hp = h.matmul(&p).expect("channel and codeword sizes agree");
                let sum: f64 = entry.support().map(|(i, j)| hp[(i, j)]).sum();
                sum / (entry.weight() * entry.len()) as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdConfig {
    pub weight_mode: WeightMode,
    pub calibration: Calibration,
    /// Assignments drawn per block by the iterative detector; `None` means Q
    /// of the weight class.
    pub e_max: Option<usize>,
    /// Fall back to brute force when `e_max` runs out without a member.
    pub bf_fallback: bool,
}

impl Default for SdConfig {
    fn default() -> Self {
        Self {
            weight_mode: WeightMode::Genie,
            calibration: Calibration::Fixed(crate::channel::fixture_h02().mean_gain()),
            e_max: None,
            bf_fallback: true,
        }
    }
}

pub fn soft_costs(y: &Mat) -> Mat {
    y.neg()
}

/// Sum over the components of `entry` of `sum_i Y_hat[i][c(i)]`.
pub fn entry_cost(y_hat: &Mat, entry: &CodewordMatrix) -> f64 {
    entry
        .components()
        .iter()
        .map(|c| c.columns().enumerate().map(|(i, j)| y_hat[(i, j)]).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone)]
struct ClassTable {
    weight: usize,
    /// Entries of this weight, ascending.
    entries: Vec<usize>,
    /// Per component position: permutation (as columns) to entries using it.
    by_component: Vec<HashMap<Vec<usize>, Vec<usize>>>,
}

/// Soft-decision receiver with per-codebook lookup tables built once.
#[derive(Debug, Clone)]
pub struct SdDecoder {
    codebook: Codebook,
    pam: PamConfig,
    config: SdConfig,
    classes: Vec<ClassTable>,
}

impl SdDecoder {
    pub fn new(codebook: &Codebook, pam: &PamConfig, config: SdConfig) -> Result<Self> {
        if let Some(0) = config.e_max {
            return Err(Error::Scenario("e_max must be at least 1".into()));
        }
        let mut classes = Vec::new();
        for w in codebook.weights_present() {
            let entries: Vec<usize> = (0..codebook.size()).filter(|&q| codebook.entry(q).weight() == w).collect();
            let mut by_component = vec![HashMap::<Vec<usize>, Vec<usize>>::new(); w];
            for &q in &entries {
                for (k, c) in codebook.entry(q).components().iter().enumerate() {
                    by_component[k].entry(c.columns().collect()).or_default().push(q);
                }
            }
            classes.push(ClassTable { weight: w, entries, by_component });
        }
        Ok(Self { codebook: codebook.clone(), pam: *pam, config, classes })
    }

    pub fn config(&self) -> &SdConfig {
        &self.config
    }

    fn class_index(&self, y: &Mat, side: SideInfo, ops: &mut u64) -> Result<usize> {
        if self.classes.len() == 1 {
            return Ok(0);
        }
        let w = classify_with(y, &self.codebook, &self.pam, self.config.weight_mode, side, &self.config.calibration, ops)?;
        self.classes
            .iter()
            .position(|c| c.weight == w)
            .ok_or_else(|| Error::Scenario(format!("weight {w} is not signaled by this codebook")))
    }

    fn finish(&self, y: &Mat, entry: usize, cost: f64, ops: u64, iterations: usize) -> Result<DetectionResult> {
        let level = estimate_intensity(y, self.codebook.entry(entry), &self.pam, &self.config.calibration);
        let mut r = DetectionResult::new(&self.codebook, &self.pam, entry, level, cost, ops);
        r.iterations = iterations;
        Ok(r)
    }

    fn brute_force(&self, y_hat: &Mat, class: &ClassTable, ops: &mut u64) -> (usize, f64) {
        let mut best = (class.entries[0], f64::INFINITY);
        for &q in &class.entries {
            let cost = entry_cost(y_hat, self.codebook.entry(q));
            *ops += (class.weight * self.codebook.len()) as u64;
            if cost < best.1 {
                best = (q, cost);
            }
        }
        best
    }

    /// Exhaustive minimisation of the soft cost over the weight class.
    pub fn detect_bf(&self, y: &Mat, side: SideInfo) -> Result<DetectionResult> {
        let mut ops = 0;
        let class = &self.classes[self.class_index(y, side, &mut ops)?];
        let y_hat = soft_costs(y);
        let (q, cost) = self.brute_force(&y_hat, class, &mut ops);
        self.finish(y, q, cost, ops, 0)
    }

    /// Hungarian first, then Murty's ranking until a codebook member shows up.
    pub fn detect_iterative(&self, y: &Mat, side: SideInfo) -> Result<DetectionResult> {
        let mut ops = 0;
        let class = &self.classes[self.class_index(y, side, &mut ops)?];
        let y_hat = soft_costs(y);
        let e_max = self.config.e_max.unwrap_or(class.entries.len());
        let mut ranking = Murty::new(&y_hat)?;

        if class.weight == 1 {
            for e in 1..=e_max {
                let Some(a) = ranking.next() else { break };
                if let Some(qs) = class.by_component[0].get(&a.perm) {
                    let cost = entry_cost(&y_hat, self.codebook.entry(qs[0]));
                    return self.finish(y, qs[0], cost, ops + ranking.ops(), e);
                }
            }
        } else {
            // first member of each component codebook nominates its rows
            let mut found = vec![false; class.weight];
            let mut candidates = BTreeSet::new();
            let mut drawn = 0;
            while drawn < e_max && found.iter().any(|f| !f) {
                let Some(a) = ranking.next() else { break };
                drawn += 1;
                for (k, index) in class.by_component.iter().enumerate() {
                    if found[k] {
                        continue;
                    }
                    if let Some(qs) = index.get(&a.perm) {
                        found[k] = true;
                        candidates.extend(qs.iter().copied());
                    }
                }
            }
            ops += ranking.ops();
            if !candidates.is_empty() {
                let mut best = (usize::MAX, f64::INFINITY);
                for q in candidates {
                    let cost = entry_cost(&y_hat, self.codebook.entry(q));
                    ops += (class.weight * self.codebook.len()) as u64;
                    if cost < best.1 {
                        best = (q, cost);
                    }
                }
                return self.finish(y, best.0, best.1, ops, drawn);
            }
            if self.config.bf_fallback {
                let (q, cost) = self.brute_force(&y_hat, class, &mut ops);
                return self.finish(y, q, cost, ops, drawn);
            }
            return Err(Error::NoDecision { e_max });
        }

        ops += ranking.ops();
        let drawn = ranking.emitted();
        if self.config.bf_fallback {
            let (q, cost) = self.brute_force(&y_hat, class, &mut ops);
            return self.finish(y, q, cost, ops, drawn);
        }
        Err(Error::NoDecision { e_max })
    }
}

/// Brute-force soft decision; see [`SdDecoder::detect_bf`].
pub fn bf_sd_detect(
    y: &Mat,
    codebook: &Codebook,
    pam: &PamConfig,
    config: &SdConfig,
    side: SideInfo,
) -> Result<DetectionResult> {
    SdDecoder::new(codebook, pam, config.clone())?.detect_bf(y, side)
}

/// Iterative soft decision; see [`SdDecoder::detect_iterative`].
pub fn iterative_sd_detect(
    y: &Mat,
    codebook: &Codebook,
    pam: &PamConfig,
    config: &SdConfig,
    side: SideInfo,
) -> Result<DetectionResult> {
    SdDecoder::new(codebook, pam, config.clone())?.detect_iterative(y, side)
}

/// Intensity level for a decoded support: the collected intensity divided by
/// `w L g` is sliced to the nearest `I_m`; exact midpoints go to the lower
/// level.
pub fn estimate_intensity(y: &Mat, entry: &CodewordMatrix, pam: &PamConfig, calibration: &Calibration) -> usize {
    let allowed = pam.levels();
    if allowed <= 1 {
        return 1;
    }
    let collected: f64 = entry.support().map(|(i, j)| y[(i, j)]).sum();
    let gain = calibration.gain_on(entry);
    let estimate = collected / ((entry.weight() * entry.len()) as f64 * gain);
    let mut best = (1, f64::INFINITY);
    for m in 1..=allowed {
        let level = pam.intensity(m, entry.weight()).expect("level in range");
        let d = (estimate - level).abs();
        if d < best.1 {
            best = (m, d);
        }
    }
    best.0
}

/// Weight class of a received block from a multiweight codebook.
pub fn classify_weight(
    y: &Mat,
    codebook: &Codebook,
    pam: &PamConfig,
    mode: WeightMode,
    side: SideInfo,
    calibration: &Calibration,
) -> Result<usize> {
    let mut ops = 0;
    classify_with(y, codebook, pam, mode, side, calibration, &mut ops)
}

fn classify_with(
    y: &Mat,
    codebook: &Codebook,
    pam: &PamConfig,
    mode: WeightMode,
    side: SideInfo,
    calibration: &Calibration,
    ops: &mut u64,
) -> Result<usize> {
    let weights = codebook.weights_present();
    if weights.len() == 1 {
        return Ok(weights[0]);
    }
    match mode {
        WeightMode::Genie => side.true_weight.ok_or_else(|| Error::Unsupported {
            detector: "genie weight classifier".into(),
            reason: "blocks without side information".into(),
        }),
        WeightMode::Energy => {
            let sums = expected_block_sums(codebook, pam, calibration)?;
            let spread = sums.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
                - sums.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            let scale = sums.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
            if spread <= 1e-9 * scale {
                return classify_with(y, codebook, pam, WeightMode::JointCost, side, calibration, ops);
            }
            let total = y.sum();
            *ops += y.as_slice().len() as u64;
            let nearest = sums
                .iter()
                .min_by(|a, b| (a.1 - total).abs().total_cmp(&(b.1 - total).abs()))
                .expect("at least two classes");
            Ok(nearest.0)
        }
        WeightMode::JointCost => {
            let levels = pam.levels();
            let mut best = (f64::INFINITY, weights[0]);
            for label in 0..codebook.signaling_points(levels) {
                let (q, m) = codebook.label_to_entry(label, levels)?;
                let s = transmit_matrix(codebook, pam, q, m)?;
                let predicted = match calibration {
                    Calibration::Fixed(g) => s.scale(*g),
                    Calibration::Csi(h) => h.matmul(&s)?,
                };
                let d = y.sub(&predicted)?.frobenius_sq();
                *ops += y.as_slice().len() as u64;
                if d < best.0 {
                    best = (d, codebook.entry(q).weight());
                }
            }
            Ok(best.1)
        }
    }
}

/// Mean received block sum per weight class.
fn expected_block_sums(codebook: &Codebook, pam: &PamConfig, calibration: &Calibration) -> Result<Vec<(usize, f64)>> {
    let levels = pam.levels();
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    for label in 0..codebook.signaling_points(levels) {
        let (q, m) = codebook.label_to_entry(label, levels)?;
        let s = transmit_matrix(codebook, pam, q, m)?;
        let sum = match calibration {
            Calibration::Fixed(g) => g * s.sum(),
            Calibration::Csi(h) => h.matmul(&s)?.sum(),
        };
        let w = codebook.entry(q).weight();
        match out.iter_mut().find(|e| e.0 == w) {
            Some(e) => {
                e.1 += sum;
                e.2 += 1;
            }
            None => out.push((w, sum, 1)),
        }
    }
    Ok(out.into_iter().map(|(w, s, n)| (w, s / n as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixture_h02;
    use crate::codebook::{combine_codebooks, enumerate_weight_w};

    fn noiseless(h: &Mat, cb: &Codebook, pam: &PamConfig, q: usize, m: usize) -> Mat {
        h.matmul(&transmit_matrix(cb, pam, q, m).unwrap()).unwrap()
    }

    #[test]
    fn identity_channel_recovers_entry() {
        let cb = enumerate_weight_w(4, 1).unwrap();
        let pam = PamConfig::unit();
        let cfg = SdConfig::default();
        for q in 0..cb.signaling_points(1) as usize {
            let y = cb.entry(q).to_mat();
            assert_eq!(bf_sd_detect(&y, &cb, &pam, &cfg, SideInfo::default()).unwrap().entry, q);
            let it = iterative_sd_detect(&y, &cb, &pam, &cfg, SideInfo::default()).unwrap();
            assert_eq!(it.entry, q);
            assert_eq!(it.iterations, 1);
        }
    }

    #[test]
    fn fixture_diagonal_dominates_columns() {
        let h = fixture_h02();
        for j in 0..4 {
            for i in 0..4 {
                if i != j {
                    assert!(h.gains()[(j, j)] > h.gains()[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn intensity_single_level() {
        let cb = enumerate_weight_w(4, 1).unwrap();
        let y = Mat::zeros(4, 4);
        assert_eq!(estimate_intensity(&y, cb.entry(0), &PamConfig::unit(), &Calibration::Fixed(1.0)), 1);
    }

    #[test]
    fn intensity_csi_inversion() {
        let h = fixture_h02();
        let cb = combine_codebooks(&[enumerate_weight_w(4, 1).unwrap(), enumerate_weight_w(4, 2).unwrap()]).unwrap();
        let pam = PamConfig::new(4, 1.0).unwrap();
        let cal = Calibration::Csi(h.gains().clone());
        for q in 0..cb.size() {
            for m in 1..=4 {
                let y = noiseless(h.gains(), &cb, &pam, q, m);
                assert_eq!(estimate_intensity(&y, cb.entry(q), &pam, &cal), m);
            }
        }
    }

    #[test]
    fn intensity_midpoint_goes_low() {
        let cb = enumerate_weight_w(4, 1).unwrap();
        let pam = PamConfig::new(2, 1.5).unwrap(); // I_1 = 1, I_2 = 2
        let y = cb.entry(0).to_mat().scale(1.5);
        assert_eq!(estimate_intensity(&y, cb.entry(0), &pam, &Calibration::Fixed(1.0)), 1);
        let y = cb.entry(0).to_mat().scale(1.5 + 1e-9);
        assert_eq!(estimate_intensity(&y, cb.entry(0), &pam, &Calibration::Fixed(1.0)), 2);
    }

    #[test]
    fn weight_classification_modes() {
        let cb = combine_codebooks(&[enumerate_weight_w(4, 1).unwrap(), enumerate_weight_w(4, 2).unwrap().take_first(8)])
            .unwrap();
        let pam = PamConfig::unit();
        let g = 1e-4;
        let h = Mat::identity(4).scale(g);
        let cal = Calibration::Fixed(g);
        let y = noiseless(&h, &cb, &pam, 30, 1);
        let genie = SideInfo { true_weight: Some(2) };
        assert_eq!(classify_weight(&y, &cb, &pam, WeightMode::Genie, genie, &cal).unwrap(), 2);
        assert!(classify_weight(&y, &cb, &pam, WeightMode::Genie, SideInfo::default(), &cal).is_err());
        // equal block power: energy mode must agree with the joint cost
        for q in [0, 5, 23, 24, 31] {
            let y = noiseless(&h, &cb, &pam, q, 1);
            let w = cb.entry(q).weight();
            let none = SideInfo::default();
            assert_eq!(classify_weight(&y, &cb, &pam, WeightMode::JointCost, none, &cal).unwrap(), w);
            assert_eq!(classify_weight(&y, &cb, &pam, WeightMode::Energy, none, &cal).unwrap(), w);
        }
    }

    #[test]
    fn multiweight_iterative_noiseless() {
        let h = fixture_h02();
        let cb = enumerate_weight_w(4, 2).unwrap();
        let pam = PamConfig::unit();
        let dec = SdDecoder::new(&cb, &pam, SdConfig::default()).unwrap();
        for q in 0..cb.signaling_points(1) as usize {
            let y = noiseless(h.gains(), &cb, &pam, q, 1);
            assert_eq!(dec.detect_bf(&y, SideInfo::default()).unwrap().entry, q);
            assert_eq!(dec.detect_iterative(&y, SideInfo::default()).unwrap().entry, q);
        }
    }

    #[test]
    fn no_decision_without_fallback() {
        let cb = Codebook::from_strs(&["1234", "2143"]).unwrap();
        let pam = PamConfig::unit();
        let cfg = SdConfig { e_max: Some(1), bf_fallback: false, ..SdConfig::default() };
        let y = Codebook::from_strs(&["4321"]).unwrap().entry(0).to_mat();
        let err = iterative_sd_detect(&y, &cb, &pam, &cfg, SideInfo::default()).unwrap_err();
        assert_eq!(err, Error::NoDecision { e_max: 1 });
        let cfg = SdConfig { e_max: Some(1), ..SdConfig::default() };
        let r = iterative_sd_detect(&y, &cb, &pam, &cfg, SideInfo::default()).unwrap();
        let bf = bf_sd_detect(&y, &cb, &pam, &cfg, SideInfo::default()).unwrap();
        assert_eq!(r.cost, bf.cost);
    }
}
