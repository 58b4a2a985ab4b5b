//! Reproducible Monte Carlo BER estimation.
//!
//! Every SNR point is split into fixed-size batches. Batch `b` of point `p` on
//! link `l` draws from a ChaCha8 generator keyed by `(seed, l, p)` on stream
//! `b`, so its outcome does not depend on which worker runs it. Batches run in
//! rounds on the current rayon pool and are merged in batch order; the point
//! stops at the first batch where the error target or the block cap is met.
//! The records are therefore identical for any thread count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::BoundCurve;
use crate::channel::{add_noise, ebn0_to_n0, SignalEnergy};
use crate::codebook::Codebook;
use crate::detectors::baseline::{Baseline, BaselineDetector};
use crate::detectors::{bb_detect, BbConfig, DetectorKind, MlDetector, SdConfig, SdDecoder, SideInfo};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::{transmit_matrix, PamConfig};

/// Largest number of batches evaluated per round.
const MAX_ROUND: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub errors_target: u64,
    pub block_cap: u64,
    pub batch_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { seed: 1, errors_target: 200, block_cap: 10_000_000, batch_size: 512 }
    }
}

/// Decoded label of one block; `None` is an erasure, which the harness
/// replaces by a uniformly random label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    pub decoded: Option<u64>,
    pub ops: u64,
}

/// One transmitter/channel/receiver chain.
pub trait Link: Sync {
    fn bits_per_block(&self) -> u32;

    /// Symbol energy used to turn Eb/N0 into N0.
    fn symbol_energy(&self) -> f64;

    fn run_block(&self, label: u64, n0: f64, rng: &mut ChaCha8Rng) -> Result<BlockOutcome>;

    fn noise_density(&self, ebn0_db: f64) -> f64 {
        ebn0_to_n0(ebn0_db, self.symbol_energy(), self.bits_per_block())
    }
}

#[derive(Debug, Clone)]
pub enum PmDetector {
    Ml(MlDetector),
    BfSd(SdDecoder),
    IterSd(SdDecoder),
    Bb(BbConfig),
    Random,
}

impl PmDetector {
    pub fn build(
        kind: DetectorKind,
        codebook: &Codebook,
        pam: &PamConfig,
        channel: &Mat,
        sd: &SdConfig,
        bb: &BbConfig,
    ) -> Result<Self> {
        Ok(match kind {
            DetectorKind::Ml => Self::Ml(MlDetector::new(channel, codebook, pam)?),
            DetectorKind::BfSd => Self::BfSd(SdDecoder::new(codebook, pam, sd.clone())?),
            DetectorKind::IterativeSd => Self::IterSd(SdDecoder::new(codebook, pam, sd.clone())?),
            DetectorKind::BranchAndBound => {
                if codebook.weights_present() != [1] {
                    return Err(Error::Unsupported {
                        detector: "bb".into(),
                        reason: "codebooks with matrices of weight above 1".into(),
                    });
                }
                Self::Bb(bb.clone())
            }
            DetectorKind::RandomGuess => Self::Random,
        })
    }
}

/// Permutation-modulation link.
#[derive(Debug, Clone)]
pub struct PmLink {
    codebook: Codebook,
    pam: PamConfig,
    channel: Mat,
    detector: PmDetector,
    energy: SignalEnergy,
}

impl PmLink {
    pub fn new(codebook: Codebook, pam: PamConfig, channel: Mat, detector: PmDetector) -> Result<Self> {
        if channel.rows() != codebook.len() || channel.cols() != codebook.len() {
            return Err(Error::LengthMismatch { expected: codebook.len(), got: channel.rows() });
        }
        Ok(Self { codebook, pam, channel, detector, energy: SignalEnergy::default() })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }
}

impl Link for PmLink {
    fn bits_per_block(&self) -> u32 {
        self.codebook.bits_per_block(self.pam.levels())
    }

    fn symbol_energy(&self) -> f64 {
        self.energy.symbol_energy(self.pam.mean_power())
    }

    fn run_block(&self, label: u64, n0: f64, rng: &mut ChaCha8Rng) -> Result<BlockOutcome> {
        let levels = self.pam.levels();
        let (q, m) = self.codebook.label_to_entry(label, levels)?;
        let mut y = self.channel.matmul(&transmit_matrix(&self.codebook, &self.pam, q, m)?)?;
        add_noise(&mut y, n0, rng);
        let side = SideInfo { true_weight: Some(self.codebook.entry(q).weight()) };
        let decided = match &self.detector {
            PmDetector::Ml(d) => Some(d.detect(&y)?),
            PmDetector::BfSd(d) => Some(d.detect_bf(&y, side)?),
            PmDetector::IterSd(d) => match d.detect_iterative(&y, side) {
                Ok(r) => Some(r),
                Err(Error::NoDecision { .. }) => None,
                Err(e) => return Err(e),
            },
            PmDetector::Bb(cfg) => {
                let r = bb_detect(&y, &self.codebook, &self.pam, cfg)?;
                match r.detection {
                    Some(d) => Some(d),
                    None => return Ok(BlockOutcome { decoded: None, ops: r.op_count }),
                }
            }
            PmDetector::Random => return Ok(BlockOutcome { decoded: None, ops: 0 }),
        };
        Ok(match decided {
            Some(r) => BlockOutcome { decoded: r.label, ops: r.op_count },
            None => BlockOutcome { decoded: None, ops: 0 },
        })
    }
}

/// Repetition coding or spatial modulation with ML detection.
#[derive(Debug, Clone)]
pub struct BaselineLink {
    baseline: Baseline,
    channel: Mat,
    detector: BaselineDetector,
    mean_power: f64,
}

impl BaselineLink {
    pub fn new(baseline: Baseline, channel: Mat, mean_power: f64) -> Result<Self> {
        let detector = BaselineDetector::new(&baseline, &channel)?;
        Ok(Self { baseline, channel, detector, mean_power })
    }
}

impl Link for BaselineLink {
    fn bits_per_block(&self) -> u32 {
        self.baseline.bits_per_block()
    }

    fn symbol_energy(&self) -> f64 {
        SignalEnergy::default().symbol_energy(self.mean_power)
    }

    fn run_block(&self, label: u64, n0: f64, rng: &mut ChaCha8Rng) -> Result<BlockOutcome> {
        let mut y = self.channel.matmul(self.baseline.signal(label)?)?;
        add_noise(&mut y, n0, rng);
        let ops = (self.channel.rows() << self.baseline.bits_per_block()) as u64;
        Ok(BlockOutcome { decoded: Some(self.detector.detect(&y)?), ops })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PointStats {
    pub bit_errors: u64,
    pub bits: u64,
    pub blocks: u64,
    pub block_errors: u64,
    /// Sum over blocks of the squared per-block bit error count.
    pub sq_errors: u64,
    pub erasures: u64,
    pub ops: u64,
}

impl PointStats {
    fn merge(&mut self, o: &PointStats) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.blocks += o.blocks;
        self.block_errors += o.block_errors;
        self.sq_errors += o.sq_errors;
        self.erasures += o.erasures;
        self.ops += o.ops;
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

fn point_rng(seed: u64, link: u64, point: u64, batch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&link.to_le_bytes());
    key[16..24].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(batch);
    rng
}

fn run_batch<L: Link + ?Sized>(link: &L, n0: f64, blocks: u64, mut rng: ChaCha8Rng) -> Result<PointStats> {
    let bits = link.bits_per_block();
    let labels = 1u64 << bits;
    let mut s = PointStats::default();
    for _ in 0..blocks {
        let label = rng.random_range(0..labels);
        let out = link.run_block(label, n0, &mut rng)?;
        let decoded = match out.decoded {
            Some(d) => d,
            None => {
                s.erasures += 1;
                rng.random_range(0..labels)
            }
        };
        let e = (label ^ decoded).count_ones() as u64;
        s.bit_errors += e;
        s.block_errors += u64::from(e > 0);
        s.sq_errors += e * e;
        s.ops += out.ops;
    }
    s.blocks = blocks;
    s.bits = blocks * bits as u64;
    Ok(s)
}

/// Simulates one noise level. `link_index` and `point_index` select the
/// random streams.
pub fn simulate_point<L: Link + ?Sized>(
    link: &L,
    n0: f64,
    cfg: &McConfig,
    link_index: u64,
    point_index: u64,
) -> Result<PointStats> {
    if cfg.batch_size == 0 {
        return Err(Error::Scenario("batch size must be positive".into()));
    }
    let mut total = PointStats::default();
    let mut next_batch = 0u64;
    let mut round = 1u64;
    while total.bit_errors < cfg.errors_target && total.blocks < cfg.block_cap {
        let remaining = cfg.block_cap - total.blocks;
        let wanted = remaining.div_ceil(cfg.batch_size).min(round);
        let results = (next_batch..next_batch + wanted)
            .into_par_iter()
            .map(|b| {
                let start = (b - next_batch) * cfg.batch_size;
                let size = cfg.batch_size.min(remaining - start);
                run_batch(link, n0, size, point_rng(cfg.seed, link_index, point_index, b))
            })
            .collect::<Result<Vec<_>>>()?;
        for r in &results {
            total.merge(r);
            if total.bit_errors >= cfg.errors_target {
                break;
            }
        }
        next_batch += wanted;
        round = (round * 2).min(MAX_ROUND);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub scheme: String,
    pub detector: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub blocks: u64,
    pub seed: u64,
    #[serde(skip)]
    pub sq_errors: u64,
    #[serde(skip)]
    pub erasures: u64,
    #[serde(skip)]
    pub op_count: u64,
}

impl BerRecord {
    /// Standard error of the BER estimate from the spread of per-block error
    /// counts. Errors cluster within blocks, so this is wider than the
    /// independent-bit binomial figure.
    pub fn std_error(&self) -> f64 {
        if self.blocks < 2 || self.bits == 0 {
            return 0.0;
        }
        let n = self.blocks as f64;
        let mean = self.bit_errors as f64 / n;
        let var = ((self.sq_errors as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt() * n / self.bits as f64
    }

    pub fn mean_ops(&self) -> f64 {
        if self.blocks == 0 {
            0.0
        } else {
            self.op_count as f64 / self.blocks as f64
        }
    }
}

/// BER over an Eb/N0 grid; point `k` uses stream `(link_index, k)`.
pub fn simulate_curve<L: Link + ?Sized>(
    link: &L,
    scheme: &str,
    detector: &str,
    ebn0_grid: &[f64],
    cfg: &McConfig,
    link_index: u64,
) -> Result<Vec<BerRecord>> {
    ebn0_grid
        .iter()
        .enumerate()
        .map(|(k, &db)| {
            let s = simulate_point(link, link.noise_density(db), cfg, link_index, k as u64)?;
            Ok(BerRecord {
                scheme: scheme.to_string(),
                detector: detector.to_string(),
                ebn0_db: db,
                ber: s.ber(),
                bit_errors: s.bit_errors,
                bits: s.bits,
                blocks: s.blocks,
                seed: cfg.seed,
                sq_errors: s.sq_errors,
                erasures: s.erasures,
                op_count: s.ops,
            })
        })
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("writing CSV: {e}"))
}

/// `scheme,detector,ebn0_db,ber,bit_errors,bits,blocks,seed`
pub fn write_ber_csv<W: Write>(records: &[BerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(["scheme", "detector", "ebn0_db", "ber", "bit_errors", "bits", "blocks", "seed"])
            .map_err(csv_err)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// `scheme,ebn0_db,bound`
pub fn write_bound_csv<W: Write>(curves: &[BoundCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "ebn0_db", "bound"]).map_err(csv_err)?;
    for c in curves {
        for (db, v) in c.ebn0_db.iter().zip(&c.values) {
            w.serialize((&c.scheme, db, v)).map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixture_h02;
    use crate::codebook::enumerate_weight_w;

    fn ml_link() -> PmLink {
        let cb = enumerate_weight_w(4, 1).unwrap();
        let pam = PamConfig::unit();
        let h = fixture_h02().gains().clone();
        let det = PmDetector::build(DetectorKind::Ml, &cb, &pam, &h, &SdConfig::default(), &BbConfig::default())
            .unwrap();
        PmLink::new(cb, pam, h, det).unwrap()
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let link = ml_link();
        let cfg = McConfig { block_cap: 3000, ..McConfig::default() };
        let s = simulate_point(&link, 0.0, &cfg, 0, 0).unwrap();
        assert_eq!(s.bit_errors, 0);
        assert_eq!(s.blocks, 3000);
        assert_eq!(s.bits, 12000);
    }

    #[test]
    fn stops_at_error_target() {
        let link = ml_link();
        let cfg = McConfig { errors_target: 50, batch_size: 16, ..McConfig::default() };
        let s = simulate_point(&link, link.noise_density(95.0), &cfg, 0, 0).unwrap();
        assert!(s.bit_errors >= 50);
        assert!(s.blocks < cfg.block_cap);
    }

    #[test]
    fn std_error_accounts_for_clustering() {
        let rec = |sq| BerRecord {
            scheme: String::new(),
            detector: String::new(),
            ebn0_db: 0.0,
            ber: 0.1,
            bit_errors: 40,
            bits: 400,
            blocks: 100,
            seed: 0,
            sq_errors: sq,
            erasures: 0,
            op_count: 0,
        };
        // 40 single-bit errors versus 10 blocks with every bit wrong.
        let spread = rec(40).std_error();
        let clustered = rec(160).std_error();
        let direct = |xs: &[f64]| {
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
            (v / n).sqrt() / 4.0
        };
        let mut a = vec![0.0; 100];
        a[..40].fill(1.0);
        let mut b = vec![0.0; 100];
        b[..10].fill(4.0);
        assert!((spread - direct(&a)).abs() < 1e-12);
        assert!((clustered - direct(&b)).abs() < 1e-12);
        assert!(clustered > spread);
    }

    #[test]
    fn csv_header_and_rows() {
        let rec = BerRecord {
            scheme: "a".into(),
            detector: "ml".into(),
            ebn0_db: 100.0,
            ber: 0.25,
            bit_errors: 1,
            bits: 4,
            blocks: 1,
            seed: 7,
            sq_errors: 1,
            erasures: 0,
            op_count: 0,
        };
        let mut buf = Vec::new();
        write_ber_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "scheme,detector,ebn0_db,ber,bit_errors,bits,blocks,seed\na,ml,100.0,0.25,1,4,1,7\n");
        let mut buf = Vec::new();
        write_bound_csv(&[BoundCurve { scheme: "a".into(), ebn0_db: vec![1.0], values: vec![0.5] }], &mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "scheme,ebn0_db,bound\na,1.0,0.5\n");
    }
}
