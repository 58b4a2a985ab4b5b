//! Bit blocks to intensity-scaled transmit matrices.

use crate::codebook::{bits_to_label, Codebook};
use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Unipolar M-PAM with mean optical transmit power `mean_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamConfig {
    levels: usize,
    mean_power: f64,
}

impl PamConfig {
    pub fn new(levels: usize, mean_power: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidPam("M must be at least 1".into()));
        }
        if !(mean_power > 0.0 && mean_power.is_finite()) {
            return Err(Error::InvalidPam(format!("mean power must be positive, got {mean_power}")));
        }
        Ok(Self { levels, mean_power })
    }

    /// Single-level signaling at unit mean power.
    pub fn unit() -> Self {
        Self { levels: 1, mean_power: 1.0 }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    /// Per-LED intensity of level `level` for a weight-`weight` matrix.
    pub fn intensity(&self, level: usize, weight: usize) -> Result<f64> {
        pam_intensity(level, self.levels, weight, self.mean_power)
    }
}

/// `I_m = 2 I m / (w (M + 1))`.
///
/// The 1/w factor keeps the total block power independent of the weight.
pub fn pam_intensity(level: usize, levels: usize, weight: usize, mean_power: f64) -> Result<f64> {
    if level == 0 || level > levels {
        return Err(Error::LevelOutOfRange { level, levels });
    }
    if weight == 0 {
        return Err(Error::InvalidPam("weight must be at least 1".into()));
    }
    Ok(2.0 * mean_power * level as f64 / (weight as f64 * (levels as f64 + 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitBlock {
    /// Optical intensities, rows are LEDs and columns are time slots.
    pub signal: Mat,
    pub entry: usize,
    pub level: usize,
    pub weight: usize,
}

/// The transmit matrix `I_m * P_q` for a known entry and level.
pub fn transmit_matrix(codebook: &Codebook, pam: &PamConfig, entry: usize, level: usize) -> Result<Mat> {
    let e = codebook
        .entries()
        .get(entry)
        .ok_or(Error::LabelOutOfRange { label: entry as u64, count: codebook.size() as u64 })?;
    let a = pam.intensity(level, e.weight())?;
    Ok(e.to_mat().scale(a))
}

/// Encodes one MSB-first bit block.
pub fn encode(bits: &[u8], codebook: &Codebook, pam: &PamConfig) -> Result<TransmitBlock> {
    let (entry, level) = codebook.bits_to_entry(bits, pam.levels())?;
    encode_entry(codebook, pam, entry, level)
}

/// Encodes a signaling label in `0..codebook.signaling_points(M)`.
pub fn encode_label(label: u64, codebook: &Codebook, pam: &PamConfig) -> Result<TransmitBlock> {
    let (entry, level) = codebook.label_to_entry(label, pam.levels())?;
    encode_entry(codebook, pam, entry, level)
}

fn encode_entry(codebook: &Codebook, pam: &PamConfig, entry: usize, level: usize) -> Result<TransmitBlock> {
    Ok(TransmitBlock {
        signal: transmit_matrix(codebook, pam, entry, level)?,
        entry,
        level,
        weight: codebook.entry(entry).weight(),
    })
}

/// Splits a bit stream into blocks. The last block is zero-padded when the
/// stream length is not a multiple of the block size; the flag reports it.
pub fn frame_bits(stream: &[u8], bits_per_block: usize) -> (Vec<Vec<u8>>, bool) {
    if bits_per_block == 0 {
        return (Vec::new(), false);
    }
    let mut padded = false;
    let blocks = stream
        .chunks(bits_per_block)
        .map(|chunk| {
            let mut b = chunk.to_vec();
            if b.len() < bits_per_block {
                padded = true;
                b.resize(bits_per_block, 0);
            }
            b
        })
        .collect();
    (blocks, padded)
}

/// Encodes a whole bit stream block by block.
pub fn encode_stream(stream: &[u8], codebook: &Codebook, pam: &PamConfig) -> Result<(Vec<TransmitBlock>, bool)> {
    let nbits = codebook.bits_per_block(pam.levels()) as usize;
    let (blocks, padded) = frame_bits(stream, nbits);
    let out = blocks
        .iter()
        .map(|b| encode_label(bits_to_label(b), codebook, pam))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, padded))
}
