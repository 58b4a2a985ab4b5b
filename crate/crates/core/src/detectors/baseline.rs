//! Single-slot reference schemes with ML detection under known CSI.
//!
//! A block is one transmit instant: an `L x 1` intensity vector.
//!
//! * Repetition coding drives every LED with the same M-PAM level, scaled by
//!   `1/L` so the summed optical power matches the other schemes.
//! * Spatial modulation lights one LED; the first `log2 L` bits pick it and the
//!   remaining `log2 M` bits pick its level.
//!
//! Labels are natural binary, MSB first.

use crate::codebook::label_to_bits;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::pam_intensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Rc,
    Sm,
}

impl BaselineKind {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Rc => "rc",
            Self::Sm => "sm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    kind: BaselineKind,
    leds: usize,
    levels: usize,
    mean_power: f64,
    /// Transmit vector per label.
    signals: Vec<Mat>,
}

fn check_pow2(what: &str, n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidPam(format!("{what} must be a power of two, got {n}")));
    }
    Ok(n.trailing_zeros())
}

impl Baseline {
    pub fn rc(leds: usize, levels: usize, mean_power: f64) -> Result<Self> {
        check_pow2("RC levels", levels)?;
        if leds == 0 {
            return Err(Error::InvalidGeometry("RC needs at least one LED".into()));
        }
        let signals = (1..=levels)
            .map(|m| {
                let a = pam_intensity(m, levels, leds, mean_power)?;
                Mat::from_vec(leds, 1, vec![a; leds])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: BaselineKind::Rc, leds, levels, mean_power, signals })
    }

    pub fn sm(leds: usize, levels: usize, mean_power: f64) -> Result<Self> {
        check_pow2("SM LED count", leds)?;
        check_pow2("SM levels", levels)?;
        let mut signals = Vec::with_capacity(leds * levels);
        for led in 0..leds {
            for m in 1..=levels {
                let mut s = Mat::zeros(leds, 1);
                s[(led, 0)] = pam_intensity(m, levels, 1, mean_power)?;
                signals.push(s);
            }
        }
        Ok(Self { kind: BaselineKind::Sm, leds, levels, mean_power, signals })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn leds(&self) -> usize {
        self.leds
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    pub fn bits_per_block(&self) -> u32 {
        self.signals.len().trailing_zeros()
    }

    pub fn signal(&self, label: u64) -> Result<&Mat> {
        self.signals
            .get(label as usize)
            .ok_or(Error::LabelOutOfRange { label, count: self.signals.len() as u64 })
    }

    pub fn label_bits(&self, label: u64) -> Vec<u8> {
        label_to_bits(label, self.bits_per_block())
    }
}

/// ML receiver for a baseline with the channel images precomputed.
#[derive(Debug, Clone)]
pub struct BaselineDetector {
    images: Vec<(Mat, f64)>,
}

impl BaselineDetector {
    pub fn new(baseline: &Baseline, channel: &Mat) -> Result<Self> {
        if channel.cols() != baseline.leds {
            return Err(Error::LengthMismatch { expected: baseline.leds, got: channel.cols() });
        }
        let images = baseline
            .signals
            .iter()
            .map(|s| {
                let hs = channel.matmul(s)?;
                let e = hs.frobenius_sq();
                Ok((hs, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { images })
    }

    /// Label minimising `||y - H s||^2`; ties go to the lowest label.
    pub fn detect(&self, y: &Mat) -> Result<u64> {
        let mut best = (f64::INFINITY, 0);
        for (k, (hs, e)) in self.images.iter().enumerate() {
            let metric = e - 2.0 * y.dot(hs)?;
            if metric < best.0 {
                best = (metric, k);
            }
        }
        Ok(best.1 as u64)
    }
}

/// Repetition-coding ML decision.
pub fn rc_detect(y: &Mat, channel: &Mat, baseline: &Baseline) -> Result<u64> {
    if baseline.kind != BaselineKind::Rc {
        return Err(Error::Scenario("expected an RC configuration".into()));
    }
    BaselineDetector::new(baseline, channel)?.detect(y)
}

/// Spatial-modulation ML decision.
pub fn sm_detect(y: &Mat, channel: &Mat, baseline: &Baseline) -> Result<u64> {
    if baseline.kind != BaselineKind::Sm {
        return Err(Error::Scenario("expected an SM configuration".into()));
    }
    BaselineDetector::new(baseline, channel)?.detect(y)
}
