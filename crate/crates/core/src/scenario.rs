//! Experiment descriptions and the shipped presets.
//!
//! A scenario is a TOML file with one or more `[[scheme]]` tables, one or more
//! `[[channel]]` tables and a `[simulation]` table:
//!
//! ```toml
//! name = "cb-compare"
//! seed = 1
//!
//! [[scheme]]
//! name = "cb1"
//! entries = ["4321", "4132", "3124", "3412", "2431", "2143", "2314", "1342"]
//!
//! [[channel]]
//! name = "h02"
//! fixture = "h02"
//!
//! [simulation]
//! detectors = ["iter-sd", "bb"]
//! ebn0_db = { start = 96.0, stop = 110.0, step = 2.0 }
//! ```
//!
//! Every permutation-modulation scheme is simulated on every channel with every
//! listed detector. Repetition coding and spatial modulation schemes always use
//! their own ML receiver. Each resulting curve gets its own random stream, so
//! the output depends only on the file and the seed.

use std::path::Path;
use std::time::Instant;

use serde::Deserialize;

use crate::analysis::{
    ber_union_bound, simulate_curve, write_ber_csv, write_bound_csv, BaselineLink, BerRecord, BoundCurve, McConfig,
    PmDetector, PmLink,
};
use crate::channel::{
    apply_blockage, build_channel, fixture_h02, fixture_h06_blocked, ChannelMatrix, GridLayout, LambertianParams,
    RoomGeometry, SignalEnergy,
};
use crate::codebook::{combine_codebooks, enumerate_weight_w, Codebook, CodewordMatrix};
use crate::detectors::baseline::Baseline;
use crate::detectors::{BbConfig, Calibration, DetectorKind, SdConfig, WeightMode};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::txcodec::PamConfig;

const PRESETS: [(&str, &str); 6] = [
    ("fig2-schemes", include_str!("../presets/fig2-schemes.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4-cb1-cb2", include_str!("../presets/fig4-cb1-cb2.toml")),
    ("fig4-w2", include_str!("../presets/fig4-w2.toml")),
    ("fig5-mobile", include_str!("../presets/fig5-mobile.toml")),
    ("fig6-blockage", include_str!("../presets/fig6-blockage.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(rename = "scheme")]
    pub schemes: Vec<SchemeSpec>,
    #[serde(rename = "channel")]
    pub channels: Vec<ChannelSpec>,
    pub simulation: SimulationSpec,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    Pm,
    Rc,
    Sm,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub name: String,
    #[serde(default)]
    pub kind: SchemeKind,
    /// Block length, also the LED count.
    #[serde(default = "default_len")]
    pub len: usize,
    /// Weight classes to enumerate, in codebook order.
    #[serde(default)]
    pub weights: Vec<usize>,
    /// Keep only the first `take[k]` entries of class `weights[k]`.
    #[serde(default)]
    pub take: Option<Vec<usize>>,
    /// Explicit entries such as `"2314"` or `"2314+3142"`; excludes `weights`.
    #[serde(default)]
    pub entries: Option<Vec<String>>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_power")]
    pub mean_power: f64,
}

fn default_len() -> usize {
    4
}

fn default_levels() -> usize {
    1
}

fn default_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    /// `h02` or `h06-blocked`.
    #[serde(default)]
    pub fixture: Option<String>,
    /// Explicit gains, one inner list per photodiode.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
    /// 1-based (LED, PD) links to remove.
    #[serde(default)]
    pub blocked: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySpec {
    pub count: usize,
    pub tx_spacing: f64,
    pub rx_spacing: f64,
    pub height: f64,
    pub rx_offset: f64,
    pub half_angle_deg: f64,
    pub fov_deg: f64,
    pub pd_area: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        let g = GridLayout::default();
        let p = LambertianParams::default();
        Self {
            count: g.count,
            tx_spacing: g.tx_spacing,
            rx_spacing: g.rx_spacing,
            height: g.height,
            rx_offset: g.rx_offset,
            half_angle_deg: p.half_angle_deg,
            fov_deg: p.fov_deg,
            pd_area: p.pd_area,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            Self::List(v) => v.clone(),
            Self::Range { start, stop, step } => {
                if !(*step > 0.0) {
                    return Err(Error::Scenario(format!("simulation.ebn0_db: step must be positive, got {step}")));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if !(n >= 0.0) {
                    return Err(Error::Scenario("simulation.ebn0_db: stop lies below start".into()));
                }
                (0..=n as usize).map(|k| start + k as f64 * step).collect()
            }
        };
        if pts.is_empty() {
            return Err(Error::Scenario("simulation.ebn0_db: grid is empty".into()));
        }
        if pts.iter().any(|v| !v.is_finite()) || pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Scenario("simulation.ebn0_db: grid must be finite and strictly ascending".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightModeSpec {
    #[default]
    Genie,
    Energy,
    JointCost,
}

impl From<WeightModeSpec> for WeightMode {
    fn from(w: WeightModeSpec) -> Self {
        match w {
            WeightModeSpec::Genie => Self::Genie,
            WeightModeSpec::Energy => Self::Energy,
            WeightModeSpec::JointCost => Self::JointCost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub detectors: Vec<String>,
    pub ebn0_db: GridSpec,
    #[serde(default = "default_errors")]
    pub errors_target: u64,
    #[serde(default = "default_cap")]
    pub block_cap: u64,
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    #[serde(default)]
    pub weight_mode: WeightModeSpec,
    #[serde(default)]
    pub e_max: Option<usize>,
    #[serde(default = "default_true")]
    pub bf_fallback: bool,
    /// Gain assumed by the CSI-free receivers; defaults to the mean gain of
    /// each channel.
    #[serde(default)]
    pub sd_gain: Option<f64>,
    #[serde(default)]
    pub bb_nearest: bool,
    /// Also evaluate the union bound for every permutation scheme.
    #[serde(default = "default_true")]
    pub bound: bool,
}

fn default_errors() -> u64 {
    McConfig::default().errors_target
}

fn default_cap() -> u64 {
    1_000_000
}

fn default_batch() -> u64 {
    McConfig::default().batch_size
}

fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| {
            Error::Scenario(format!("unknown preset `{name}`, available: {}", preset_names().join(", ")))
        })?;
        Self::from_toml(text)
    }

    /// Builds every codebook and channel and checks the detector choices.
    pub fn prepare(&self) -> Result<Prepared> {
        let sim = &self.simulation;
        let grid = sim.ebn0_db.points()?;
        if sim.batch_size == 0 {
            return Err(Error::Scenario("simulation.batch_size must be positive".into()));
        }
        if sim.e_max == Some(0) {
            return Err(Error::Scenario("simulation.e_max must be positive".into()));
        }
        if let Some(g) = sim.sd_gain {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Scenario(format!("simulation.sd_gain must be positive, got {g}")));
            }
        }
        if self.schemes.is_empty() || self.channels.is_empty() {
            return Err(Error::Scenario("a scenario needs at least one scheme and one channel".into()));
        }
        let detectors = sim
            .detectors
            .iter()
            .map(|d| d.parse::<DetectorKind>())
            .collect::<Result<Vec<_>>>()?;
        if detectors.is_empty() {
            return Err(Error::Scenario("simulation.detectors is empty".into()));
        }
        let schemes = self
            .schemes
            .iter()
            .map(|s| build_scheme(s).map_err(|e| Error::Scenario(format!("scheme `{}`: {e}", s.name))))
            .collect::<Result<Vec<_>>>()?;
        let channels = self
            .channels
            .iter()
            .map(|c| build_channel_spec(c).map_err(|e| Error::Scenario(format!("channel `{}`: {e}", c.name))))
            .collect::<Result<Vec<_>>>()?;
        for (spec, scheme) in self.schemes.iter().zip(&schemes) {
            let leds = scheme.leds();
            for (cspec, ch) in self.channels.iter().zip(&channels) {
                if ch.len() != leds {
                    return Err(Error::Scenario(format!(
                        "scheme `{}` drives {leds} LEDs but channel `{}` is {}x{}",
                        spec.name,
                        cspec.name,
                        ch.len(),
                        ch.len()
                    )));
                }
            }
            if let Scheme::Pm { codebook, .. } = scheme {
                if detectors.contains(&DetectorKind::BranchAndBound) && codebook.weights_present() != [1] {
                    return Err(Error::Scenario(format!(
                        "scheme `{}`: detector bb only supports codebooks of weight 1",
                        spec.name
                    )));
                }
            }
        }
        let mc = McConfig {
            seed: self.seed,
            errors_target: sim.errors_target,
            block_cap: sim.block_cap,
            batch_size: sim.batch_size,
        };
        let mut jobs = Vec::new();
        let tag = |scheme: &str, channel: &str| {
            if self.channels.len() == 1 {
                scheme.to_string()
            } else {
                format!("{scheme}@{channel}")
            }
        };
        for (si, spec) in self.schemes.iter().enumerate() {
            for (ci, cspec) in self.channels.iter().enumerate() {
                let kinds = match schemes[si] {
                    Scheme::Pm { .. } => detectors.clone(),
                    Scheme::Baseline(_) => vec![DetectorKind::Ml],
                };
                for kind in kinds {
                    jobs.push(Job { scheme: si, channel: ci, kind, label: tag(&spec.name, &cspec.name) });
                }
            }
        }
        Ok(Prepared {
            name: self.name.clone(),
            grid,
            mc,
            schemes,
            channels,
            jobs,
            sd: SdConfig {
                weight_mode: sim.weight_mode.into(),
                calibration: Calibration::Fixed(1.0),
                e_max: sim.e_max,
                bf_fallback: sim.bf_fallback,
            },
            sd_gain: sim.sd_gain,
            bb_nearest: sim.bb_nearest,
            bound: sim.bound,
        })
    }
}

fn build_scheme(spec: &SchemeSpec) -> Result<Scheme> {
    if !(spec.mean_power > 0.0 && spec.mean_power.is_finite()) {
        return Err(Error::Scenario(format!("mean_power must be positive, got {}", spec.mean_power)));
    }
    match spec.kind {
        SchemeKind::Rc | SchemeKind::Sm => {
            if spec.entries.is_some() || !spec.weights.is_empty() || spec.take.is_some() {
                return Err(Error::Scenario("rc and sm schemes take only len, levels and mean_power".into()));
            }
            let b = if spec.kind == SchemeKind::Rc {
                Baseline::rc(spec.len, spec.levels, spec.mean_power)?
            } else {
                Baseline::sm(spec.len, spec.levels, spec.mean_power)?
            };
            Ok(Scheme::Baseline(b))
        }
        SchemeKind::Pm => {
            let pam = PamConfig::new(spec.levels, spec.mean_power)?;
            let codebook = match (&spec.entries, spec.weights.is_empty()) {
                (Some(_), false) => return Err(Error::Scenario("give either entries or weights, not both".into())),
                (None, true) => return Err(Error::Scenario("needs entries or weights".into())),
                (Some(list), true) => {
                    if spec.take.is_some() {
                        return Err(Error::Scenario("take applies only to weights".into()));
                    }
                    let entries = list.iter().map(|s| s.parse::<CodewordMatrix>()).collect::<Result<Vec<_>>>()?;
                    if let Some(bad) = entries.iter().find(|e| e.len() != spec.len) {
                        return Err(Error::LengthMismatch { expected: spec.len, got: bad.len() });
                    }
                    Codebook::new(entries)?
                }
                (None, false) => {
                    if let Some(take) = &spec.take {
                        if take.len() != spec.weights.len() {
                            return Err(Error::Scenario(format!(
                                "take lists {} counts for {} weights",
                                take.len(),
                                spec.weights.len()
                            )));
                        }
                    }
                    let mut parts = Vec::new();
                    for (k, &w) in spec.weights.iter().enumerate() {
                        let mut part = enumerate_weight_w(spec.len, w)?;
                        if let Some(take) = &spec.take {
                            if take[k] == 0 || take[k] > part.size() {
                                return Err(Error::Scenario(format!(
                                    "take {} outside 1..={} for weight {w}",
                                    take[k],
                                    part.size()
                                )));
                            }
                            part = part.take_first(take[k]);
                        }
                        parts.push(part);
                    }
                    combine_codebooks(&parts)?
                }
            };
            if codebook.bits_per_block(pam.levels()) == 0 {
                return Err(Error::Scenario("codebook carries no bits".into()));
            }
            Ok(Scheme::Pm { codebook, pam })
        }
    }
}

fn build_channel_spec(spec: &ChannelSpec) -> Result<ChannelMatrix> {
    let sources =
        usize::from(spec.fixture.is_some()) + usize::from(spec.matrix.is_some()) + usize::from(spec.geometry.is_some());
    if sources != 1 {
        return Err(Error::Scenario("give exactly one of fixture, matrix or geometry".into()));
    }
    let base = if let Some(name) = &spec.fixture {
        match name.as_str() {
            "h02" => fixture_h02(),
            "h06-blocked" => fixture_h06_blocked(),
            other => return Err(Error::Scenario(format!("unknown fixture `{other}`, expected h02 or h06-blocked"))),
        }
    } else if let Some(rows) = &spec.matrix {
        ChannelMatrix::new(Mat::from_rows(rows)?)?
    } else {
        let g = spec.geometry.expect("counted above");
        let layout = GridLayout {
            count: g.count,
            tx_spacing: g.tx_spacing,
            rx_spacing: g.rx_spacing,
            height: g.height,
            rx_offset: g.rx_offset,
        };
        let params = LambertianParams { half_angle_deg: g.half_angle_deg, fov_deg: g.fov_deg, pd_area: g.pd_area };
        build_channel(&RoomGeometry::grid(layout)?, &params)?
    };
    let pairs: Vec<(usize, usize)> = spec.blocked.iter().map(|p| (p[0], p[1])).collect();
    apply_blockage(&base, &pairs)
}

#[derive(Debug, Clone)]
pub enum Scheme {
    Pm { codebook: Codebook, pam: PamConfig },
    Baseline(Baseline),
}

impl Scheme {
    pub fn leds(&self) -> usize {
        match self {
            Self::Pm { codebook, .. } => codebook.len(),
            Self::Baseline(b) => b.leds(),
        }
    }

    pub fn bits_per_block(&self) -> u32 {
        match self {
            Self::Pm { codebook, pam } => codebook.bits_per_block(pam.levels()),
            Self::Baseline(b) => b.bits_per_block(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Job {
    scheme: usize,
    channel: usize,
    kind: DetectorKind,
    label: String,
}

/// A validated scenario with its codebooks and channels built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub name: String,
    pub grid: Vec<f64>,
    pub mc: McConfig,
    pub schemes: Vec<Scheme>,
    pub channels: Vec<ChannelMatrix>,
    jobs: Vec<Job>,
    sd: SdConfig,
    sd_gain: Option<f64>,
    bb_nearest: bool,
    bound: bool,
}

/// Totals for one simulated curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub scheme: String,
    pub detector: String,
    pub blocks: u64,
    pub bit_errors: u64,
    pub erasures: u64,
    /// Mean detector operations per block over the whole curve.
    pub mean_ops: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<BerRecord>,
    pub bounds: Vec<BoundCurve>,
    pub curves: Vec<CurveSummary>,
}

impl RunOutput {
    pub fn ber_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_ber_csv(&self.records, &mut buf)?;
        Ok(buf)
    }

    pub fn bound_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_bound_csv(&self.bounds, &mut buf)?;
        Ok(buf)
    }

    /// Writes `ber.csv` and, when bounds exist, `bound.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let io = |e: std::io::Error| Error::Scenario(format!("writing to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        let ber = dir.join("ber.csv");
        std::fs::write(&ber, self.ber_csv()?).map_err(io)?;
        written.push(ber);
        if !self.bounds.is_empty() {
            let bound = dir.join("bound.csv");
            std::fs::write(&bound, self.bound_csv()?).map_err(io)?;
            written.push(bound);
        }
        Ok(written)
    }

    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<24} {:<8} {:>12} {:>10} {:>9} {:>10} {:>8}\n",
            "scheme", "detector", "blocks", "errors", "erasures", "ops/block", "seconds"
        );
        for c in &self.curves {
            s.push_str(&format!(
                "{:<24} {:<8} {:>12} {:>10} {:>9} {:>10.1} {:>8.2}\n",
                c.scheme, c.detector, c.blocks, c.bit_errors, c.erasures, c.mean_ops, c.seconds
            ));
        }
        s
    }
}

impl Prepared {
    /// Union bounds of every permutation scheme on every channel.
    pub fn bounds(&self) -> Result<Vec<BoundCurve>> {
        let mut out = Vec::new();
        let mut seen = Vec::new();
        for job in &self.jobs {
            if seen.contains(&(job.scheme, job.channel)) {
                continue;
            }
            seen.push((job.scheme, job.channel));
            if let Scheme::Pm { codebook, pam } = &self.schemes[job.scheme] {
                let h = self.channels[job.channel].gains();
                out.push(ber_union_bound(&job.label, codebook, pam, h, &self.grid, SignalEnergy::default())?);
            }
        }
        Ok(out)
    }

    /// Runs every curve, on a pool of `threads` workers when given.
    pub fn run(&self, threads: Option<usize>) -> Result<RunOutput> {
        match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Scenario(format!("thread pool: {e}")))?
                .install(|| self.run_here()),
            None => self.run_here(),
        }
    }

    fn run_here(&self) -> Result<RunOutput> {
        let mut out = RunOutput::default();
        if self.bound {
            out.bounds = self.bounds()?;
        }
        for (index, job) in self.jobs.iter().enumerate() {
            let start = Instant::now();
            let channel = &self.channels[job.channel];
            let records = match &self.schemes[job.scheme] {
                Scheme::Pm { codebook, pam } => {
                    let gain = self.sd_gain.unwrap_or_else(|| channel.mean_gain());
                    let sd = SdConfig { calibration: Calibration::Fixed(gain), ..self.sd.clone() };
                    let bb = BbConfig { calibration: Calibration::Fixed(gain), nearest_fallback: self.bb_nearest };
                    let det = PmDetector::build(job.kind, codebook, pam, channel.gains(), &sd, &bb)?;
                    let link = PmLink::new(codebook.clone(), *pam, channel.gains().clone(), det)?;
                    simulate_curve(&link, &job.label, job.kind.id(), &self.grid, &self.mc, index as u64)?
                }
                Scheme::Baseline(b) => {
                    let link = BaselineLink::new(b.clone(), channel.gains().clone(), b.mean_power())?;
                    simulate_curve(&link, &job.label, job.kind.id(), &self.grid, &self.mc, index as u64)?
                }
            };
            let blocks: u64 = records.iter().map(|r| r.blocks).sum();
            let ops: u64 = records.iter().map(|r| r.op_count).sum();
            out.curves.push(CurveSummary {
                scheme: job.label.clone(),
                detector: job.kind.id().to_string(),
                blocks,
                bit_errors: records.iter().map(|r| r.bit_errors).sum(),
                erasures: records.iter().map(|r| r.erasures).sum(),
                mean_ops: if blocks == 0 { 0.0 } else { ops as f64 / blocks as f64 },
                seconds: start.elapsed().as_secs_f64(),
            });
            out.records.extend(records);
        }
        Ok(out)
    }
}

/// Per-weight class sizes and the resulting rates of a combined codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookReport {
    pub len: usize,
    pub levels: usize,
    pub counts: Vec<(usize, usize)>,
    pub total: usize,
    pub bits_per_block: u32,
    /// Signaled bits per time slot, `bits_per_block / L`.
    pub bits_per_symbol: f64,
    pub codebook: Codebook,
}

pub fn codebook_report(len: usize, weights: &[usize], levels: usize) -> Result<CodebookReport> {
    if weights.is_empty() {
        return Err(Error::Scenario("at least one weight is required".into()));
    }
    if levels == 0 {
        return Err(Error::InvalidPam("M must be at least 1".into()));
    }
    let parts = weights.iter().map(|&w| enumerate_weight_w(len, w)).collect::<Result<Vec<_>>>()?;
    let counts = weights.iter().zip(&parts).map(|(&w, p)| (w, p.size())).collect();
    let codebook = combine_codebooks(&parts)?;
    let bits = codebook.bits_per_block(levels);
    Ok(CodebookReport {
        len,
        levels,
        counts,
        total: codebook.size(),
        bits_per_block: bits,
        bits_per_symbol: bits as f64 / len as f64,
        codebook,
    })
}
