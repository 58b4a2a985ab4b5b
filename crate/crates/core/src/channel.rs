//! Line-of-sight Lambertian channel, link blockage and the AWGN link.
//!
//! Gains follow `H[i][j]` = gain from LED j to photodiode i, so that the
//! received block is `Y = H S + N` with S holding LEDs on its rows.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Mat;

const H02_TEXT: &str = include_str!("../fixtures/h02.txt");
const H06_BLOCKED_TEXT: &str = include_str!("../fixtures/h06_blocked.txt");

/// Links removed in the blocked 0.6 m fixture, as 1-based (LED, PD) pairs.
pub const H06_BLOCKED_PAIRS: [(usize, usize); 4] = [(1, 4), (2, 3), (3, 2), (4, 1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertianParams {
    /// LED half-power semi-angle, degrees.
    pub half_angle_deg: f64,
    /// Receiver field of view, degrees.
    pub fov_deg: f64,
    /// Photodiode area, m^2.
    pub pd_area: f64,
}

impl Default for LambertianParams {
    fn default() -> Self {
        Self { half_angle_deg: 15.0, fov_deg: 15.0, pd_area: 1e-4 }
    }
}

impl LambertianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_angle_deg > 0.0 && self.half_angle_deg < 90.0) {
            return Err(Error::InvalidGeometry(format!(
                "half-power angle {} deg outside (0, 90)",
                self.half_angle_deg
            )));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg <= 90.0) {
            return Err(Error::InvalidGeometry(format!("field of view {} deg outside (0, 90]", self.fov_deg)));
        }
        if !(self.pd_area > 0.0 && self.pd_area.is_finite()) {
            return Err(Error::InvalidGeometry(format!("photodiode area {} must be positive", self.pd_area)));
        }
        Ok(())
    }

    /// Lambertian emission order `-ln 2 / ln cos(half angle)`.
    pub fn order(&self) -> f64 {
        -std::f64::consts::LN_2 / self.half_angle_deg.to_radians().cos().ln()
    }
}

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Emitter {
    pub position: Point,
    /// Unit normal.
    pub normal: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomGeometry {
    pub leds: Vec<Point>,
    pub pds: Vec<Point>,
    pub led_normal: Point,
    pub pd_normal: Point,
}

/// Parameters of the default square-grid layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLayout {
    /// Number of LEDs (and PDs); must be a perfect square.
    pub count: usize,
    pub tx_spacing: f64,
    pub rx_spacing: f64,
    /// Vertical LED to PD distance, m.
    pub height: f64,
    /// Receiver translation along x, m.
    pub rx_offset: f64,
}

impl Default for GridLayout {
    fn default() -> Self {
        Self { count: 4, tx_spacing: 0.2, rx_spacing: 0.1, height: 1.75, rx_offset: 0.0 }
    }
}

impl RoomGeometry {
    /// Co-centred square grids: LEDs at height `height` facing down, PDs at
    /// z = 0 facing up, the PD grid shifted by `rx_offset` along x. Elements
    /// are numbered row-major over (x, y).
    pub fn grid(layout: GridLayout) -> Result<Self> {
        let side = (layout.count as f64).sqrt().round() as usize;
        if side * side != layout.count || side == 0 {
            return Err(Error::InvalidGeometry(format!("{} elements do not form a square grid", layout.count)));
        }
        if !(layout.height > 0.0) {
            return Err(Error::InvalidGeometry("vertical separation must be positive".into()));
        }
        let place = |spacing: f64, z: f64, dx: f64| -> Vec<Point> {
            let half = (side as f64 - 1.0) / 2.0;
            let mut pts = Vec::with_capacity(layout.count);
            for ix in 0..side {
                for iy in 0..side {
                    pts.push([(ix as f64 - half) * spacing + dx, (iy as f64 - half) * spacing, z]);
                }
            }
            pts
        };
        Ok(Self {
            leds: place(layout.tx_spacing, layout.height, 0.0),
            pds: place(layout.rx_spacing, 0.0, layout.rx_offset),
            led_normal: [0.0, 0.0, -1.0],
            pd_normal: [0.0, 0.0, 1.0],
        })
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |p: &Point| p.iter().all(|v| v.is_finite());
        if !self.leds.iter().chain(&self.pds).all(finite) {
            return Err(Error::InvalidGeometry("non-finite position".into()));
        }
        if self.leds.len() != self.pds.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} LEDs but {} photodiodes",
                self.leds.len(),
                self.pds.len()
            )));
        }
        for n in [self.led_normal, self.pd_normal] {
            let norm = dot(n, n).sqrt();
            if !((norm - 1.0).abs() < 1e-9) {
                return Err(Error::InvalidGeometry("normals must be unit vectors".into()));
            }
        }
        Ok(())
    }
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Optical LOS gain between one LED and one photodiode.
pub fn lambertian_gain(led: &Emitter, pd: &Emitter, params: &LambertianParams) -> Result<f64> {
    let d = [pd.position[0] - led.position[0], pd.position[1] - led.position[1], pd.position[2] - led.position[2]];
    let dist = dot(d, d).sqrt();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::InvalidGeometry("LED and photodiode coincide".into()));
    }
    let cos_emit = dot(d, led.normal) / dist;
    let cos_incident = -dot(d, pd.normal) / dist;
    if cos_emit <= 0.0 || cos_incident <= 0.0 {
        return Ok(0.0);
    }
    let incidence = cos_incident.clamp(-1.0, 1.0).acos();
    if incidence > params.fov_deg.to_radians() {
        return Ok(0.0);
    }
    let order = params.order();
    Ok((order + 1.0) * params.pd_area / (2.0 * PI * dist * dist) * cos_emit.powf(order) * cos_incident)
}

/// Nonnegative L x L gains plus the mask of links removed by blockage.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    gains: Mat,
    blocked: Vec<bool>,
}

impl ChannelMatrix {
    pub fn new(gains: Mat) -> Result<Self> {
        if !gains.is_square() {
            return Err(Error::Shape(format!("channel must be square, got {}x{}", gains.rows(), gains.cols())));
        }
        if gains.as_slice().iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidGeometry("channel gains must be finite and nonnegative".into()));
        }
        let blocked = vec![false; gains.rows() * gains.cols()];
        Ok(Self { gains, blocked })
    }

    pub fn gains(&self) -> &Mat {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.rows() == 0
    }

    /// Whether the link from LED `tx` to PD `rx` (0-based) is blocked.
    pub fn is_blocked(&self, tx: usize, rx: usize) -> bool {
        self.blocked[rx * self.len() + tx]
    }

    pub fn mean_gain(&self) -> f64 {
        self.gains.sum() / (self.len() * self.len()) as f64
    }

    pub fn to_text(&self) -> String {
        format_matrix_text(&self.gains)
    }
}

/// Channel matrix for a room geometry.
pub fn build_channel(geometry: &RoomGeometry, params: &LambertianParams) -> Result<ChannelMatrix> {
    geometry.validate()?;
    params.validate()?;
    let n = geometry.leds.len();
    let mut h = Mat::zeros(n, n);
    for (i, pd) in geometry.pds.iter().enumerate() {
        let pd = Emitter { position: *pd, normal: geometry.pd_normal };
        for (j, led) in geometry.leds.iter().enumerate() {
            let led = Emitter { position: *led, normal: geometry.led_normal };
            h[(i, j)] = lambertian_gain(&led, &pd, params)?;
        }
    }
    ChannelMatrix::new(h)
}

/// Zeroes the listed links, given as 1-based (LED, PD) pairs.
pub fn apply_blockage(channel: &ChannelMatrix, pairs: &[(usize, usize)]) -> Result<ChannelMatrix> {
    let n = channel.len();
    let mut out = channel.clone();
    for &(tx, rx) in pairs {
        if tx == 0 || rx == 0 || tx > n || rx > n {
            return Err(Error::LinkOutOfRange { tx, rx, len: n });
        }
        out.gains[(rx - 1, tx - 1)] = 0.0;
        out.blocked[(rx - 1) * n + (tx - 1)] = true;
    }
    Ok(out)
}

/// Noise spectral density in simulation units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub n0: f64,
}

impl NoiseParams {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0 > 0.0) {
            return Err(Error::InvalidPam(format!("N0 must be positive, got {n0}")));
        }
        Ok(Self { n0 })
    }
}

/// Optical-to-electrical conversion and sampling; `E_s = (r I)^2 T_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalEnergy {
    pub responsivity: f64,
    pub sample_time: f64,
}

impl Default for SignalEnergy {
    fn default() -> Self {
        Self { responsivity: 1.0, sample_time: 1.0 }
    }
}

impl SignalEnergy {
    pub fn symbol_energy(&self, mean_power: f64) -> f64 {
        (self.responsivity * mean_power).powi(2) * self.sample_time
    }
}

/// `N0 = E_b / 10^(Eb/N0 / 10)` with `E_b = E_s / bits`.
pub fn ebn0_to_n0(ebn0_db: f64, symbol_energy: f64, bits_per_block: u32) -> f64 {
    let eb = symbol_energy / bits_per_block.max(1) as f64;
    eb / 10f64.powf(ebn0_db / 10.0)
}

/// `Y = H S + N`, N i.i.d. real Gaussian with variance `N0 / 2`.
pub fn transmit<R: Rng + ?Sized>(signal: &Mat, channel: &Mat, n0: f64, rng: &mut R) -> Result<Mat> {
    let mut y = channel.matmul(signal)?;
    add_noise(&mut y, n0, rng);
    Ok(y)
}

pub fn add_noise<R: Rng + ?Sized>(y: &mut Mat, n0: f64, rng: &mut R) {
    if n0 <= 0.0 {
        return;
    }
    let sigma = (n0 / 2.0).sqrt();
    for v in y.as_mut_slice() {
        let z: f64 = rng.sample(StandardNormal);
        *v += sigma * z;
    }
}

pub fn parse_matrix_text(text: &str) -> Result<Mat> {
    let rows = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| Error::Scenario(format!("bad matrix value `{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Mat::from_rows(&rows)
}

pub fn format_matrix_text(m: &Mat) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.4e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// The 0.2 m spacing channel, verbatim.
pub fn fixture_h02() -> ChannelMatrix {
    ChannelMatrix::new(parse_matrix_text(H02_TEXT).expect("fixture parses")).expect("fixture is valid")
}

/// The 0.6 m spacing channel with anti-diagonal links blocked, verbatim.
pub fn fixture_h06_blocked() -> ChannelMatrix {
    let gains = parse_matrix_text(H06_BLOCKED_TEXT).expect("fixture parses");
    let ch = ChannelMatrix::new(gains).expect("fixture is valid");
    apply_blockage(&ch, &H06_BLOCKED_PAIRS).expect("pairs in range")
}
