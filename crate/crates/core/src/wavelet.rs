//! Multilevel 2-D discrete wavelet transform over orthonormal two-channel
//! filter banks with periodic extension.
//!
//! The coefficient plane uses the usual nested layout: after `L` levels the
//! approximation `LL_L` sits in the top-left `(w/2^L)x(h/2^L)` corner, and for
//! every level `n` the horizontal detail `HL_n` lies to the right of the
//! level-`n` approximation region, the vertical detail `LH_n` below it and the
//! diagonal detail `HH_n` across the diagonal.

use std::fmt;

use crate::error::{invalid, Result};
use crate::imageio::GrayImage;

/// Offset subtracted from 8-bit samples before analysis.
pub const CENTER: f64 = 128.0;

const BANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BankId {
    Haar,
    Daub4,
}

impl BankId {
    pub fn code(self) -> u8 {
        match self {
            BankId::Haar => 0,
            BankId::Daub4 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BankId::Haar),
            1 => Some(BankId::Daub4),
            _ => None,
        }
    }

    pub fn bank(self) -> FilterBank {
        match self {
            BankId::Haar => FilterBank::haar(),
            BankId::Daub4 => FilterBank::daub4(),
        }
    }
}

impl fmt::Display for BankId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BankId::Haar => "haar",
            BankId::Daub4 => "daub4",
        })
    }
}

/// Orthonormal analysis pair. Synthesis reuses the same taps (transpose).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    name: String,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl FilterBank {
    /// Builds a bank from its low-pass taps, deriving the high-pass branch by
    /// the quadrature-mirror rule `g(k) = (-1)^k h(N-1-k)`.
    pub fn from_lowpass(name: impl Into<String>, lowpass: Vec<f64>) -> Result<Self> {
        let n = lowpass.len();
        let highpass = (0..n)
            .map(|k| {
                let v = lowpass[n - 1 - k];
                if k % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Self::new(name, lowpass, highpass)
    }

    pub fn new(name: impl Into<String>, lowpass: Vec<f64>, highpass: Vec<f64>) -> Result<Self> {
        let n = lowpass.len();
        if n < 2 || !n.is_multiple_of(2) || highpass.len() != n {
            return Err(invalid(format!(
                "filter taps must have equal even length >= 2 (got {} and {})",
                n,
                highpass.len()
            )));
        }
        if lowpass.iter().chain(&highpass).any(|t| !t.is_finite()) {
            return Err(invalid("non-finite filter tap"));
        }
        for m in 0..n / 2 {
            let shift = 2 * m;
            let auto: f64 = (0..n - shift).map(|k| lowpass[k] * lowpass[k + shift]).sum();
            let expected = if m == 0 { 1.0 } else { 0.0 };
            if (auto - expected).abs() > BANK_TOLERANCE {
                return Err(invalid(format!(
                    "low-pass taps are not orthonormal at shift {shift} (got {auto})"
                )));
            }
        }
        for k in 0..n {
            let mirrored = if k % 2 == 0 { lowpass[n - 1 - k] } else { -lowpass[n - 1 - k] };
            if (highpass[k] - mirrored).abs() > BANK_TOLERANCE {
                return Err(invalid(format!("high-pass tap {k} breaks the mirror relation")));
            }
        }
        Ok(Self {
            name: name.into(),
            lowpass,
            highpass,
        })
    }

    pub fn haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_lowpass("haar", vec![s, s]).expect("haar taps are orthonormal")
    }

    pub fn daub4() -> Self {
        let r3 = 3f64.sqrt();
        let d = 4.0 * std::f64::consts::SQRT_2;
        let taps = vec![(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d];
        Self::from_lowpass("daub4", taps).expect("daub4 taps are orthonormal")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// One analysis stage: periodic filtering followed by keeping even
    /// indices. `low` and `high` receive `signal.len() / 2` values each.
    pub fn analyze(&self, signal: &[f64], low: &mut [f64], high: &mut [f64]) {
        let n = signal.len();
        let half = n / 2;
        debug_assert!(n.is_multiple_of(2) && low.len() == half && high.len() == half);
        for i in 0..half {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for (k, (&h, &g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                let x = signal[(2 * i + k) % n];
                lo += h * x;
                hi += g * x;
            }
            low[i] = lo;
            high[i] = hi;
        }
    }

    /// Inverse of [`FilterBank::analyze`]: zero-interleaved branches passed
    /// through the synthesis pair and summed.
    pub fn synthesize(&self, low: &[f64], high: &[f64], out: &mut [f64]) {
        let n = out.len();
        debug_assert!(low.len() * 2 == n && high.len() * 2 == n);
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..low.len() {
            for (k, (&h, &g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                out[(2 * i + k) % n] += h * low[i] + g * high[i];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    LL,
    HL,
    LH,
    HH,
}

/// A subband: decomposition level (1 = finest) and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Band {
    pub level: usize,
    pub orientation: Orientation,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}", self.orientation, self.level)
    }
}

/// Rectangle inside the coefficient plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Region {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row && row < self.row + self.rows && col >= self.col && col < self.col + self.cols
    }
}

/// Shape of a decomposed plane: image size plus depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    width: usize,
    height: usize,
    levels: usize,
}

impl Geometry {
    pub fn new(width: usize, height: usize, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(invalid("decomposition depth must be at least 1"));
        }
        if levels >= usize::BITS as usize - 1 {
            return Err(invalid(format!("decomposition depth {levels} is too large")));
        }
        let block = 1usize << levels;
        if width == 0 || height == 0 || !width.is_multiple_of(block) || !height.is_multiple_of(block) {
            return Err(invalid(format!(
                "{width}x{height} is not divisible by 2^{levels}"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of one level-`n` detail band (also of `LL_n`).
    pub fn band_size(&self, level: usize) -> (usize, usize) {
        (self.height >> level, self.width >> level)
    }

    /// All `3L + 1` subbands, coarsest first: `LL_L`, then `HL`, `LH`, `HH`
    /// from level `L` down to 1.
    pub fn bands(&self) -> Vec<Band> {
        let mut bands = vec![Band {
            level: self.levels,
            orientation: Orientation::LL,
        }];
        for level in (1..=self.levels).rev() {
            for orientation in [Orientation::HL, Orientation::LH, Orientation::HH] {
                bands.push(Band { level, orientation });
            }
        }
        bands
    }

    pub fn region(&self, band: Band) -> Result<Region> {
        if band.level == 0 || band.level > self.levels {
            return Err(invalid(format!("{band} is outside a {}-level plane", self.levels)));
        }
        if band.orientation == Orientation::LL && band.level != self.levels {
            return Err(invalid(format!("only LL_{} is stored", self.levels)));
        }
        let (rows, cols) = self.band_size(band.level);
        let (row, col) = match band.orientation {
            Orientation::LL => (0, 0),
            Orientation::HL => (0, cols),
            Orientation::LH => (rows, 0),
            Orientation::HH => (rows, cols),
        };
        Ok(Region {
            row,
            col,
            rows,
            cols,
        })
    }

    /// Subband containing plane position `(row, col)`.
    pub fn band_at(&self, row: usize, col: usize) -> Result<Band> {
        if row >= self.height || col >= self.width {
            return Err(invalid(format!(
                "({row}, {col}) is outside the {}x{} plane",
                self.width, self.height
            )));
        }
        for level in 1..=self.levels {
            let (rows, cols) = self.band_size(level);
            let low_row = row < rows;
            let low_col = col < cols;
            let orientation = match (low_row, low_col) {
                (true, true) => continue,
                (true, false) => Orientation::HL,
                (false, true) => Orientation::LH,
                (false, false) => Orientation::HH,
            };
            return Ok(Band { level, orientation });
        }
        Ok(Band {
            level: self.levels,
            orientation: Orientation::LL,
        })
    }
}

/// Multilevel wavelet coefficients in the nested layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPyramid {
    geometry: Geometry,
    plane: Vec<f64>,
}

impl CoeffPyramid {
    pub fn new(geometry: Geometry, plane: Vec<f64>) -> Result<Self> {
        if plane.len() != geometry.len() {
            return Err(invalid(format!(
                "{} coefficients for a {}x{} plane",
                plane.len(),
                geometry.width,
                geometry.height
            )));
        }
        if plane.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite coefficient"));
        }
        Ok(Self { geometry, plane })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        Self {
            plane: vec![0.0; geometry.len()],
            geometry,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn levels(&self) -> usize {
        self.geometry.levels
    }

    pub fn plane(&self) -> &[f64] {
        &self.plane
    }

    pub fn plane_mut(&mut self) -> &mut [f64] {
        &mut self.plane
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.plane[row * self.geometry.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.plane[row * self.geometry.width + col] = value;
    }

    pub fn energy(&self) -> f64 {
        self.plane.iter().map(|c| c * c).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.plane.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficients of one subband in raster order.
    pub fn band_values(&self, band: Band) -> Result<Vec<f64>> {
        let r = self.geometry.region(band)?;
        Ok((r.row..r.row + r.rows)
            .flat_map(|row| (r.col..r.col + r.cols).map(move |col| (row, col)))
            .map(|(row, col)| self.get(row, col))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    Down,
    Up,
}

/// Dyadic down-sampling (keep even indices) or up-sampling (a zero after
/// every sample).
pub fn dyadic_resample(signal: &[f64], direction: Resample) -> Result<Vec<f64>> {
    match direction {
        Resample::Down => {
            if !signal.len().is_multiple_of(2) {
                return Err(invalid(format!(
                    "cannot down-sample odd length {}",
                    signal.len()
                )));
            }
            Ok(signal.iter().step_by(2).copied().collect())
        }
        Resample::Up => Ok(signal.iter().flat_map(|&v| [v, 0.0]).collect()),
    }
}

/// Forward transform of 8-bit samples, centered by [`CENTER`].
pub fn forward_dwt_2d(image: &GrayImage, levels: usize, bank: &FilterBank) -> Result<CoeffPyramid> {
    let centered: Vec<f64> = image.samples().iter().map(|&s| s as f64 - CENTER).collect();
    forward_dwt_2d_real(&centered, image.width(), image.height(), levels, bank)
}

/// Forward transform of an arbitrary real-valued raster (no centering).
pub fn forward_dwt_2d_real(
    samples: &[f64],
    width: usize,
    height: usize,
    levels: usize,
    bank: &FilterBank,
) -> Result<CoeffPyramid> {
    let geometry = Geometry::new(width, height, levels)?;
    let mut pyramid = CoeffPyramid::new(geometry, samples.to_vec())?;
    let mut line = Vec::new();
    let mut low = Vec::new();
    let mut high = Vec::new();
    for level in 0..levels {
        let rows = height >> level;
        let cols = width >> level;
        let plane = &mut pyramid.plane;

        line.resize(cols, 0.0);
        low.resize(cols / 2, 0.0);
        high.resize(cols / 2, 0.0);
        for r in 0..rows {
            let start = r * width;
            line.copy_from_slice(&plane[start..start + cols]);
            bank.analyze(&line, &mut low, &mut high);
            plane[start..start + cols / 2].copy_from_slice(&low);
            plane[start + cols / 2..start + cols].copy_from_slice(&high);
        }

        line.resize(rows, 0.0);
        low.resize(rows / 2, 0.0);
        high.resize(rows / 2, 0.0);
        for c in 0..cols {
            for r in 0..rows {
                line[r] = plane[r * width + c];
            }
            bank.analyze(&line, &mut low, &mut high);
            for r in 0..rows / 2 {
                plane[r * width + c] = low[r];
                plane[(r + rows / 2) * width + c] = high[r];
            }
        }
    }
    Ok(pyramid)
}

/// Exact inverse of [`forward_dwt_2d_real`]: real raster, still centered.
pub fn inverse_dwt_2d_real(pyramid: &CoeffPyramid, bank: &FilterBank) -> Vec<f64> {
    let Geometry {
        width,
        height,
        levels,
    } = pyramid.geometry;
    let mut plane = pyramid.plane.clone();
    let mut line = Vec::new();
    let mut low = Vec::new();
    let mut high = Vec::new();
    for level in (0..levels).rev() {
        let rows = height >> level;
        let cols = width >> level;

        line.resize(rows, 0.0);
        low.resize(rows / 2, 0.0);
        high.resize(rows / 2, 0.0);
        for c in 0..cols {
            for r in 0..rows / 2 {
                low[r] = plane[r * width + c];
                high[r] = plane[(r + rows / 2) * width + c];
            }
            bank.synthesize(&low, &high, &mut line);
            for r in 0..rows {
                plane[r * width + c] = line[r];
            }
        }

        line.resize(cols, 0.0);
        low.resize(cols / 2, 0.0);
        high.resize(cols / 2, 0.0);
        for r in 0..rows {
            let start = r * width;
            low.copy_from_slice(&plane[start..start + cols / 2]);
            high.copy_from_slice(&plane[start + cols / 2..start + cols]);
            bank.synthesize(&low, &high, &mut line);
            plane[start..start + cols].copy_from_slice(&line);
        }
    }
    plane
}

/// Rounds half away from zero after adding [`CENTER`], then clamps to 8 bits.
pub fn to_sample(centered: f64) -> u8 {
    (centered + CENTER).round().clamp(0.0, 255.0) as u8
}

pub fn inverse_dwt_2d(pyramid: &CoeffPyramid, bank: &FilterBank) -> Result<GrayImage> {
    let real = inverse_dwt_2d_real(pyramid, bank);
    GrayImage::new(
        pyramid.width(),
        pyramid.height(),
        real.into_iter().map(to_sample).collect(),
    )
}
