//! Distortion, size and scan-cost measurements.

use std::time::Duration;

use crate::error::{invalid, Result};
use crate::imageio::GrayImage;
use crate::zerotree::Symbol;

const PEAK: f64 = 255.0;

pub fn mse(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    if (reference.width(), reference.height()) != (test.width(), test.height()) {
        return Err(invalid(format!(
            "cannot compare {}x{} with {}x{}",
            reference.width(),
            reference.height(),
            test.width(),
            test.height()
        )));
    }
    let sum: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum / reference.samples().len() as f64)
}

/// Peak signal-to-noise ratio in dB for 8-bit images. Identical images give
/// `f64::INFINITY`.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

/// Raw size over compressed size.
pub fn compression_ratio(original_bytes: usize, stream_bytes: usize) -> Result<f64> {
    if stream_bytes == 0 {
        return Err(invalid("compressed stream is empty"));
    }
    Ok(original_bytes as f64 / stream_bytes as f64)
}

/// `"inf"` for the identical-image sentinel, otherwise four decimals.
pub fn format_psnr(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{db:.4}")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SymbolCounts {
    pub ztr: u64,
    pub iz: u64,
    pub pos: u64,
    pub neg: u64,
}

impl SymbolCounts {
    pub fn record(&mut self, symbol: Symbol) {
        match symbol {
            Symbol::Ztr => self.ztr += 1,
            Symbol::Iz => self.iz += 1,
            Symbol::Pos => self.pos += 1,
            Symbol::Neg => self.neg += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.ztr + self.iz + self.pos + self.neg
    }
}

/// Cost and output of one encoder pass.
///
/// `coefficient_visits` counts coefficient reads made by the dominant pass:
/// one for each classified coefficient plus one for every descendant read
/// while testing for a zerotree. It is deterministic, unlike the wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStats {
    pub pass_index: usize,
    pub threshold: f64,
    pub coefficient_visits: u64,
    pub symbols: SymbolCounts,
    pub dominant_wall_time: Duration,
    pub subordinate_bits: u64,
    pub cumulative_stream_bytes: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub passes: Vec<PassStats>,
}

impl RunStats {
    /// Dominant-pass visits summed over the first `passes` passes.
    pub fn cumulative_visits(&self, passes: usize) -> u64 {
        self.passes.iter().take(passes).map(|p| p.coefficient_visits).sum()
    }

    pub fn cumulative_symbols(&self, passes: usize) -> u64 {
        self.passes.iter().take(passes).map(|p| p.symbols.total()).sum()
    }

    pub fn cumulative_wall_time(&self, passes: usize) -> Duration {
        self.passes.iter().take(passes).map(|p| p.dominant_wall_time).sum()
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "scheme", "drp", "pass", "threshold", "visits", "ztr", "iz", "pos", "neg", "sub_bits",
    "bytes_cum", "wall_s", "psnr_db",
];

/// One benchmark CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scheme: String,
    pub drp: Option<usize>,
    pub stats: PassStats,
    pub psnr_db: f64,
}

impl CsvRow {
    pub fn fields(&self) -> [String; 13] {
        let s = &self.stats;
        [
            self.scheme.clone(),
            self.drp.map(|d| d.to_string()).unwrap_or_default(),
            s.pass_index.to_string(),
            s.threshold.to_string(),
            s.coefficient_visits.to_string(),
            s.symbols.ztr.to_string(),
            s.symbols.iz.to_string(),
            s.symbols.pos.to_string(),
            s.symbols.neg.to_string(),
            s.subordinate_bits.to_string(),
            s.cumulative_stream_bytes.to_string(),
            format!("{:.6}", s.dominant_wall_time.as_secs_f64()),
            format_psnr(self.psnr_db),
        ]
    }
}
