//! Embedded zerotree encoder and decoder with scheduled descendant skipping.
//!
//! Every pass runs a dominant pass at threshold `T` followed by a
//! subordinate (refinement) pass, then halves `T`. The three schemes differ
//! only in which coefficients the dominant pass may look at:
//!
//! * **A**: descendants of a zerotree root are put in a permanent skip set
//!   and never examined again.
//! * **B**: nothing is skipped across passes; every insignificant
//!   coefficient is re-examined at each new threshold.
//! * **C**: behaves as B up to and including the detail retaining pass
//!   (`drp`), then as A. The zerotrees found in pass `drp` seed the skip
//!   set used from pass `drp + 1` on.
//!
//! Within a single pass, descendants of a zerotree root are never coded
//! regardless of scheme.
//!
//! The decoder drives the same [`EncoderState`] machine from the symbols and
//! bits it reads, so both sides hold bit-identical reconstructions after
//! every pass.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bitstream::{EzwBitstream, Header, PassRecord, HEADER_LEN};
use crate::error::{format_err, invalid, Error, Result};
use crate::imageio::GrayImage;
use crate::metrics::{PassStats, RunStats, SymbolCounts};
use crate::wavelet::{self, BankId, CoeffPyramid, Geometry};
use crate::zerotree::{Coord, Symbol, TreeIndex, NO_PARENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    A,
    B,
    C,
}

impl Scheme {
    pub fn code(self) -> u8 {
        match self {
            Scheme::A => 0,
            Scheme::B => 1,
            Scheme::C => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Scheme::A),
            1 => Some(Scheme::B),
            2 => Some(Scheme::C),
            _ => None,
        }
    }

    /// Whether zerotree descendants found in `pass` join the skip set.
    pub fn records_skips(self, drp: usize, pass: usize) -> bool {
        match self {
            Scheme::A => true,
            Scheme::B => false,
            Scheme::C => pass >= drp,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::A => "A",
            Scheme::B => "B",
            Scheme::C => "C",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scheme::A),
            "B" | "b" => Ok(Scheme::B),
            "C" | "c" => Ok(Scheme::C),
            _ => Err(invalid(format!("unknown scheme {s:?} (expected A, B or C)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub scheme: Scheme,
    /// Detail retaining pass; only read for scheme C.
    pub drp: usize,
    pub num_passes: usize,
    pub levels: usize,
    pub bank: BankId,
}

impl EncoderConfig {
    pub fn new(scheme: Scheme, drp: usize, num_passes: usize, levels: usize, bank: BankId) -> Result<Self> {
        let cfg = Self {
            scheme,
            drp,
            num_passes,
            levels,
            bank,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_passes == 0 || self.num_passes > u8::MAX as usize {
            return Err(invalid(format!("pass count {} not in 1..=255", self.num_passes)));
        }
        if self.levels == 0 || self.levels > 15 {
            return Err(invalid(format!("decomposition depth {} not in 1..=15", self.levels)));
        }
        if self.scheme == Scheme::C && !(1..=self.num_passes).contains(&self.drp) {
            return Err(invalid(format!(
                "scheme C needs 1 <= drp <= {} (got {})",
                self.num_passes, self.drp
            )));
        }
        Ok(())
    }

    fn header_drp(&self) -> u8 {
        match self.scheme {
            Scheme::C => self.drp as u8,
            _ => 0,
        }
    }
}

/// Largest power of two not above `max |coef|`, as an exponent. An all-zero
/// pyramid gives 0 (`T0 = 1`).
pub fn initial_threshold_exponent(pyramid: &CoeffPyramid) -> i32 {
    let max = pyramid.max_abs();
    if max == 0.0 {
        return 0;
    }
    let mut e = max.log2().floor() as i32;
    while e > -1074 && 2f64.powi(e) > max {
        e -= 1;
    }
    while e < 1023 && 2f64.powi(e + 1) <= max {
        e += 1;
    }
    e
}

pub fn initial_threshold(pyramid: &CoeffPyramid) -> f64 {
    2f64.powi(initial_threshold_exponent(pyramid))
}

/// A coefficient on the subordinate list and its magnitude interval
/// `[low, low + width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinateEntry {
    pub index: usize,
    pub negative: bool,
    pub low: f64,
    pub width: f64,
}

impl SubordinateEntry {
    pub fn estimate(&self) -> f64 {
        let m = self.low + self.width / 2.0;
        if self.negative {
            -m
        } else {
            m
        }
    }
}

/// State shared by the encoder and the mirroring decoder.
#[derive(Debug, Clone)]
pub struct EncoderState {
    geometry: Geometry,
    tree: TreeIndex,
    order: Vec<u32>,
    parents: Vec<u32>,
    threshold: f64,
    pass_index: usize,
    significant: Vec<bool>,
    skipped: Vec<bool>,
    subordinate: Vec<SubordinateEntry>,
    reconstruction: Vec<f64>,
    // per-pass scratch: 0 = open, 1 = zerotree root, 2 = below a root
    marks: Vec<u8>,
}

impl EncoderState {
    pub fn new(geometry: Geometry, initial_threshold: f64) -> Self {
        let len = geometry.len();
        let tree = TreeIndex::new(geometry);
        Self {
            order: TreeIndex::order(&geometry),
            parents: tree.parents(len),
            tree,
            geometry,
            threshold: initial_threshold,
            pass_index: 1,
            significant: vec![false; len],
            skipped: vec![false; len],
            subordinate: Vec::new(),
            reconstruction: vec![0.0; len],
            marks: vec![0; len],
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// 1-based index of the pass about to run.
    pub fn pass_index(&self) -> usize {
        self.pass_index
    }

    pub fn significance_map(&self) -> &[bool] {
        &self.significant
    }

    pub fn skip_set(&self) -> &[bool] {
        &self.skipped
    }

    pub fn subordinate_list(&self) -> &[SubordinateEntry] {
        &self.subordinate
    }

    pub fn reconstruction_map(&self) -> &[f64] {
        &self.reconstruction
    }

    pub fn reconstruction(&self) -> CoeffPyramid {
        CoeffPyramid::new(self.geometry, self.reconstruction.clone())
            .expect("estimates are finite and sized to the geometry")
    }

    /// Halves the threshold and moves to the next pass.
    pub fn finish_pass(&mut self) {
        self.threshold /= 2.0;
        self.pass_index += 1;
    }

    /// Walks the scan order, asking `classify` for a symbol at every
    /// coefficient that still needs one.
    fn walk_dominant(
        &mut self,
        record_skips: bool,
        mut classify: impl FnMut(usize) -> Result<Symbol>,
        mut emit: impl FnMut(usize, Symbol),
    ) -> Result<()> {
        let t = self.threshold;
        self.marks.iter_mut().for_each(|m| *m = 0);
        for &idx in &self.order {
            let idx = idx as usize;
            if self.significant[idx] || self.skipped[idx] {
                continue;
            }
            let parent = self.parents[idx];
            if parent != NO_PARENT && self.marks[parent as usize] != 0 {
                self.marks[idx] = 2;
                if record_skips {
                    self.skipped[idx] = true;
                }
                continue;
            }
            let symbol = classify(idx)?;
            match symbol {
                Symbol::Ztr => self.marks[idx] = 1,
                Symbol::Iz => {}
                Symbol::Pos | Symbol::Neg => {
                    let entry = SubordinateEntry {
                        index: idx,
                        negative: symbol == Symbol::Neg,
                        low: t,
                        width: t,
                    };
                    self.significant[idx] = true;
                    self.reconstruction[idx] = entry.estimate();
                    self.subordinate.push(entry);
                }
            }
            emit(idx, symbol);
        }
        Ok(())
    }

    /// Halves every interval on the subordinate list using `bit(i, entry)`,
    /// which reports whether the magnitude lies in the upper half.
    fn walk_subordinate(&mut self, mut bit: impl FnMut(usize, &SubordinateEntry) -> bool) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.subordinate.len());
        for (i, entry) in self.subordinate.iter_mut().enumerate() {
            let upper = bit(i, entry);
            entry.width /= 2.0;
            if upper {
                entry.low += entry.width;
            }
            self.reconstruction[entry.index] = entry.estimate();
            bits.push(upper);
        }
        bits
    }
}

/// Result of one dominant pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantOutcome {
    pub symbols: Vec<Symbol>,
    pub newly_significant: Vec<Coord>,
    pub stats: PassStats,
}

/// Runs the dominant pass for `state.pass_index()` under `cfg`'s scheme.
pub fn dominant_pass(state: &mut EncoderState, pyramid: &CoeffPyramid, cfg: &EncoderConfig) -> Result<DominantOutcome> {
    if pyramid.geometry() != state.geometry {
        return Err(invalid("pyramid geometry does not match the encoder state"));
    }
    let t = state.threshold;
    let pass = state.pass_index;
    let record = cfg.scheme.records_skips(cfg.drp, pass);
    let plane = pyramid.plane();
    let tree = state.tree.clone();

    let mut visits = 0u64;
    let mut counts = SymbolCounts::default();
    let mut symbols = Vec::new();
    let mut newly = Vec::new();
    let started = Instant::now();
    state.walk_dominant(
        record,
        |idx| {
            visits += 1;
            let coef = plane[idx];
            Ok(if coef.abs() >= t {
                if coef > 0.0 {
                    Symbol::Pos
                } else {
                    Symbol::Neg
                }
            } else if tree.any_descendant_at_least(idx, plane, t, &mut visits) {
                Symbol::Iz
            } else {
                Symbol::Ztr
            })
        },
        |idx, symbol| {
            counts.record(symbol);
            symbols.push(symbol);
            if symbol.is_significant() {
                newly.push(idx);
            }
        },
    )?;
    let elapsed = started.elapsed();

    let geometry = state.geometry;
    let newly_significant = newly
        .into_iter()
        .map(|idx| Coord::new(&geometry, idx / geometry.width(), idx % geometry.width()))
        .collect::<Result<_>>()?;
    Ok(DominantOutcome {
        symbols,
        newly_significant,
        stats: PassStats {
            pass_index: pass,
            threshold: t,
            coefficient_visits: visits,
            symbols: counts,
            dominant_wall_time: elapsed,
            subordinate_bits: 0,
            cumulative_stream_bytes: 0,
        },
    })
}

/// One refinement bit per subordinate-list entry: 1 when the magnitude lies
/// in the upper half of its interval (the midpoint counts as upper).
pub fn subordinate_pass(state: &mut EncoderState, pyramid: &CoeffPyramid) -> Vec<bool> {
    let plane = pyramid.plane();
    state.walk_subordinate(|_, entry| plane[entry.index].abs() >= entry.low + entry.width / 2.0)
}

/// Pass-by-pass encoder over a fixed pyramid.
#[derive(Debug, Clone)]
pub struct Encoder {
    pyramid: CoeffPyramid,
    cfg: EncoderConfig,
    state: EncoderState,
    t0_exponent: i32,
    passes_done: usize,
    bytes_so_far: usize,
}

impl Encoder {
    pub fn new(pyramid: CoeffPyramid, cfg: EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        if pyramid.levels() != cfg.levels {
            return Err(invalid(format!(
                "pyramid has {} levels, config asks for {}",
                pyramid.levels(),
                cfg.levels
            )));
        }
        if pyramid.width() > crate::bitstream::MAX_DIMENSION as usize
            || pyramid.height() > crate::bitstream::MAX_DIMENSION as usize
        {
            return Err(invalid("image too large for the EZW1 container"));
        }
        let t0_exponent = initial_threshold_exponent(&pyramid);
        let state = EncoderState::new(pyramid.geometry(), 2f64.powi(t0_exponent));
        Ok(Self {
            pyramid,
            cfg,
            state,
            t0_exponent,
            passes_done: 0,
            bytes_so_far: HEADER_LEN,
        })
    }

    pub fn state(&self) -> &EncoderState {
        &self.state
    }

    pub fn pyramid(&self) -> &CoeffPyramid {
        &self.pyramid
    }

    pub fn t0_exponent(&self) -> i32 {
        self.t0_exponent
    }

    pub fn is_finished(&self) -> bool {
        self.passes_done >= self.cfg.num_passes || self.state.threshold < 1.0
    }

    /// Runs the next pass, or returns `None` once the configured pass count
    /// is reached or the threshold has dropped below 1.
    pub fn step(&mut self) -> Result<Option<(PassRecord, PassStats)>> {
        if self.is_finished() {
            return Ok(None);
        }
        let outcome = dominant_pass(&mut self.state, &self.pyramid, &self.cfg)?;
        let bits = subordinate_pass(&mut self.state, &self.pyramid);
        self.state.finish_pass();
        self.passes_done += 1;

        let record = PassRecord {
            symbols: outcome.symbols,
            refinement_bits: bits,
        };
        self.bytes_so_far += record.encoded_len();
        let stats = PassStats {
            subordinate_bits: record.refinement_bits.len() as u64,
            cumulative_stream_bytes: self.bytes_so_far,
            ..outcome.stats
        };
        Ok(Some((record, stats)))
    }

    fn header(&self, pass_count: usize) -> Header {
        Header {
            width: self.pyramid.width() as u32,
            height: self.pyramid.height() as u32,
            levels: self.cfg.levels as u8,
            bank: self.cfg.bank,
            scheme: self.cfg.scheme,
            drp: self.cfg.header_drp(),
            t0_exponent: self.t0_exponent as i16,
            pass_count: pass_count as u8,
        }
    }

    /// Runs all remaining passes.
    pub fn finish(mut self) -> Result<(EzwBitstream, RunStats)> {
        let mut passes = Vec::new();
        let mut stats = RunStats::default();
        while let Some((record, pass_stats)) = self.step()? {
            passes.push(record);
            stats.passes.push(pass_stats);
        }
        let header = self.header(passes.len());
        Ok((EzwBitstream { header, passes }, stats))
    }
}

pub fn encode(image: &GrayImage, cfg: &EncoderConfig) -> Result<(EzwBitstream, RunStats)> {
    cfg.validate()?;
    let pyramid = wavelet::forward_dwt_2d(image, cfg.levels, &cfg.bank.bank())?;
    encode_pyramid(pyramid, cfg)
}

pub fn encode_pyramid(pyramid: CoeffPyramid, cfg: &EncoderConfig) -> Result<(EzwBitstream, RunStats)> {
    Encoder::new(pyramid, *cfg)?.finish()
}

/// Mirrors the encoder from a parsed stream.
#[derive(Debug, Clone)]
pub struct Decoder {
    header: Header,
    state: EncoderState,
    passes_done: usize,
}

impl Decoder {
    pub fn new(header: Header) -> Result<Self> {
        let geometry = Geometry::new(header.width as usize, header.height as usize, header.levels as usize)
            .map_err(|e| format_err(4, e.to_string()))?;
        Ok(Self {
            state: EncoderState::new(geometry, header.initial_threshold()),
            header,
            passes_done: 0,
        })
    }

    pub fn state(&self) -> &EncoderState {
        &self.state
    }

    pub fn passes_done(&self) -> usize {
        self.passes_done
    }

    pub fn apply(&mut self, record: &PassRecord) -> Result<()> {
        let pass = self.state.pass_index;
        let record_skips = self.header.scheme.records_skips(self.header.drp as usize, pass);
        let mut next = record.symbols.iter().copied();
        let mut consumed = 0usize;
        self.state.walk_dominant(
            record_skips,
            |_| {
                consumed += 1;
                next.next()
                    .ok_or_else(|| format_err(0, format!("pass {pass}: too few dominant symbols")))
            },
            |_, _| {},
        )?;
        if consumed != record.symbols.len() {
            return Err(format_err(
                0,
                format!(
                    "pass {pass}: {} dominant symbols stored, {consumed} expected",
                    record.symbols.len()
                ),
            ));
        }
        if record.refinement_bits.len() != self.state.subordinate.len() {
            return Err(format_err(
                0,
                format!(
                    "pass {pass}: {} refinement bits stored, {} expected",
                    record.refinement_bits.len(),
                    self.state.subordinate.len()
                ),
            ));
        }
        self.state.walk_subordinate(|i, _| record.refinement_bits[i]);
        self.state.finish_pass();
        self.passes_done += 1;
        Ok(())
    }

    pub fn image(&self) -> Result<GrayImage> {
        wavelet::inverse_dwt_2d(&self.state.reconstruction(), &self.header.bank.bank())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub image: GrayImage,
    pub header: Header,
    pub passes_decoded: usize,
    /// The bytes ended inside a pass; only complete passes were used.
    pub truncated: bool,
    /// Decoded image after each pass, when requested.
    pub progressive: Vec<GrayImage>,
    /// Coefficient estimates after the last decoded pass.
    pub reconstruction: CoeffPyramid,
}

/// Decodes up to `max_passes` passes (all when `None`).
pub fn decode(bytes: &[u8], max_passes: Option<usize>) -> Result<Decoded> {
    decode_with(bytes, max_passes, false)
}

/// Like [`decode`] but also keeps the image after every pass.
pub fn decode_progressive(bytes: &[u8], max_passes: Option<usize>) -> Result<Decoded> {
    decode_with(bytes, max_passes, true)
}

fn decode_with(bytes: &[u8], max_passes: Option<usize>, keep_all: bool) -> Result<Decoded> {
    let parsed = EzwBitstream::parse(bytes)?;
    let stream = parsed.stream;
    let mut decoder = Decoder::new(stream.header)?;
    let limit = max_passes.unwrap_or(usize::MAX).min(stream.passes.len());
    let mut progressive = Vec::new();
    for record in &stream.passes[..limit] {
        decoder.apply(record)?;
        if keep_all {
            progressive.push(decoder.image()?);
        }
    }
    Ok(Decoded {
        image: decoder.image()?,
        header: stream.header,
        passes_decoded: limit,
        truncated: parsed.truncated,
        progressive,
        reconstruction: decoder.state.reconstruction(),
    })
}
