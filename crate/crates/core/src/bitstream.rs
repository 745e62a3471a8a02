//! `EZW1` container: fixed header followed by one record per pass.
//!
//! ```text
//! magic "EZW1" | width u32 | height u32 | levels u8 | bank u8 | scheme u8 |
//! drp u8 | T0 exponent i16 | pass count u8
//! per pass: symbol count u32 | 2-bit symbols, MSB-first, byte padded |
//!           refinement bit count u32 | bits, MSB-first, byte padded
//! ```
//!
//! Multi-byte integers are little-endian. A file cut at a pass boundary is a
//! valid stream with fewer passes; a file cut inside a pass parses as the
//! complete passes before the cut.

use crate::codec::Scheme;
use crate::error::{format_err, Result};
use crate::wavelet::BankId;
use crate::zerotree::Symbol;

pub const MAGIC: &[u8; 4] = b"EZW1";
pub const HEADER_LEN: usize = 19;

/// Largest accepted width or height.
pub const MAX_DIMENSION: u32 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub width: u32,
    pub height: u32,
    pub levels: u8,
    pub bank: BankId,
    pub scheme: Scheme,
    /// Detail retaining pass; 0 unless the scheme is C.
    pub drp: u8,
    /// `T0 = 2^t0_exponent`.
    pub t0_exponent: i16,
    pub pass_count: u8,
}

impl Header {
    pub fn initial_threshold(&self) -> f64 {
        2f64.powi(self.t0_exponent as i32)
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.push(self.levels);
        out.push(self.bank.code());
        out.push(self.scheme.code());
        out.push(self.drp);
        out.extend_from_slice(&self.t0_exponent.to_le_bytes());
        out.push(self.pass_count);
    }

    pub fn parse(bytes: &[u8]) -> Result<Header> {
        if bytes.len() < HEADER_LEN {
            return Err(format_err(
                bytes.len(),
                format!("header needs {HEADER_LEN} bytes, found {}", bytes.len()),
            ));
        }
        if &bytes[..4] != MAGIC {
            return Err(format_err(0, "bad magic (expected EZW1)"));
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let width = u32_at(4);
        let height = u32_at(8);
        let levels = bytes[12];
        let bank = BankId::from_code(bytes[13])
            .ok_or_else(|| format_err(13, format!("unknown filter bank id {}", bytes[13])))?;
        let scheme = Scheme::from_code(bytes[14])
            .ok_or_else(|| format_err(14, format!("unknown scheme id {}", bytes[14])))?;
        let drp = bytes[15];
        let t0_exponent = i16::from_le_bytes([bytes[16], bytes[17]]);
        let pass_count = bytes[18];

        for (value, at, what) in [(width, 4, "width"), (height, 8, "height")] {
            if value == 0 || value > MAX_DIMENSION {
                return Err(format_err(at, format!("{what} {value} out of range")));
            }
        }
        if levels == 0 || levels > 15 {
            return Err(format_err(12, format!("decomposition depth {levels} out of range")));
        }
        let block = 1u32 << levels;
        if width % block != 0 || height % block != 0 {
            return Err(format_err(
                12,
                format!("{width}x{height} is not divisible by 2^{levels}"),
            ));
        }
        match (scheme, drp) {
            (Scheme::C, 0) => return Err(format_err(15, "scheme C requires a detail retaining pass")),
            (Scheme::A | Scheme::B, d) if d != 0 => {
                return Err(format_err(15, format!("drp {d} given for scheme {scheme}")))
            }
            _ => {}
        }
        if !(-1074..=1023).contains(&t0_exponent) {
            return Err(format_err(16, format!("threshold exponent {t0_exponent} out of range")));
        }
        // passes stop once the threshold drops below 1
        let max_passes = if t0_exponent < 0 { 0 } else { (t0_exponent as i32 + 1).min(255) };
        if pass_count as i32 > max_passes || (t0_exponent >= 0 && pass_count == 0) {
            return Err(format_err(
                18,
                format!("pass count {pass_count} inconsistent with threshold 2^{t0_exponent}"),
            ));
        }
        Ok(Header {
            width,
            height,
            levels,
            bank,
            scheme,
            drp,
            t0_exponent,
            pass_count,
        })
    }
}

/// Output of one encoder pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PassRecord {
    pub symbols: Vec<Symbol>,
    pub refinement_bits: Vec<bool>,
}

impl PassRecord {
    pub fn encoded_len(&self) -> usize {
        4 + self.symbols.len().div_ceil(4) + 4 + self.refinement_bits.len().div_ceil(8)
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.symbols.len() as u32).to_le_bytes());
        out.extend(pack_symbols(&self.symbols));
        out.extend_from_slice(&(self.refinement_bits.len() as u32).to_le_bytes());
        out.extend(pack_bits(&self.refinement_bits));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EzwBitstream {
    pub header: Header,
    pub passes: Vec<PassRecord>,
}

/// A parsed stream plus whether the bytes ended before the header's pass count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedStream {
    pub stream: EzwBitstream,
    pub truncated: bool,
}

impl EzwBitstream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        self.header.write(&mut out);
        for pass in &self.passes {
            pass.write(&mut out);
        }
        out
    }

    pub fn byte_len(&self) -> usize {
        self.byte_len_through(self.passes.len())
    }

    /// Size of the header plus the first `passes` pass records.
    pub fn byte_len_through(&self, passes: usize) -> usize {
        HEADER_LEN + self.passes[..passes.min(self.passes.len())]
            .iter()
            .map(PassRecord::encoded_len)
            .sum::<usize>()
    }

    pub fn parse(bytes: &[u8]) -> Result<ParsedStream> {
        let header = Header::parse(bytes)?;
        let mut pos = HEADER_LEN;
        let mut passes = Vec::with_capacity(header.pass_count as usize);
        let mut truncated = false;
        for _ in 0..header.pass_count {
            match read_pass(bytes, &mut pos) {
                Some(pass) => passes.push(pass),
                None => {
                    truncated = true;
                    break;
                }
            }
        }
        if !truncated && pos != bytes.len() {
            return Err(format_err(pos, format!("{} trailing bytes", bytes.len() - pos)));
        }
        Ok(ParsedStream {
            stream: EzwBitstream { header, passes },
            truncated,
        })
    }
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    let raw = bytes.get(*pos..*pos + 4)?;
    *pos += 4;
    Some(u32::from_le_bytes(raw.try_into().unwrap()))
}

fn read_pass(bytes: &[u8], pos: &mut usize) -> Option<PassRecord> {
    let mut p = *pos;
    let n_symbols = read_u32(bytes, &mut p)? as usize;
    let packed = bytes.get(p..p.checked_add(n_symbols.div_ceil(4))?)?;
    p += packed.len();
    let symbols = unpack_symbols(packed, n_symbols);
    let n_bits = read_u32(bytes, &mut p)? as usize;
    let packed = bytes.get(p..p.checked_add(n_bits.div_ceil(8))?)?;
    p += packed.len();
    let refinement_bits = unpack_bits(packed, n_bits);
    *pos = p;
    Some(PassRecord {
        symbols,
        refinement_bits,
    })
}

/// Four symbols per byte, first symbol in the two high bits.
pub fn pack_symbols(symbols: &[Symbol]) -> Vec<u8> {
    symbols
        .chunks(4)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, s)| acc | (s.code() << (6 - 2 * i)))
        })
        .collect()
}

pub fn unpack_symbols(packed: &[u8], count: usize) -> Vec<Symbol> {
    (0..count)
        .map(|i| Symbol::from_code(packed[i / 4] >> (6 - 2 * (i % 4))))
        .collect()
}

/// Eight bits per byte, MSB-first.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}

pub fn unpack_bits(packed: &[u8], count: usize) -> Vec<bool> {
    (0..count)
        .map(|i| packed[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect()
}
