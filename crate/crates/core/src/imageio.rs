//! 8-bit grayscale images and binary PGM (P5) encoding.

use crate::error::{format_err, invalid, Result};

/// Row-major 8-bit luminance raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("empty image {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(invalid(format!(
                "{} samples supplied for a {width}x{height} image",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                samples.push(f(row, col));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.samples[row * self.width + col]
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| format_err(start, format!("{what} out of range")))
    }
}

/// Parses a binary PGM. Only `P5` with maxval in `1..=255` is accepted.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(format_err(0, "not a binary PGM (expected magic P5)"));
    }
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    if !cursor.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(format_err(2, "missing whitespace after magic"));
    }
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    cursor.skip_whitespace_and_comments();
    let maxval_at = cursor.pos;
    let maxval = cursor.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format_err(maxval_at, format!("unsupported maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(format_err(0, format!("empty image {width}x{height}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(format_err(cursor.pos, "missing whitespace before raster")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| format_err(0, "image dimensions overflow"))?;
    let data = &bytes[cursor.pos..];
    if data.len() < len {
        return Err(format_err(
            bytes.len(),
            format!("short raster: {} of {len} samples", data.len()),
        ));
    }
    let samples = data[..len].to_vec();
    if let Some(bad) = samples.iter().position(|&s| s as usize > maxval) {
        return Err(format_err(cursor.pos + bad, "sample exceeds maxval"));
    }
    GrayImage::new(width, height, samples)
}

/// Canonical P5 serialization: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.samples.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&image.samples);
    out
}
