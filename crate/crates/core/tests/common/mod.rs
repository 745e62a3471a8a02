#![allow(dead_code)]

use std::collections::HashSet;

use ezw::imageio::{self, GrayImage};
use ezw::wavelet::{Band, CoeffPyramid, Geometry, Orientation};
use ezw::zerotree::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform 8-bit noise.
pub fn noise_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.gen()).unwrap()
}

/// Smooth gradient with a few hard edges and mild noise; has a wavelet
/// spectrum closer to photographs than pure noise.
#[allow(clippy::approx_constant)]
pub fn textured_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    let fx: f64 = rng.gen_range(0.5..3.0);
    let fy: f64 = rng.gen_range(0.5..3.0);
    let edge_r = rng.gen_range(0..height);
    let edge_c = rng.gen_range(0..width);
    let amp: f64 = rng.gen_range(20.0..90.0);
    let mut noise = || rng.gen_range(-6.0..6.0);
    GrayImage::from_fn(width, height, |r, c| {
        let u = r as f64 / height as f64;
        let v = c as f64 / width as f64;
        let mut x = 128.0 + amp * ((fx * 6.28 * u).sin() * (fy * 6.28 * v).cos());
        if r > edge_r && c < edge_c {
            x += 50.0;
        }
        if (r / 4 + c / 4) % 7 == 0 {
            x -= 30.0;
        }
        (x + noise()).round().clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

pub fn camera() -> GrayImage {
    imageio::read_pgm(include_bytes!("../data/camera.pgm")).unwrap()
}

const DETAILS: [Orientation; 3] = [Orientation::HL, Orientation::LH, Orientation::HH];

/// Top-left corner of a subband in the nested layout.
pub fn origin(w: usize, h: usize, level: usize, o: Orientation) -> (usize, usize) {
    let (bh, bw) = (h >> level, w >> level);
    match o {
        Orientation::LL => (0, 0),
        Orientation::HL => (0, bw),
        Orientation::LH => (bh, 0),
        Orientation::HH => (bh, bw),
    }
}

/// Band holding a plane position, found by peeling levels off the finest end.
pub fn locate(w: usize, h: usize, levels: usize, row: usize, col: usize) -> Band {
    for level in 1..=levels {
        let (bh, bw) = (h >> level, w >> level);
        let orientation = match (row >= bh, col >= bw) {
            (false, true) => Orientation::HL,
            (true, false) => Orientation::LH,
            (true, true) => Orientation::HH,
            (false, false) => continue,
        };
        return Band { level, orientation };
    }
    Band {
        level: levels,
        orientation: Orientation::LL,
    }
}

/// Children computed in subband-local coordinates.
pub fn oracle_children(w: usize, h: usize, levels: usize, row: usize, col: usize) -> Vec<(usize, usize)> {
    let band = locate(w, h, levels, row, col);
    let (r0, c0) = origin(w, h, band.level, band.orientation);
    let (i, j) = (row - r0, col - c0);
    match band.orientation {
        Orientation::LL => DETAILS
            .iter()
            .map(|&o| {
                let (r, c) = origin(w, h, levels, o);
                (r + i, c + j)
            })
            .collect(),
        o if band.level > 1 => {
            let (r, c) = origin(w, h, band.level - 1, o);
            let mut out = Vec::new();
            for di in 0..2 {
                for dj in 0..2 {
                    out.push((r + 2 * i + di, c + 2 * j + dj));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Scan order built from the local model: `LL_L`, then HL, LH, HH from
/// coarse to fine.
pub fn oracle_scan(w: usize, h: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut raster = |r0: usize, c0: usize, level: usize| {
        for r in 0..h >> level {
            for c in 0..w >> level {
                out.push((r0 + r, c0 + c));
            }
        }
    };
    raster(0, 0, levels);
    for level in (1..=levels).rev() {
        for o in DETAILS {
            let (r0, c0) = origin(w, h, level, o);
            raster(r0, c0, level);
        }
    }
    out
}

/// Which scheme the reference encoder emulates.
#[derive(Debug, Clone, Copy)]
pub enum RefScheme {
    A,
    B,
    C(usize),
}

impl RefScheme {
    fn skips_after(self, pass: usize) -> bool {
        match self {
            RefScheme::A => true,
            RefScheme::B => false,
            RefScheme::C(drp) => pass >= drp,
        }
    }
}

/// Output of one reference pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RefPass {
    pub symbols: Vec<Symbol>,
    pub bits: Vec<bool>,
    /// Estimate for every position after the pass, row-major.
    pub estimates: Vec<f64>,
}

/// Straightforward set-based EZW encoder: recursion for subtrees, hash sets
/// for state. Shares no code with the library beyond `Symbol`.
pub fn reference_encode(p: &CoeffPyramid, scheme: RefScheme, passes: usize) -> Vec<RefPass> {
    let (w, h, levels) = (p.width(), p.height(), p.levels());
    let max = p.plane().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut t = 1.0f64;
    if max > 0.0 {
        while t * 2.0 <= max {
            t *= 2.0;
        }
        while t > max {
            t /= 2.0;
        }
    }
    let order = oracle_scan(w, h, levels);
    let mut skip: HashSet<(usize, usize)> = HashSet::new();
    let mut significant: HashSet<(usize, usize)> = HashSet::new();
    // (position, negative, low, width)
    let mut list: Vec<((usize, usize), bool, f64, f64)> = Vec::new();
    let mut out = Vec::new();

    fn subtree(w: usize, h: usize, levels: usize, at: (usize, usize), into: &mut Vec<(usize, usize)>) {
        for k in oracle_children(w, h, levels, at.0, at.1) {
            into.push(k);
            subtree(w, h, levels, k, into);
        }
    }

    for pass in 1..=passes {
        if t < 1.0 {
            break;
        }
        let mut covered: HashSet<(usize, usize)> = HashSet::new();
        let mut symbols = Vec::new();
        for &at in &order {
            if significant.contains(&at) || skip.contains(&at) || covered.contains(&at) {
                continue;
            }
            let v = p.get(at.0, at.1);
            let mut desc = Vec::new();
            subtree(w, h, levels, at, &mut desc);
            let symbol = if v.abs() >= t {
                if v > 0.0 {
                    Symbol::Pos
                } else {
                    Symbol::Neg
                }
            } else if desc.iter().any(|&(r, c)| p.get(r, c).abs() >= t) {
                Symbol::Iz
            } else {
                Symbol::Ztr
            };
            match symbol {
                Symbol::Ztr => {
                    covered.extend(desc.iter().copied());
                    if scheme.skips_after(pass) {
                        skip.extend(desc);
                    }
                }
                Symbol::Pos | Symbol::Neg => {
                    significant.insert(at);
                    list.push((at, symbol == Symbol::Neg, t, t));
                }
                Symbol::Iz => {}
            }
            symbols.push(symbol);
        }
        let mut bits = Vec::new();
        for entry in list.iter_mut() {
            let (at, _, low, width) = *entry;
            let upper = p.get(at.0, at.1).abs() >= low + width / 2.0;
            entry.3 = width / 2.0;
            if upper {
                entry.2 = low + width / 2.0;
            }
            bits.push(upper);
        }
        let mut estimates = vec![0.0; w * h];
        for &((r, c), negative, low, width) in &list {
            let m = low + width / 2.0;
            estimates[r * w + c] = if negative { -m } else { m };
        }
        out.push(RefPass {
            symbols,
            bits,
            estimates,
        });
        t /= 2.0;
    }
    out
}

/// Coefficients and expected first-pass symbols from `data/shapiro_8x8.txt`.
pub fn shapiro_fixture() -> (CoeffPyramid, Vec<Symbol>) {
    let text = include_str!("../data/shapiro_8x8.txt");
    let mut values = Vec::new();
    let mut symbols = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("symbols:") {
            for s in rest.split_whitespace() {
                symbols.push(match s {
                    "ZTR" => Symbol::Ztr,
                    "IZ" => Symbol::Iz,
                    "POS" => Symbol::Pos,
                    "NEG" => Symbol::Neg,
                    other => panic!("bad symbol {other}"),
                });
            }
        } else {
            values.extend(line.split_whitespace().map(|v| v.parse::<f64>().unwrap()));
        }
    }
    let g = Geometry::new(8, 8, 3).unwrap();
    (CoeffPyramid::new(g, values).unwrap(), symbols)
}
