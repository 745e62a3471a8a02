//! Parent/descendant structure across subbands, the dominant-pass scan
//! order and threshold classification.
//!
//! Every detail coefficient at level `n > 1` parents the 2x2 block at the
//! same orientation one level finer. Each `LL_L` coefficient parents the
//! three coefficients at the same position in `HL_L`, `LH_L` and `HH_L`, so
//! the plane is a forest rooted in `LL_L`.

use std::fmt;

use crate::error::{invalid, Result};
use crate::wavelet::{Band, CoeffPyramid, Geometry, Orientation};

/// Dominant-pass symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Zerotree root: the coefficient and all its descendants are insignificant.
    Ztr,
    /// Isolated zero: insignificant, with at least one significant descendant.
    Iz,
    Pos,
    Neg,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Ztr, Symbol::Iz, Symbol::Pos, Symbol::Neg];

    /// Two-bit wire code.
    pub fn code(self) -> u8 {
        match self {
            Symbol::Ztr => 0b00,
            Symbol::Iz => 0b01,
            Symbol::Pos => 0b10,
            Symbol::Neg => 0b11,
        }
    }

    pub fn from_code(code: u8) -> Symbol {
        match code & 0b11 {
            0b00 => Symbol::Ztr,
            0b01 => Symbol::Iz,
            0b10 => Symbol::Pos,
            _ => Symbol::Neg,
        }
    }

    pub fn is_significant(self) -> bool {
        matches!(self, Symbol::Pos | Symbol::Neg)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Ztr => "ZTR",
            Symbol::Iz => "IZ",
            Symbol::Pos => "POS",
            Symbol::Neg => "NEG",
        })
    }
}

/// Plane position together with the subband holding it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
    pub band: Band,
}

impl Coord {
    pub fn new(geometry: &Geometry, row: usize, col: usize) -> Result<Self> {
        let band = geometry.band_at(row, col)?;
        Ok(Self { row, col, band })
    }

    fn check(&self, geometry: &Geometry) -> Result<()> {
        if geometry.band_at(self.row, self.col)? != self.band {
            return Err(invalid(format!(
                "({}, {}) does not lie in {}",
                self.row, self.col, self.band
            )));
        }
        Ok(())
    }
}

/// Children of `c`: four for detail coefficients above level 1, three for
/// `LL_L` coefficients, none at level 1.
pub fn children(c: &Coord, geometry: &Geometry) -> Result<Vec<Coord>> {
    c.check(geometry)?;
    let levels = geometry.levels();
    let (rows, cols) = geometry.band_size(levels);
    let positions: Vec<(usize, usize)> = match c.band.orientation {
        Orientation::LL => vec![(c.row, c.col + cols), (c.row + rows, c.col), (c.row + rows, c.col + cols)],
        _ if c.band.level == 1 => Vec::new(),
        _ => {
            let (r, k) = (2 * c.row, 2 * c.col);
            vec![(r, k), (r, k + 1), (r + 1, k), (r + 1, k + 1)]
        }
    };
    positions
        .into_iter()
        .map(|(row, col)| Coord::new(geometry, row, col))
        .collect()
}

/// Largest magnitude over all descendants of `c` (excluding `c` itself).
pub fn descendant_max_abs(c: &Coord, pyramid: &CoeffPyramid) -> Result<f64> {
    c.check(&pyramid.geometry())?;
    let tree = TreeIndex::new(pyramid.geometry());
    let root = c.row * pyramid.width() + c.col;
    let mut best = 0.0f64;
    tree.for_each_descendant(root, |idx| best = best.max(pyramid.plane()[idx].abs()));
    Ok(best)
}

/// Classifies `c` against threshold `t`. Significance is `|coef| >= t`.
pub fn classify(c: &Coord, t: f64, pyramid: &CoeffPyramid) -> Result<Symbol> {
    if t.is_nan() || t <= 0.0 {
        return Err(invalid(format!("threshold must be positive, got {t}")));
    }
    let coef = pyramid.get(c.row, c.col);
    if coef.abs() >= t {
        return Ok(if coef > 0.0 { Symbol::Pos } else { Symbol::Neg });
    }
    if descendant_max_abs(c, pyramid)? < t {
        Ok(Symbol::Ztr)
    } else {
        Ok(Symbol::Iz)
    }
}

/// `LL_L`, then `HL`, `LH`, `HH` from the coarsest level to the finest,
/// raster order inside each subband.
pub fn scan_order(geometry: &Geometry) -> Vec<Coord> {
    let mut order = Vec::with_capacity(geometry.len());
    for band in geometry.bands() {
        let r = geometry.region(band).expect("bands() yields stored subbands");
        for row in r.row..r.row + r.rows {
            for col in r.col..r.col + r.cols {
                order.push(Coord { row, col, band });
            }
        }
    }
    order
}

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// Flat-index view of the forest used by the pass engine.
#[derive(Debug, Clone)]
pub(crate) struct TreeIndex {
    width: usize,
    ll_rows: usize,
    ll_cols: usize,
    /// Width of level-1 detail bands; coefficients at or past it in either
    /// axis are leaves.
    leaf_rows: usize,
    leaf_cols: usize,
}

impl TreeIndex {
    pub(crate) fn new(geometry: Geometry) -> Self {
        let (ll_rows, ll_cols) = geometry.band_size(geometry.levels());
        let (leaf_rows, leaf_cols) = geometry.band_size(1);
        Self {
            width: geometry.width(),
            ll_rows,
            ll_cols,
            leaf_rows,
            leaf_cols,
        }
    }

    /// Scan order as flat plane indices.
    pub(crate) fn order(geometry: &Geometry) -> Vec<u32> {
        scan_order(geometry)
            .into_iter()
            .map(|c| (c.row * geometry.width() + c.col) as u32)
            .collect()
    }

    /// Parent index for every plane position (`NO_PARENT` for `LL_L`).
    pub(crate) fn parents(&self, len: usize) -> Vec<u32> {
        (0..len)
            .map(|idx| {
                let (row, col) = (idx / self.width, idx % self.width);
                if row < self.ll_rows && col < self.ll_cols {
                    NO_PARENT
                } else if row < 2 * self.ll_rows && col < 2 * self.ll_cols {
                    let (r, c) = (row % self.ll_rows, col % self.ll_cols);
                    (r * self.width + c) as u32
                } else {
                    ((row / 2) * self.width + col / 2) as u32
                }
            })
            .collect()
    }

    #[inline]
    pub(crate) fn children(&self, idx: usize) -> ([usize; 4], usize) {
        let (row, col) = (idx / self.width, idx % self.width);
        let w = self.width;
        if row < self.ll_rows && col < self.ll_cols {
            let (dr, dc) = (self.ll_rows, self.ll_cols);
            return (
                [idx + dc, (row + dr) * w + col, (row + dr) * w + col + dc, 0],
                3,
            );
        }
        if row >= self.leaf_rows || col >= self.leaf_cols {
            return ([0; 4], 0);
        }
        let top = 2 * row * w + 2 * col;
        ([top, top + 1, top + w, top + w + 1], 4)
    }

    pub(crate) fn for_each_descendant(&self, root: usize, mut visit: impl FnMut(usize)) {
        let mut stack = Vec::with_capacity(64);
        let (kids, n) = self.children(root);
        stack.extend_from_slice(&kids[..n]);
        while let Some(idx) = stack.pop() {
            visit(idx);
            let (kids, n) = self.children(idx);
            stack.extend_from_slice(&kids[..n]);
        }
    }

    /// Depth-first search for a descendant with `|coef| >= t`, stopping at
    /// the first hit. Every coefficient read is added to `reads`.
    pub(crate) fn any_descendant_at_least(
        &self,
        root: usize,
        plane: &[f64],
        t: f64,
        reads: &mut u64,
    ) -> bool {
        let mut stack = Vec::with_capacity(64);
        let (kids, n) = self.children(root);
        stack.extend_from_slice(&kids[..n]);
        while let Some(idx) = stack.pop() {
            *reads += 1;
            if plane[idx].abs() >= t {
                return true;
            }
            let (kids, n) = self.children(idx);
            stack.extend_from_slice(&kids[..n]);
        }
        false
    }
}
