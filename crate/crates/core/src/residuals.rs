//! Integer high-pass residuals.
//!
//! Every residual is a zero-sum stencil evaluated over the valid region only
//! (positions where the full support lies inside the image). Maps remember
//! their origin in image coordinates so that maps with different supports can
//! be aligned for min/max combination.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Compass direction as a `(row, col)` step. North is up (decreasing row).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    E,
    W,
    N,
    S,
    NE,
    NW,
    SE,
    SW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::E,
        Direction::W,
        Direction::N,
        Direction::S,
        Direction::NE,
        Direction::NW,
        Direction::SE,
        Direction::SW,
    ];

    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::E => (0, 1),
            Direction::W => (0, -1),
            Direction::N => (-1, 0),
            Direction::S => (1, 0),
            Direction::NE => (-1, 1),
            Direction::NW => (-1, -1),
            Direction::SE => (1, 1),
            Direction::SW => (1, -1),
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::E => Direction::W,
            Direction::W => Direction::E,
            Direction::N => Direction::S,
            Direction::S => Direction::N,
            Direction::NE => Direction::SW,
            Direction::SW => Direction::NE,
            Direction::NW => Direction::SE,
            Direction::SE => Direction::NW,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::E => "E",
            Direction::W => "W",
            Direction::N => "N",
            Direction::S => "S",
            Direction::NE => "NE",
            Direction::NW => "NW",
            Direction::SE => "SE",
            Direction::SW => "SW",
        }
    }
}

/// Undirected line through the center: horizontal, vertical, diagonal, anti-diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    H,
    V,
    D,
    M,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::H, Axis::V, Axis::D, Axis::M];

    pub fn step(self) -> (isize, isize) {
        match self {
            Axis::H => (0, 1),
            Axis::V => (1, 0),
            Axis::D => (1, 1),
            Axis::M => (1, -1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::H => "h",
            Axis::V => "v",
            Axis::D => "d",
            Axis::M => "m",
        }
    }
}

/// Directional difference residuals of order 1, 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Directional {
    /// `X(+1) - X(0)`, c = 1.
    First(Direction),
    /// `X(-1) + X(+1) - 2 X(0)`, c = 2.
    Second(Axis),
    /// `-X(-1) + 3 X(0) - 3 X(+1) + X(+2)`, c = 3.
    Third(Direction),
}

/// Fixed two-dimensional kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Square3,
    Square5,
    Edge3N,
    Edge3S,
    Edge3E,
    Edge3W,
}

const SQUARE3: [[i32; 3]; 3] = [[-1, 2, -1], [2, -4, 2], [-1, 2, -1]];

const SQUARE5: [[i32; 5]; 5] = [
    [-1, 2, -2, 2, -1],
    [2, -6, 8, -6, 2],
    [-2, 8, -12, 8, -2],
    [2, -6, 8, -6, 2],
    [-1, 2, -2, 2, -1],
];

/// Sparse zero-sum stencil: taps at `(row, col)` offsets from the anchor pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualKernel {
    taps: Vec<(isize, isize, i32)>,
    order: i32,
}

impl ResidualKernel {
    pub fn new(taps: Vec<(isize, isize, i32)>, order: i32) -> Result<Self> {
        if order <= 0 {
            return Err(Error::InvalidArgument(format!(
                "kernel order must be positive, got {order}"
            )));
        }
        if taps.is_empty() || taps.iter().map(|t| t.2).sum::<i32>() != 0 {
            return Err(Error::InvalidArgument(
                "kernel taps must be non-empty and sum to zero".into(),
            ));
        }
        Ok(Self { taps, order })
    }

    pub fn directional(which: Directional) -> Self {
        let taps = match which {
            Directional::First(d) => {
                let (di, dj) = d.step();
                vec![(0, 0, -1), (di, dj, 1)]
            }
            Directional::Second(a) => {
                let (di, dj) = a.step();
                vec![(-di, -dj, 1), (0, 0, -2), (di, dj, 1)]
            }
            Directional::Third(d) => {
                let (di, dj) = d.step();
                vec![(-di, -dj, -1), (0, 0, 3), (di, dj, -3), (2 * di, 2 * dj, 1)]
            }
        };
        let order = match which {
            Directional::First(_) => 1,
            Directional::Second(_) => 2,
            Directional::Third(_) => 3,
        };
        Self { taps, order }
    }

    pub fn fixed(kind: KernelKind) -> Self {
        let mut taps = Vec::new();
        let (grid, order): (Vec<Vec<i32>>, i32) = match kind {
            KernelKind::Square5 => (SQUARE5.iter().map(|r| r.to_vec()).collect(), 12),
            _ => (SQUARE3.iter().map(|r| r.to_vec()).collect(), 4),
        };
        let half = (grid.len() / 2) as isize;
        for (r, row) in grid.iter().enumerate() {
            for (c, &w) in row.iter().enumerate() {
                let (di, dj) = (r as isize - half, c as isize - half);
                let keep = match kind {
                    KernelKind::Square3 | KernelKind::Square5 => true,
                    KernelKind::Edge3N => di <= 0,
                    KernelKind::Edge3S => di >= 0,
                    KernelKind::Edge3E => dj >= 0,
                    KernelKind::Edge3W => dj <= 0,
                };
                if keep && w != 0 {
                    taps.push((di, dj, w));
                }
            }
        }
        Self { taps, order }
    }

    /// The normalizer `c` used as quantization step.
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn taps(&self) -> &[(isize, isize, i32)] {
        &self.taps
    }

    /// Sum of absolute tap weights.
    pub fn l1_norm(&self) -> i32 {
        self.taps.iter().map(|t| t.2.abs()).sum()
    }

    /// `(top, bottom, left, right)` margins lost by valid-region evaluation.
    pub fn margins(&self) -> (usize, usize, usize, usize) {
        let top = self.taps.iter().map(|t| -t.0).max().unwrap_or(0).max(0) as usize;
        let bottom = self.taps.iter().map(|t| t.0).max().unwrap_or(0).max(0) as usize;
        let left = self.taps.iter().map(|t| -t.1).max().unwrap_or(0).max(0) as usize;
        let right = self.taps.iter().map(|t| t.1).max().unwrap_or(0).max(0) as usize;
        (top, bottom, left, right)
    }

    /// Evaluates the stencil over the valid region of `img`.
    pub fn apply(&self, img: &GrayImage) -> Result<ResidualMap> {
        let (top, bottom, left, right) = self.margins();
        let (w, h) = (img.width(), img.height());
        if w <= left + right || h <= top + bottom {
            return Err(Error::DegenerateInput(format!(
                "{w}x{h} image is smaller than the kernel support"
            )));
        }
        let out_w = w - left - right;
        let out_h = h - top - bottom;
        let px = img.pixels();
        // Flattened tap offsets relative to the anchor.
        let taps: Vec<(isize, i32)> = self
            .taps
            .iter()
            .map(|&(di, dj, c)| (di * w as isize + dj, c))
            .collect();
        let mut values = Vec::with_capacity(out_w * out_h);
        for i in 0..out_h {
            let row_base = ((i + top) * w + left) as isize;
            for j in 0..out_w {
                let anchor = row_base + j as isize;
                let mut acc = 0i32;
                for &(off, c) in &taps {
                    acc += c * px[(anchor + off) as usize] as i32;
                }
                values.push(acc);
            }
        }
        Ok(ResidualMap {
            values,
            width: out_w,
            height: out_h,
            origin_row: top,
            origin_col: left,
        })
    }
}

/// Signed residuals over a rectangular region of the source image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualMap {
    values: Vec<i32>,
    width: usize,
    height: usize,
    origin_row: usize,
    origin_col: usize,
}

impl ResidualMap {
    pub fn new(
        width: usize,
        height: usize,
        origin: (usize, usize),
        values: Vec<i32>,
    ) -> Result<Self> {
        if width * height != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} residuals do not fill {width}x{height}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            width,
            height,
            origin_row: origin.0,
            origin_col: origin.1,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Image coordinates `(row, col)` of the first value.
    pub fn origin(&self) -> (usize, usize) {
        (self.origin_row, self.origin_col)
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.values[row * self.width + col]
    }

    /// Sub-rectangle given in image coordinates; must lie inside this map.
    pub fn crop(&self, origin: (usize, usize), width: usize, height: usize) -> ResidualMap {
        let r0 = origin.0 - self.origin_row;
        let c0 = origin.1 - self.origin_col;
        assert!(r0 + height <= self.height && c0 + width <= self.width);
        let mut values = Vec::with_capacity(width * height);
        for i in 0..height {
            let start = (r0 + i) * self.width + c0;
            values.extend_from_slice(&self.values[start..start + width]);
        }
        ResidualMap {
            values,
            width,
            height,
            origin_row: origin.0,
            origin_col: origin.1,
        }
    }

    /// Writes a plain-text grid: `R2`, `width height`, `origin_row origin_col`,
    /// then one line of space-separated signed values per row.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "R2")?;
        writeln!(out, "{} {}", self.width, self.height)?;
        writeln!(out, "{} {}", self.origin_row, self.origin_col)?;
        for row in self.values.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn directional_residual(img: &GrayImage, which: Directional) -> Result<ResidualMap> {
    ResidualKernel::directional(which).apply(img)
}

pub fn kernel_residual(img: &GrayImage, kind: KernelKind) -> Result<ResidualMap> {
    ResidualKernel::fixed(kind).apply(img)
}

/// Pointwise min and max over maps cropped to their common region.
pub fn min_max(maps: &[ResidualMap]) -> Result<(ResidualMap, ResidualMap)> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("min/max over an empty set".into()))?;
    let mut r0 = first.origin_row;
    let mut c0 = first.origin_col;
    let mut r1 = first.origin_row + first.height;
    let mut c1 = first.origin_col + first.width;
    for m in &maps[1..] {
        r0 = r0.max(m.origin_row);
        c0 = c0.max(m.origin_col);
        r1 = r1.min(m.origin_row + m.height);
        c1 = c1.min(m.origin_col + m.width);
    }
    if r1 <= r0 || c1 <= c0 {
        return Err(Error::DegenerateInput(
            "residual maps share no common region".into(),
        ));
    }
    let (w, h) = (c1 - c0, r1 - r0);
    let cropped: Vec<ResidualMap> = maps.iter().map(|m| m.crop((r0, c0), w, h)).collect();
    let mut lo = cropped[0].values.clone();
    let mut hi = lo.clone();
    for m in &cropped[1..] {
        for ((l, u), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(&m.values) {
            *l = (*l).min(v);
            *u = (*u).max(v);
        }
    }
    Ok((
        ResidualMap::new(w, h, (r0, c0), lo)?,
        ResidualMap::new(w, h, (r0, c0), hi)?,
    ))
}
