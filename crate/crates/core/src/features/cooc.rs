use crate::error::{Error, Result};

use super::quantize::QuantizedResidualMap;

/// Number of bins of a fourth-order co-occurrence over `{-2..2}`.
pub const BINS: usize = 625;

/// Scan direction for sliding windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scan {
    Horizontal,
    Vertical,
}

/// Counts of quadruples `(d1, d2, d3, d4)`, indexed lexicographically with
/// `d1` most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoocHistogram {
    counts: Vec<u64>,
    group_count: u64,
}

impl Default for CoocHistogram {
    fn default() -> Self {
        Self {
            counts: vec![0; BINS],
            group_count: 0,
        }
    }
}

impl CoocHistogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn group_count(&self) -> u64 {
        self.group_count
    }

    pub fn get(&self, quad: [i8; 4]) -> u64 {
        self.counts[quad_index(quad)]
    }

    /// Adds a single observation; used to build histograms by hand.
    pub fn record(&mut self, quad: [i8; 4]) {
        self.counts[quad_index(quad)] += 1;
        self.group_count += 1;
    }

    /// Accumulates another histogram into this one.
    pub fn merge(&mut self, other: &CoocHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.group_count += other.group_count;
    }
}

#[inline]
pub fn quad_index(q: [i8; 4]) -> usize {
    q.iter()
        .fold(0usize, |acc, &d| acc * 5 + (d as i32 + 2) as usize)
}

#[inline]
pub fn quad_from_index(mut idx: usize) -> [i8; 4] {
    let mut q = [0i8; 4];
    for slot in q.iter_mut().rev() {
        *slot = (idx % 5) as i8 - 2;
        idx /= 5;
    }
    q
}

/// Slides a length-4 window with stride 1 along every row or column.
pub fn cooccurrence4(qmap: &QuantizedResidualMap, scan: Scan) -> Result<CoocHistogram> {
    if qmap.threshold() != 2 {
        return Err(Error::InvalidInput(format!(
            "co-occurrence expects truncation 2, got {}",
            qmap.threshold()
        )));
    }
    let (w, h) = (qmap.width(), qmap.height());
    let along = match scan {
        Scan::Horizontal => w,
        Scan::Vertical => h,
    };
    if along < 4 || w == 0 || h == 0 {
        return Err(Error::DegenerateInput(format!(
            "{w}x{h} map has no full co-occurrence window"
        )));
    }
    let shifted: Vec<usize> = qmap.values().iter().map(|&v| (v + 2) as usize).collect();
    let mut hist = CoocHistogram::default();
    let (step, lines, line_stride, windows) = match scan {
        Scan::Horizontal => (1, h, w, w - 3),
        Scan::Vertical => (w, w, 1, h - 3),
    };
    for line in 0..lines {
        let base = line * line_stride;
        for k in 0..windows {
            let p = base + k * step;
            let idx = ((shifted[p] * 5 + shifted[p + step]) * 5 + shifted[p + 2 * step]) * 5
                + shifted[p + 3 * step];
            hist.counts[idx] += 1;
        }
    }
    hist.group_count = (lines * windows) as u64;
    Ok(hist)
}
