use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Matrix-free access to `A` and `A^T`, as needed by LSMR.
pub trait LinearOperator<T: Real>: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x`
    fn apply(&self, x: &[T], out: &mut [T]);
    /// `out = A^T y`
    fn apply_transpose(&self, y: &[T], out: &mut [T]);
    fn all_finite(&self) -> bool;
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

// Below this many entries the work is not worth splitting across threads.
const PAR_THRESHOLD: usize = 1 << 16;
const COL_CHUNK: usize = 512;

impl<T: Real> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::InvalidInput(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    fn big(&self) -> bool {
        self.data.len() >= PAR_THRESHOLD
    }
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    // Scaled to avoid overflow on large entries.
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let sum = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * sum.sqrt()
}

impl<T: Real> LinearOperator<T> for DenseMatrix<T> {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        if self.cols == 0 {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        if self.big() {
            out.par_iter_mut()
                .zip(self.data.par_chunks_exact(self.cols))
                .for_each(|(o, row)| *o = dot(row, x));
        } else {
            for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
                *o = dot(row, x);
            }
        }
    }

    fn apply_transpose(&self, y: &[T], out: &mut [T]) {
        assert_eq!(y.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        let cols = self.cols;
        let fill = |start: usize, chunk: &mut [T]| {
            chunk.iter_mut().for_each(|o| *o = T::zero());
            for (i, &yi) in y.iter().enumerate() {
                let row = &self.data[i * cols + start..i * cols + start + chunk.len()];
                for (o, &a) in chunk.iter_mut().zip(row) {
                    *o = *o + a * yi;
                }
            }
        };
        if self.big() {
            out.par_chunks_mut(COL_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| fill(c * COL_CHUNK, chunk));
        } else {
            fill(0, out);
        }
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
