//! Toeplitz blocks and their fast products by circulant embedding.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{fft_forward, fft_inverse};

/// Below this many entries a dense product is cheaper than three FFTs.
const DENSE_CUTOFF: usize = 64;

/// `T_{ij} = first_column[i − j]` for `i ≥ j`, `first_row[j − i]` otherwise.
/// `offset` locates the block inside a parent matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzBlock {
    pub first_column: Vec<Complex64>,
    pub first_row: Vec<Complex64>,
    pub offset: (usize, usize),
}

impl ToeplitzBlock {
    pub fn new(
        first_column: Vec<Complex64>,
        first_row: Vec<Complex64>,
        offset: (usize, usize),
    ) -> Result<Self> {
        if first_column.is_empty() || first_row.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if first_column[0] != first_row[0] {
            return Err(Error::InvalidConfig(
                "Toeplitz first row and column disagree on the diagonal".into(),
            ));
        }
        Ok(Self {
            first_column,
            first_row,
            offset,
        })
    }

    /// Block whose diagonal `d = i − j` carries `symbol(d)`.
    pub fn from_symbol(
        rows: usize,
        cols: usize,
        offset: (usize, usize),
        symbol: impl Fn(i64) -> Complex64,
    ) -> Self {
        Self {
            first_column: (0..rows).map(|d| symbol(d as i64)).collect(),
            first_row: (0..cols).map(|d| symbol(-(d as i64))).collect(),
            offset,
        }
    }

    pub fn rows(&self) -> usize {
        self.first_column.len()
    }

    pub fn cols(&self) -> usize {
        self.first_row.len()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.first_column[i - j]
        } else {
            self.first_row[j - i]
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

fn dense_multiply(block: &ToeplitzBlock, x: &[Complex64]) -> Vec<Complex64> {
    (0..block.rows())
        .map(|i| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| block.entry(i, j) * v)
                .sum()
        })
        .collect()
}

/// `T x` in `O(M log M)` via a power-of-two circulant of size `≥ rows + cols − 1`.
pub fn toeplitz_multiply(block: &ToeplitzBlock, x: &[Complex64]) -> Result<Vec<Complex64>> {
    let (rows, cols) = (block.rows(), block.cols());
    if x.len() != cols {
        return Err(Error::LengthMismatch {
            expected: cols,
            actual: x.len(),
        });
    }
    if rows * cols <= DENSE_CUTOFF {
        return Ok(dense_multiply(block, x));
    }
    let len = (rows + cols - 1).next_power_of_two();
    let zero = Complex64::new(0.0, 0.0);
    let mut c = vec![zero; len];
    c[..rows].copy_from_slice(&block.first_column);
    for d in 1..cols {
        c[len - d] = block.first_row[d];
    }
    let mut xp = vec![zero; len];
    xp[..cols].copy_from_slice(x);
    fft_forward(&mut c);
    fft_forward(&mut xp);
    for (a, b) in xp.iter_mut().zip(&c) {
        *a *= b;
    }
    fft_inverse(&mut xp);
    let scale = 1.0 / len as f64;
    Ok(xp[..rows].iter().map(|v| v * scale).collect())
}
