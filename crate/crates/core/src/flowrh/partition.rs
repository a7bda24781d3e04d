//! Recursive Toeplitz partition of the restricted-convolution matrix.
//!
//! For `P = 2^p` the matrix `V` (rows/columns indexed from 0) has entries
//! `V_rc = w_{r−c}` when `2c ≤ r + P/2 − 1` and zero otherwise. Its nonzero
//! pattern splits into three square Toeplitz blocks plus two "type-M"
//! matrices of shape `P/2 × P/4`; a type-M matrix `2^{k+1} × 2^k` (nonzero iff
//! `i ≥ 2j + 1`) in turn splits into two square Toeplitz blocks of side
//! `2^{k−1}` and two type-M matrices of half the size, down to `2 × 1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Rectangle `[r0, r0+rows) × [c0, c0+cols)` of the parent matrix.
/// `masked` rectangles are known to be zero and are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockShape {
    pub r0: usize,
    pub c0: usize,
    pub rows: usize,
    pub cols: usize,
    pub masked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMPartition {
    rows: usize,
    cols: usize,
    blocks: Vec<BlockShape>,
}

fn square(r0: usize, c0: usize, m: usize) -> BlockShape {
    BlockShape {
        r0,
        c0,
        rows: m,
        cols: m,
        masked: false,
    }
}

/// Type-M matrix of width `w` (height `2w`) placed at `(r0, c0)`.
fn push_type_m(out: &mut Vec<BlockShape>, r0: usize, c0: usize, w: usize) {
    if w == 1 {
        out.push(BlockShape {
            masked: true,
            ..square(r0, c0, 1)
        });
        out.push(square(r0 + 1, c0, 1));
        return;
    }
    let half = w / 2;
    out.push(square(r0 + w, c0, half));
    out.push(square(r0 + w + half, c0, half));
    push_type_m(out, r0, c0, half);
    push_type_m(out, r0 + w, c0 + half, half);
}

fn check_pow2(n: usize, min: usize) -> Result<()> {
    if n < min || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(n));
    }
    Ok(())
}

impl TypeMPartition {
    /// Partition of a standalone type-M matrix of shape `2w × w`.
    pub fn type_m(w: usize) -> Result<Self> {
        check_pow2(w, 1)?;
        let mut blocks = Vec::new();
        push_type_m(&mut blocks, 0, 0, w);
        Ok(Self {
            rows: 2 * w,
            cols: w,
            blocks,
        })
    }

    /// Partition of `V` for `P ≥ 4` a power of two.
    pub fn for_v(p: usize) -> Result<Self> {
        check_pow2(p, 4)?;
        let (h, q) = (p / 2, p / 4);
        let mut blocks = vec![square(h, 0, h), square(0, 0, q), square(q, 0, q)];
        push_type_m(&mut blocks, 0, q, q);
        push_type_m(&mut blocks, h, h, q);
        Ok(Self {
            rows: p,
            cols: p,
            blocks,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn blocks(&self) -> &[BlockShape] {
        &self.blocks
    }

    /// Number of unmasked blocks of each side length.
    pub fn census(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for b in self.blocks.iter().filter(|b| !b.masked) {
            *m.entry(b.rows).or_insert(0) += 1;
        }
        m
    }
}

/// Whether `(r, c)` is inside the support pattern of `V` of size `p`.
#[inline]
pub fn v_pattern(p: usize, r: usize, c: usize) -> bool {
    2 * c + 1 <= r + p / 2
}
