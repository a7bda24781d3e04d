//! Index-restricted convolutions `S_n = Σ_{k+j=n, k²≥j²} w_k z_j`.
//!
//! Inputs and outputs are *centred* arrays of even length `L`: slot `i` holds
//! index `i − (L/2 − 1)`, i.e. the window `−L/2+1 ..= L/2`. Sums are taken
//! over that window and outputs outside it are dropped.

use num_complex::Complex64;

use super::partition::TypeMPartition;
use super::toeplitz::{toeplitz_multiply, ToeplitzBlock};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{fft_forward, fft_inverse};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[inline]
fn centre(len: usize) -> i64 {
    (len / 2) as i64 - 1
}

fn check_pair(w: &[Complex64], z: &[Complex64]) -> Result<()> {
    if w.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            actual: z.len(),
        });
    }
    if w.len() < 2 || w.len() % 2 != 0 {
        return Err(Error::InvalidGrid(w.len()));
    }
    Ok(())
}

/// Re-centre into a longer (zero-padded) window.
fn pad(x: &[Complex64], len: usize) -> Vec<Complex64> {
    let shift = (centre(len) - centre(x.len())) as usize;
    let mut out = vec![ZERO; len];
    out[shift..shift + x.len()].copy_from_slice(x);
    out
}

fn unpad(x: &[Complex64], len: usize) -> Vec<Complex64> {
    let shift = (centre(x.len()) - centre(len)) as usize;
    x[shift..shift + len].to_vec()
}

/// Unrestricted `Σ_{k+j=n} w_k z_j` on the window, by FFT.
pub fn full_convolution(w: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    check_pair(w, z)?;
    let l = w.len();
    let m = (2 * l).next_power_of_two();
    let mut a = vec![ZERO; m];
    let mut b = vec![ZERO; m];
    a[..l].copy_from_slice(w);
    b[..l].copy_from_slice(z);
    fft_forward(&mut a);
    fft_forward(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_inverse(&mut a);
    // Linear index i carries n = i − 2·centre; window n needs i = n + 2c.
    let c = centre(l);
    let scale = 1.0 / m as f64;
    Ok((0..l).map(|s| a[(s as i64 + c) as usize] * scale).collect())
}

/// `S⁺_n = Σ_{k+j=n, k≥j} w_k z_j` for every `n` in the window, through the
/// block-Toeplitz partition of `V`. Non-power-of-two lengths are padded.
pub fn restricted_conv_plus(w: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    check_pair(w, z)?;
    let l = w.len();
    let p = l.next_power_of_two().max(4);
    if p != l {
        let out = restricted_conv_plus(&pad(w, p), &pad(z, p))?;
        return Ok(unpad(&out, l));
    }
    let c = centre(p);
    // V_rc = w_{r−c}; the centred slot of index d is d + c.
    let symbol = |d: i64| -> Complex64 {
        let s = d + c;
        if (0..p as i64).contains(&s) {
            w[s as usize]
        } else {
            ZERO
        }
    };
    let part = TypeMPartition::for_v(p)?;
    let live: Vec<_> = part
        .blocks()
        .iter()
        .filter(|b| !b.masked)
        .copied()
        .collect();
    let pieces = par::map_items(&live, |b| {
        let d0 = b.r0 as i64 - b.c0 as i64;
        let block = ToeplitzBlock::from_symbol(b.rows, b.cols, (b.r0, b.c0), |d| symbol(d0 + d));
        toeplitz_multiply(&block, &z[b.c0..b.c0 + b.cols]).map(|y| (b.r0, y))
    });
    let mut out = vec![ZERO; p];
    for piece in pieces {
        let (r0, y) = piece?;
        for (o, v) in out[r0..].iter_mut().zip(y) {
            *o += v;
        }
    }
    Ok(out)
}

/// `S⁻_n = Σ_{k+j=n, k<j} w_k z_j`, as the full convolution minus `S⁺`.
pub fn restricted_conv_minus(w: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    let full = full_convolution(w, z)?;
    let plus = restricted_conv_plus(w, z)?;
    Ok(full.iter().zip(&plus).map(|(f, p)| f - p).collect())
}

/// `S_n = Σ_{k+j=n, k²≥j²} w_k z_j`.
///
/// For `n > 0` the constraint reads `k ≥ j`; for `n < 0` it reads `k ≤ j`, so
/// the diagonal `k = j = n/2` must be added back to `S⁻`; for `n = 0` every
/// pair has `k² = j²` and the whole convolution counts.
pub fn restricted_conv(w: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    let full = full_convolution(w, z)?;
    let plus = restricted_conv_plus(w, z)?;
    let c = centre(w.len());
    Ok((0..w.len())
        .map(|s| {
            let n = s as i64 - c;
            match n {
                n if n > 0 => plus[s],
                0 => full[s],
                n => {
                    let mut v = full[s] - plus[s];
                    if n % 2 == 0 {
                        let d = (n / 2 + c) as usize;
                        v += w[d] * z[d];
                    }
                    v
                }
            }
        })
        .collect())
}

/// `O(L²)` reference for [`restricted_conv`] with an arbitrary predicate.
pub fn restricted_conv_naive(
    w: &[Complex64],
    z: &[Complex64],
    keep: impl Fn(i64, i64) -> bool,
) -> Vec<Complex64> {
    let l = w.len();
    let c = centre(l);
    let mut out = vec![ZERO; l];
    for (a, &wk) in w.iter().enumerate() {
        for (b, &zj) in z.iter().enumerate() {
            let (k, j) = (a as i64 - c, b as i64 - c);
            let s = k + j + c;
            if (0..l as i64).contains(&s) && keep(k, j) {
                out[s as usize] += wk * zj;
            }
        }
    }
    out
}
