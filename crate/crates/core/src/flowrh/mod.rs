//! Fast low-regularity Hasimoto (FLowRH) transform and Scheme B.
//!
//! Over one step the first Magnus term needs `∫u_x` and `∫|u|²`. Both are
//! approximated by resonance-aware quadratures built from the endpoint
//! states only: `Q1` is a pair of Fourier multipliers, `Q2` an
//! index-restricted convolution evaluated through the block-Toeplitz
//! partition in [`partition`].

pub mod conv;
pub mod partition;
pub mod toeplitz;

use num_complex::Complex64;

pub use conv::{
    full_convolution, restricted_conv, restricted_conv_minus, restricted_conv_naive,
    restricted_conv_plus,
};
pub use partition::{BlockShape, TypeMPartition};
pub use toeplitz::{toeplitz_multiply, ToeplitzBlock};

use crate::error::Result;
use crate::frame::Frame;
use crate::lowreg::{run_lowreg_counted, LowRegConfig};
use crate::magnus::{apply_rotations, exp_so3, SkewMatrixField};
use crate::spectral::{phi1_imag, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `Q1 = hφ1(ih∂²)(e^{−ih∂²}∂_xu⁺ + ∂_xu)/2`.
pub fn quadrature_q1(u_m: &SpectralField, u_next: &SpectralField, h: f64) -> Result<SpectralField> {
    u_m.check_same_grid(u_next)?;
    let twisted = u_next.derivative().free_propagator(-h);
    Ok(twisted
        .add(&u_m.derivative())?
        .phi1_propagator(h, 1.0)
        .scale(Complex64::new(0.5 * h, 0.0)))
}

/// Mode weights of the two `Q2` sums, indexed by wavenumber.
struct Q2Weights {
    /// First sum (`k1² ≥ k2²`): factor carried by `k1`.
    w1: Vec<Complex64>,
    /// First sum: factor carried by `k2`.
    z1: Vec<Complex64>,
    /// Second sum (`k1² < k2²`).
    w2: Vec<Complex64>,
    z2: Vec<Complex64>,
}

fn q2_weights(u_m: &SpectralField, u_next: &SpectralField, h: f64) -> Q2Weights {
    let g = u_m.grid();
    let n = g.n_modes();
    let (mut w1, mut z1, mut w2, mut z2) =
        (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    for i in 0..n {
        let k2 = (g.wavenumber(i) * g.wavenumber(i)) as f64;
        let (a, b) = (u_next.coeffs()[i], u_m.coeffs()[i]);
        let twist = Complex64::from_polar(1.0, h * k2);
        w1[i] = h * phi1_imag(-h * k2) * (twist * a + b) * 0.5;
        z1[i] = (a.conj() + b.conj()) * 0.5;
        w2[i] = (a + b) * 0.5;
        z2[i] = h * phi1_imag(h * k2) * (twist * a + b).conj() * 0.5;
    }
    Q2Weights { w1, z1, w2, z2 }
}

/// `Q2` by literal evaluation of both double sums (`O(N²)`).
pub fn quadrature_q2_naive(
    u_m: &SpectralField,
    u_next: &SpectralField,
    h: f64,
) -> Result<SpectralField> {
    u_m.check_same_grid(u_next)?;
    let g = u_m.grid();
    let q = q2_weights(u_m, u_next, h);
    let mut out = SpectralField::zeros(g);
    for i1 in 0..g.n_modes() {
        let k1 = g.wavenumber(i1);
        for i2 in 0..g.n_modes() {
            let k2 = g.wavenumber(i2);
            let Some(slot) = g.slot(k1 - k2) else {
                continue;
            };
            let term = if k1 * k1 >= k2 * k2 {
                q.w1[i1] * q.z1[i2]
            } else {
                q.w2[i1] * q.z2[i2]
            };
            out.coeffs_mut()[slot] += term;
        }
    }
    Ok(out)
}

/// Same sums as [`quadrature_q2_naive`] in `O(N log²N)`.
///
/// With `j = −k2` both sums become convolutions in `(k1, j)`; the first is
/// restricted to `k1² ≥ j²` and the second is the full convolution minus the
/// same restriction. `j` ranges over `−N/2 ..= N/2−1`, so the kernel runs on
/// a window of twice the (power-of-two rounded) size.
pub fn quadrature_q2_fast(
    u_m: &SpectralField,
    u_next: &SpectralField,
    h: f64,
) -> Result<SpectralField> {
    u_m.check_same_grid(u_next)?;
    let g = u_m.grid();
    let q = q2_weights(u_m, u_next, h);
    let p = 2 * g.n_modes().next_power_of_two();
    let c = (p / 2) as i64 - 1;
    let centred = |x: &[Complex64], reflect: bool| -> Vec<Complex64> {
        let mut out = vec![ZERO; p];
        for (i, v) in x.iter().enumerate() {
            let k = g.wavenumber(i);
            let idx = if reflect { -k } else { k };
            out[(idx + c) as usize] = *v;
        }
        out
    };
    let first = restricted_conv(&centred(&q.w1, false), &centred(&q.z1, true))?;
    let (w2, z2) = (centred(&q.w2, false), centred(&q.z2, true));
    let all = full_convolution(&w2, &z2)?;
    let res = restricted_conv(&w2, &z2)?;
    let mut out = SpectralField::zeros(g);
    for i in 0..g.n_modes() {
        let s = (g.wavenumber(i) + c) as usize;
        out.coeffs_mut()[i] = first[s] + all[s] - res[s];
    }
    Ok(out)
}

/// Largest `|Im Q2(x_n)|`, the part discarded when forming the skew matrix.
pub fn q2_realness_defect(q2: &SpectralField) -> f64 {
    q2.to_values()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max)
}

/// The exponent of one FLowRH step:
/// `[[0, −Im Q1, Re Q1], [Im Q1, 0, −½Re Q2], [−Re Q1, ½Re Q2, 0]]`.
pub fn assemble_flowrh(
    u_m: &SpectralField,
    u_next: &SpectralField,
    h: f64,
) -> Result<SkewMatrixField> {
    let q1 = quadrature_q1(u_m, u_next, h)?.to_values();
    let q2 = quadrature_q2_fast(u_m, u_next, h)?.to_values();
    Ok(SkewMatrixField {
        a: q1.iter().map(|z| z.im).collect(),
        b: q1.iter().map(|z| z.re).collect(),
        c: q2.iter().map(|z| 0.5 * z.re).collect(),
    })
}

pub fn scheme_b_step(
    frame: &Frame,
    u_m: &SpectralField,
    u_next: &SpectralField,
    h: f64,
) -> Result<Frame> {
    if u_m.grid() != frame.grid() {
        return Err(crate::Error::GridMismatch {
            left: frame.grid().n_modes(),
            right: u_m.grid().n_modes(),
        });
    }
    let omega = assemble_flowrh(u_m, u_next, h)?;
    apply_rotations(frame, &exp_so3(&omega))
}

/// Output of [`scheme_b_run`].
#[derive(Debug, Clone)]
pub struct SchemeBTrajectory {
    pub frames: Vec<Frame>,
    /// NLS states at `t_m = mh`.
    pub states: Vec<SpectralField>,
    /// Fixed-point iterations per NLS step.
    pub iterations: Vec<usize>,
}

/// Scheme B: low-regularity NLS states, consumed pairwise by FLowRH steps.
pub fn scheme_b_run(
    frame0: &Frame,
    u0: &SpectralField,
    h: f64,
    n_steps: usize,
    config: &LowRegConfig,
) -> Result<SchemeBTrajectory> {
    let (states, iterations) = run_lowreg_counted(u0, h, n_steps, config)?;
    let mut frames = Vec::with_capacity(n_steps + 1);
    frames.push(frame0.clone());
    for m in 0..n_steps {
        let next = scheme_b_step(&frames[m], &states[m], &states[m + 1], h)?;
        frames.push(next);
    }
    Ok(SchemeBTrajectory {
        frames,
        states,
        iterations,
    })
}
