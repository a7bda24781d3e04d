//! Periodic pseudo-spectral foundation on 𝕋 = ℝ/2πℤ.
//!
//! Coefficients are trigonometric-series coefficients, `u(x) = Σ û_k e^{ikx}`,
//! stored in FFT order: slot `i` holds wavenumber `i` for `i ≤ N/2` and
//! `i − N` above that, so the window is `k ∈ {−N/2+1, …, N/2}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

type PlanKey = (usize, bool);

fn plan_cache() -> &'static RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared FFT plan of length `n`. Plans are cached process-wide.
pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    if let Some(p) = plan_cache().read().unwrap().get(&(n, inverse)) {
        return Arc::clone(p);
    }
    let mut cache = plan_cache().write().unwrap();
    Arc::clone(cache.entry((n, inverse)).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    }))
}

/// In-place unnormalized forward transform.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    fft_plan(buf.len(), false).process(buf);
}

/// In-place unnormalized inverse transform.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    fft_plan(buf.len(), true).process(buf);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes < 2 || n_modes % 2 != 0 {
            return Err(Error::InvalidGrid(n_modes));
        }
        Ok(Self { n: n_modes })
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Wavenumber held in storage slot `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage slot of wavenumber `k`, if it lies in the window.
    #[inline]
    pub fn slot(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k > n / 2 || k <= -n / 2 {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + n) as usize)
        }
    }

    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }
}

/// `φ1(z) = (e^z − 1)/z`, `φ1(0) = 1`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        // Truncation error ~ |z|^4/120.
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `φ1(iy)` for real `y`, written without cancellation.
#[inline]
pub fn phi1_imag(y: f64) -> Complex64 {
    if y == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = (0.5 * y).sin();
    Complex64::new(y.sin() / y, 2.0 * s * s / y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Wrap coefficients given in FFT order.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    pub fn from_values(grid: TorusGrid, values: &[Complex64]) -> Result<Self> {
        grid.check_len(values.len())?;
        let mut buf = values.to_vec();
        fft_forward(&mut buf);
        let scale = 1.0 / grid.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { grid, coeffs: buf })
    }

    pub fn from_real_values(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_values(grid, &v)
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let v: Vec<Complex64> = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, &v).expect("length matches by construction")
    }

    pub fn to_values(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft_inverse(&mut buf);
        buf
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k` (zero outside the window).
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .slot(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        if let Some(i) = self.grid.slot(k) {
            self.coeffs[i] = value;
        }
    }

    /// Multiply mode `k` by `m(k)`.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex64 + Sync + Send) -> Self {
        let grid = self.grid;
        let coeffs = par::map_indices(grid.n, |i| self.coeffs[i] * m(grid.wavenumber(i)));
        Self { grid, coeffs }
    }

    /// `∂_x`: mode `k` times `ik`, with the Nyquist mode dropped.
    pub fn derivative(&self) -> Self {
        let half = (self.grid.n / 2) as i64;
        self.apply_multiplier(|k| {
            if k == half {
                Complex64::new(0.0, 0.0)
            } else {
                I * k as f64
            }
        })
    }

    /// `e^{it∂²}`: mode `k` times `e^{−itk²}`.
    pub fn free_propagator(&self, t: f64) -> Self {
        self.apply_multiplier(|k| Complex64::from_polar(1.0, -t * (k * k) as f64))
    }

    /// `φ1(sign·it∂²)`: mode `k` times `φ1(−sign·itk²)`.
    pub fn phi1_propagator(&self, t: f64, sign: f64) -> Self {
        self.apply_multiplier(|k| phi1_imag(-sign * t * (k * k) as f64))
    }

    /// `(Σ_k (1 + |k|^{2s}) |û_k|²)^{1/2}`; the `k = 0` weight is 1 for every `s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.grid.wavenumber(i).unsigned_abs() as f64;
                let w = if k == 0.0 { 1.0 } else { 1.0 + k.powf(2.0 * s) };
                w * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Field of the pointwise complex conjugate: `k ↦ conj(û_{−k})`, with the
    /// Nyquist mode mapped to itself.
    pub fn conj(&self) -> Self {
        let n = self.grid.n;
        let coeffs = (0..n).map(|i| self.coeffs[(n - i) % n].conj()).collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Pointwise map in physical space.
    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> Self {
        let vals = self.to_values();
        let out = par::map_indices(vals.len(), |i| f(vals[i]));
        Self::from_values(self.grid, &out).expect("same length")
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Fourier truncation (or zero extension) onto another grid.
    pub fn resample(&self, grid: TorusGrid) -> Self {
        let mut out = Self::zeros(grid);
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c = self.coeff(grid.wavenumber(i));
        }
        out
    }
}

/// Spec-style free function: values → coefficients.
pub fn to_coeffs(values: &[Complex64], grid: TorusGrid) -> Result<SpectralField> {
    SpectralField::from_values(grid, values)
}

/// Spec-style free function: coefficients → values.
pub fn to_values(field: &SpectralField) -> Vec<Complex64> {
    field.to_values()
}

/// Coefficients `(re, im)·(1+|k|)^{−decay}` with `(re, im)` drawn from
/// `sample`; a cheap way to dial in Sobolev regularity.
pub fn decaying_field(
    grid: TorusGrid,
    decay: f64,
    mut sample: impl FnMut() -> (f64, f64),
) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.n_modes() {
        let k = grid.wavenumber(i).unsigned_abs() as f64;
        let (re, im) = sample();
        f.coeffs_mut()[i] = Complex64::new(re, im) * (1.0 + k).powf(-decay);
    }
    f
}

/// Spectral derivative of a real periodic sample array.
pub fn real_derivative(grid: TorusGrid, values: &[f64]) -> Result<Vec<f64>> {
    let d = SpectralField::from_real_values(grid, values)?.derivative();
    Ok(d.to_values().into_iter().map(|c| c.re).collect())
}

/// A map 𝕋 → ℝ³ sampled at the grid nodes, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    grid: TorusGrid,
    comps: [Vec<f64>; 3],
}

impl VectorField3 {
    pub fn new(grid: TorusGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            grid.check_len(c.len())?;
        }
        Ok(Self { grid, comps })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        let z = vec![0.0; grid.n];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_points(grid: TorusGrid, points: &[[f64; 3]]) -> Result<Self> {
        grid.check_len(points.len())?;
        let mut out = Self::zeros(grid);
        for (i, p) in points.iter().enumerate() {
            out.set(i, *p);
        }
        Ok(out)
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.n {
            out.set(i, f(grid.node(i)));
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.grid.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn component(&self, j: usize) -> &[f64] {
        &self.comps[j]
    }

    #[inline]
    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    #[inline]
    pub fn get(&self, i: usize) -> [f64; 3] {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: [f64; 3]) {
        for (c, x) in self.comps.iter_mut().zip(v) {
            c[i] = x;
        }
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Componentwise spectral derivative.
    pub fn derivative(&self) -> Self {
        let d = |c: &Vec<f64>| real_derivative(self.grid, c).expect("length checked");
        Self {
            grid: self.grid,
            comps: [d(&self.comps[0]), d(&self.comps[1]), d(&self.comps[2])],
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.len() as f64;
        let m = |c: &Vec<f64>| c.iter().sum::<f64>() / n;
        [m(&self.comps[0]), m(&self.comps[1]), m(&self.comps[2])]
    }

    /// Largest `|‖v(x_n)‖ − 1|`.
    pub fn max_unit_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (norm(self.get(i)) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn resample(&self, grid: TorusGrid) -> Self {
        let r = |c: &Vec<f64>| -> Vec<f64> {
            SpectralField::from_real_values(self.grid, c)
                .expect("length checked")
                .resample(grid)
                .to_values()
                .into_iter()
                .map(|z| z.re)
                .collect()
        };
        Self {
            grid,
            comps: [r(&self.comps[0]), r(&self.comps[1]), r(&self.comps[2])],
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            });
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
