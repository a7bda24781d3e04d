//! Initial frames and NLS data for the Hasimoto transform.
//!
//! Given a unit tangent field `T0`, build an orthonormal frame `(T0, e1, e2)`
//! whose normal pair is parallel-transported along the curve, and the complex
//! curvature `u0 = ⟨∂_xT0, e1⟩ + i⟨∂_xT0, e2⟩` that seeds the NLS.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{cross, dot, norm, SpectralField, TorusGrid, VectorField3};

/// Below this curvature the Frenet normal is not usable.
pub const KAPPA_MIN: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-8;
const FLAT_TOL: f64 = 1e-10;

/// Orthonormal frame sampled on the grid; rows of the matrix `y = (T; e1; e2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: VectorField3,
    pub e1: VectorField3,
    pub e2: VectorField3,
}

impl Frame {
    pub fn grid(&self) -> TorusGrid {
        self.t.grid()
    }

    /// `[T, e1, e2]` at node `i`.
    #[inline]
    pub fn rows(&self, i: usize) -> [[f64; 3]; 3] {
        [self.t.get(i), self.e1.get(i), self.e2.get(i)]
    }

    #[inline]
    pub fn set_rows(&mut self, i: usize, r: [[f64; 3]; 3]) {
        self.t.set(i, r[0]);
        self.e1.set(i, r[1]);
        self.e2.set(i, r[2]);
    }

    /// Largest entry of `|y yᵀ − I|` over all nodes.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid().n_modes() {
            let r = self.rows(i);
            for a in 0..3 {
                for b in a..3 {
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((dot(r[a], r[b]) - target).abs());
                }
            }
        }
        worst
    }

    /// Largest `‖e2 − T × e1‖` over all nodes.
    pub fn handedness_defect(&self) -> f64 {
        (0..self.grid().n_modes())
            .map(|i| {
                let [t, e1, e2] = self.rows(i);
                let c = cross(t, e1);
                norm([e2[0] - c[0], e2[1] - c[1], e2[2] - c[2]])
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTorsion {
    pub grid: TorusGrid,
    pub kappa: Vec<f64>,
    /// Torsion; set to 0 wherever `defined[i]` is false.
    pub tau: Vec<f64>,
    pub defined: Vec<bool>,
    /// `∫₀ˣ τ`, evaluated spectrally.
    pub theta: Vec<f64>,
    /// `∫₀^{2π} τ`.
    pub total_torsion: f64,
}

fn check_unit(t0: &VectorField3) -> Result<()> {
    let d = t0.max_unit_defect();
    if d > UNIT_TOL {
        return Err(Error::NonUnitTangent(d));
    }
    Ok(())
}

/// Spectral antiderivative vanishing at `x = 0`; the mean contributes a
/// linear term. Returns the values and the integral over the period.
pub fn antiderivative(grid: TorusGrid, f: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut c = SpectralField::from_real_values(grid, f)?;
    let mean = c.coeff(0).re;
    let half = (grid.n_modes() / 2) as i64;
    for (i, z) in c.coeffs_mut().iter_mut().enumerate() {
        let k = grid.wavenumber(i);
        *z = if k == 0 || k == half {
            Complex64::new(0.0, 0.0)
        } else {
            *z / Complex64::new(0.0, k as f64)
        };
    }
    let vals = c.to_values();
    let f0 = vals[0].re;
    let out = vals
        .iter()
        .enumerate()
        .map(|(i, z)| z.re - f0 + mean * grid.node(i))
        .collect();
    Ok((out, 2.0 * PI * mean))
}

/// `κ = ‖T_x‖`, `τ = ⟨T × T_x, T_xx⟩/κ²` and `θ = ∫₀ˣ τ`.
pub fn curvature_torsion(t0: &VectorField3) -> Result<CurvatureTorsion> {
    check_unit(t0)?;
    let grid = t0.grid();
    let tx = t0.derivative();
    let txx = tx.derivative();
    let n = grid.n_modes();
    let mut kappa = vec![0.0; n];
    let mut tau = vec![0.0; n];
    let mut defined = vec![false; n];
    for i in 0..n {
        let (t, d1, d2) = (t0.get(i), tx.get(i), txx.get(i));
        kappa[i] = norm(d1);
        if kappa[i] > KAPPA_MIN {
            defined[i] = true;
            tau[i] = dot(cross(t, d1), d2) / (kappa[i] * kappa[i]);
        }
    }
    let (theta, total_torsion) = antiderivative(grid, &tau)?;
    Ok(CurvatureTorsion {
        grid,
        kappa,
        tau,
        defined,
        theta,
        total_torsion,
    })
}

/// Frenet frame `(T, N, B)` rotated in the normal plane by `angle`:
/// `e1 = cos·N − sin·B`, `e2 = sin·N + cos·B`.
pub fn frenet_frame_with_angle(t0: &VectorField3, angle: &[f64]) -> Result<Frame> {
    check_unit(t0)?;
    let grid = t0.grid();
    let tx = t0.derivative();
    let mut e1 = VectorField3::zeros(grid);
    let mut e2 = VectorField3::zeros(grid);
    for i in 0..grid.n_modes() {
        let d = tx.get(i);
        let k = norm(d);
        if k <= KAPPA_MIN {
            return Err(Error::VanishingCurvature { index: i, kappa: k });
        }
        let t = t0.get(i);
        // Project out the roundoff-level tangential part before normalizing.
        let p = dot(d, t);
        let nv = [d[0] - p * t[0], d[1] - p * t[1], d[2] - p * t[2]];
        let nn = norm(nv);
        let nv = [nv[0] / nn, nv[1] / nn, nv[2] / nn];
        let b = cross(t, nv);
        let (s, c) = angle[i].sin_cos();
        e1.set(
            i,
            [
                c * nv[0] - s * b[0],
                c * nv[1] - s * b[1],
                c * nv[2] - s * b[2],
            ],
        );
        e2.set(
            i,
            [
                s * nv[0] + c * b[0],
                s * nv[1] + c * b[1],
                s * nv[2] + c * b[2],
            ],
        );
    }
    Ok(Frame {
        t: t0.clone(),
        e1,
        e2,
    })
}

/// Frenet route, rotation angle `θ = ∫₀ˣ τ`.
pub fn initial_frame_frenet(t0: &VectorField3) -> Result<Frame> {
    let ct = curvature_torsion(t0)?;
    frenet_frame_with_angle(t0, &ct.theta)
}

/// Flat route for curves lying in the plane orthogonal to `b`:
/// `e2 = b`, `e1 = b × T`.
pub fn initial_frame_flat(t0: &VectorField3, b: [f64; 3]) -> Result<Frame> {
    check_unit(t0)?;
    let nb = norm(b);
    if (nb - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitTangent((nb - 1.0).abs()));
    }
    let grid = t0.grid();
    let off = (0..grid.n_modes())
        .map(|i| dot(t0.get(i), b).abs())
        .fold(0.0, f64::max);
    if off > FLAT_TOL {
        return Err(Error::NotFlat(off));
    }
    let mut e1 = VectorField3::zeros(grid);
    let mut e2 = VectorField3::zeros(grid);
    for i in 0..grid.n_modes() {
        e1.set(i, cross(b, t0.get(i)));
        e2.set(i, b);
    }
    Ok(Frame {
        t: t0.clone(),
        e1,
        e2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// `u0 = κ e^{iθ}`; periodic only if the total torsion is a multiple of 2π.
    Closed,
    /// `u0 = κ e^{iθ − i(x/2π)∫τ}`, periodic for any total torsion.
    General,
}

/// Phase angle used for `u0` (and for the matching frame rotation).
pub fn phase_angle(ct: &CurvatureTorsion, mode: PhaseMode) -> Vec<f64> {
    match mode {
        PhaseMode::Closed => ct.theta.clone(),
        PhaseMode::General => ct
            .theta
            .iter()
            .enumerate()
            .map(|(i, th)| th - ct.grid.node(i) / (2.0 * PI) * ct.total_torsion)
            .collect(),
    }
}

pub fn initial_nls_data(ct: &CurvatureTorsion, mode: PhaseMode) -> SpectralField {
    let angle = phase_angle(ct, mode);
    let vals: Vec<Complex64> = ct
        .kappa
        .iter()
        .zip(&angle)
        .map(|(&k, &a)| Complex64::from_polar(k, a))
        .collect();
    SpectralField::from_values(ct.grid, &vals).expect("same grid")
}

/// `u = ⟨T_x, e1⟩ + i⟨T_x, e2⟩` for an arbitrary frame. For a Frenet frame
/// rotated by `θ` this is `κe^{iθ}`; for the flat route it is the signed
/// curvature.
pub fn frame_nls_data(frame: &Frame) -> SpectralField {
    let grid = frame.grid();
    let tx = frame.t.derivative();
    let vals: Vec<Complex64> = (0..grid.n_modes())
        .map(|i| {
            let d = tx.get(i);
            Complex64::new(dot(d, frame.e1.get(i)), dot(d, frame.e2.get(i)))
        })
        .collect();
    SpectralField::from_values(grid, &vals).expect("same grid")
}

/// How the initial frame is built from the tangent field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameRoute {
    Frenet(PhaseMode),
    Flat([f64; 3]),
}

/// Initial frame together with the NLS datum that drives it.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub frame: Frame,
    pub u0: SpectralField,
}

pub fn initial_data(t0: &VectorField3, route: FrameRoute) -> Result<InitialData> {
    let frame = match route {
        FrameRoute::Frenet(mode) => {
            let ct = curvature_torsion(t0)?;
            frenet_frame_with_angle(t0, &phase_angle(&ct, mode))?
        }
        FrameRoute::Flat(b) => initial_frame_flat(t0, b)?,
    };
    let u0 = frame_nls_data(&frame);
    Ok(InitialData { frame, u0 })
}
