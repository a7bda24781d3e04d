//! Conserved quantities, error norms and observed convergence orders.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::spectral::{cross, dot, SpectralField, VectorField3};

fn periodic_integral(f: impl Iterator<Item = f64>, n: usize) -> f64 {
    2.0 * PI * f.sum::<f64>() / n as f64
}

/// `E = ∫‖T_x‖²`.
pub fn energy_e(t: &VectorField3) -> f64 {
    let tx = t.derivative();
    periodic_integral((0..t.len()).map(|i| dot(tx.get(i), tx.get(i))), t.len())
}

/// `I = ∫ ‖T_t‖² + ‖T_xx‖² − ¾‖T_x‖⁴` with `T_t = T × T_xx`.
pub fn action_i(t: &VectorField3) -> f64 {
    let tx = t.derivative();
    let txx = tx.derivative();
    periodic_integral(
        (0..t.len()).map(|i| {
            let (d1, d2) = (tx.get(i), txx.get(i));
            let tt = cross(t.get(i), d2);
            let s = dot(d1, d1);
            dot(tt, tt) + dot(d2, d2) - 0.75 * s * s
        }),
        t.len(),
    )
}

/// `‖T_a − T_b‖_{L²(𝕋;ℓ²)}`.
pub fn l2_frame_error(a: &VectorField3, b: &VectorField3) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(periodic_integral(
        (0..a.len()).map(|i| {
            let (p, q) = (a.get(i), b.get(i));
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            dot(d, d)
        }),
        a.len(),
    )
    .sqrt())
}

/// `∫|u|² = 2πΣ|û_k|²`.
pub fn nls_mass(u: &SpectralField) -> f64 {
    2.0 * PI * u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Least-squares slope of `log err` against `log h`.
pub fn order_estimate(hs: &[f64], errs: &[f64]) -> Result<f64> {
    if hs.len() != errs.len() {
        return Err(Error::LengthMismatch {
            expected: hs.len(),
            actual: errs.len(),
        });
    }
    if hs.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two points for a slope".into(),
        ));
    }
    if let Some(i) = hs
        .iter()
        .zip(errs)
        .position(|(h, e)| !(*h > 0.0 && *e > 0.0))
    {
        return Err(Error::NonPositive(i));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("all step sizes are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Time series of the invariants along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedReport {
    pub times: Vec<f64>,
    pub energy_e: Vec<f64>,
    pub action_i: Vec<f64>,
    /// Present when the NLS states at the same times were supplied.
    pub nls_mass: Option<Vec<f64>>,
    /// Worst `|‖T‖ − 1|` per time.
    pub unit_defect: Vec<f64>,
    /// Worst orthonormality defect of the frame per time.
    pub frame_defect: Vec<f64>,
}

impl ConservedReport {
    pub fn from_trajectory(
        times: &[f64],
        frames: &[Frame],
        states: Option<&[SpectralField]>,
    ) -> Result<Self> {
        if times.len() != frames.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                actual: frames.len(),
            });
        }
        if let Some(s) = states {
            if s.len() != frames.len() {
                return Err(Error::LengthMismatch {
                    expected: frames.len(),
                    actual: s.len(),
                });
            }
        }
        Ok(Self {
            times: times.to_vec(),
            energy_e: crate::par::map_items(frames, |f| energy_e(&f.t)),
            action_i: crate::par::map_items(frames, |f| action_i(&f.t)),
            nls_mass: states.map(|s| s.iter().map(nls_mass).collect()),
            unit_defect: frames.iter().map(|f| f.t.max_unit_defect()).collect(),
            frame_defect: frames.iter().map(|f| f.orthonormality_defect()).collect(),
        })
    }
}

/// `max_t |q(t) − q(0)| / |q(0)|` (absolute drift when `q(0) = 0`).
pub fn max_relative_drift(series: &[f64]) -> f64 {
    let Some(&q0) = series.first() else {
        return 0.0;
    };
    let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
    series
        .iter()
        .map(|q| (q - q0).abs() / scale)
        .fold(0.0, f64::max)
}
