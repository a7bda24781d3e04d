//! Vortex filament curves `X` with `∂_xX = T`.

use log::warn;

use crate::error::{Error, Result};
use crate::frame::antiderivative;
use crate::spectral::{cross, norm, VectorField3};

/// Mean tangent above which a curve is treated as open.
pub const CLOSURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FilamentCurve {
    pub time: f64,
    /// `X(t, x_n)`.
    pub points: Vec<[f64; 3]>,
    /// `X(t, 0)`.
    pub base_point: [f64; 3],
    /// `X(t, 2π⁻) − X(t, 0)`, zero for closed curves.
    pub closure_gap: [f64; 3],
}

impl FilamentCurve {
    pub fn closure_error(&self) -> f64 {
        norm(self.closure_gap)
    }
}

/// `X − X(0)` from the spectral antiderivative of each component.
fn integrate_tangent(t: &VectorField3) -> Result<(Vec<[f64; 3]>, [f64; 3])> {
    let mut pts = vec![[0.0; 3]; t.len()];
    let mut gap = [0.0; 3];
    for (j, g) in gap.iter_mut().enumerate() {
        let (vals, total) = antiderivative(t.grid(), t.component(j))?;
        for (p, v) in pts.iter_mut().zip(vals) {
            p[j] = v;
        }
        *g = total;
    }
    Ok((pts, gap))
}

/// Base-point velocity `(T × T_x)(·, 0)`.
fn base_velocity(t: &VectorField3) -> [f64; 3] {
    cross(t.get(0), t.derivative().get(0))
}

/// Curves for a tangent trajectory sampled at `times`. The base point starts
/// at the origin and follows `∂_tX = T × T_x` at `x = 0` by the trapezoidal
/// rule.
pub fn reconstruct_filament(
    tangents: &[&VectorField3],
    times: &[f64],
) -> Result<Vec<FilamentCurve>> {
    if tangents.len() != times.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            actual: tangents.len(),
        });
    }
    let mut out: Vec<FilamentCurve> = Vec::with_capacity(times.len());
    let mut base = [0.0; 3];
    let mut prev_v = [0.0; 3];
    let mut warned = false;
    for (m, (t, &time)) in tangents.iter().zip(times).enumerate() {
        let mean = t.mean();
        if !warned && norm(mean) > CLOSURE_TOL {
            warn!(
                "mean tangent {:.3e} at t = {time}: curve is not closed, reconstruction drifts",
                norm(mean)
            );
            warned = true;
        }
        let v = base_velocity(t);
        if m > 0 {
            let dt = time - times[m - 1];
            for j in 0..3 {
                base[j] += 0.5 * dt * (prev_v[j] + v[j]);
            }
        }
        prev_v = v;
        let (rel, closure_gap) = integrate_tangent(t)?;
        let points = rel
            .iter()
            .map(|p| [base[0] + p[0], base[1] + p[1], base[2] + p[2]])
            .collect();
        out.push(FilamentCurve {
            time,
            points,
            base_point: base,
            closure_gap,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::{preset_circle, preset_rough, preset_smooth};

    #[test]
    fn circle_has_unit_radius() {
        let t = preset_circle(64).unwrap();
        let c = &reconstruct_filament(&[&t], &[0.0]).unwrap()[0];
        // X = (sin x, 1 − cos x, 0): centre (0, 1, 0).
        for (i, p) in c.points.iter().enumerate() {
            let r = ((p[0]).powi(2) + (p[1] - 1.0).powi(2) + p[2].powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-12, "{i}: {p:?}");
        }
        assert!(c.closure_error() < 1e-12);
    }

    #[test]
    fn constant_tangent_moves_base_linearly() {
        let t = preset_smooth(64).unwrap();
        let times = [0.0, 0.1, 0.25, 0.5];
        let curves = reconstruct_filament(&[&t, &t, &t, &t], &times).unwrap();
        let v = base_velocity(&t);
        for c in &curves {
            for j in 0..3 {
                assert!((c.base_point[j] - v[j] * c.time).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_curves_close() {
        for t in [preset_smooth(128).unwrap(), preset_rough(128).unwrap()] {
            let c = &reconstruct_filament(&[&t], &[0.0]).unwrap()[0];
            assert!(c.closure_error() < 1e-8);
        }
    }

    #[test]
    fn derivative_of_curve_is_tangent() {
        let t = preset_smooth(64).unwrap();
        let c = &reconstruct_filament(&[&t], &[0.0]).unwrap()[0];
        let x = VectorField3::from_points(t.grid(), &c.points)
            .unwrap()
            .derivative();
        for i in 0..64 {
            for j in 0..3 {
                assert!((x.get(i)[j] - t.get(i)[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn open_curve_reports_gap() {
        let t = VectorField3::from_fn(crate::spectral::TorusGrid::new(16).unwrap(), |_| {
            [1.0, 0.0, 0.0]
        });
        let c = &reconstruct_filament(&[&t], &[0.0]).unwrap()[0];
        assert!((c.closure_gap[0] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(reconstruct_filament(&[&t], &[0.0, 1.0]).is_err());
    }
}
