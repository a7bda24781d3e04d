//! Symmetric low-regularity integrator for the cubic NLS.
//!
//! One step solves the implicit relation
//!
//! ```text
//! u⁺ = e^{ih∂²}[u + i(h/4) u² φ1(−ih∂²) ū] + i(h/4) (u⁺)² φ1(ih∂²) conj(u⁺)
//! ```
//!
//! by Picard iteration started from `e^{ih∂²}u`. Only two FFT-sized passes are
//! needed per iterate, and the contraction rate depends on `h‖u‖²` but not on
//! the number of modes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRegConfig {
    /// Stop once successive iterates are closer than this in `H^{s_norm}`.
    pub fp_tolerance: f64,
    pub fp_max_iters: usize,
    pub s_norm: f64,
}

impl Default for LowRegConfig {
    fn default() -> Self {
        Self {
            fp_tolerance: 1e-12,
            fp_max_iters: 100,
            s_norm: 1.0,
        }
    }
}

impl LowRegConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fp_tolerance > 0.0) || self.fp_max_iters == 0 || !(self.s_norm >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "fixed-point settings need tolerance > 0, max_iters ≥ 1, s ≥ 0 (got {:?})",
                self
            )));
        }
        Ok(())
    }
}

/// `c² · φ1(sign·ih∂²) c̄`.
fn cubic_term(c: &SpectralField, h: f64, sign: f64) -> SpectralField {
    let weighted = c.conj().phi1_propagator(h, sign).to_values();
    let cv = c.to_values();
    let prod = par::map_indices(cv.len(), |i| cv[i] * cv[i] * weighted[i]);
    SpectralField::from_values(c.grid(), &prod).expect("same length")
}

/// The part of the relation that depends only on `u_m`.
fn explicit_part(u_m: &SpectralField, h: f64) -> SpectralField {
    let i_h4 = Complex64::new(0.0, h / 4.0);
    let inner = cubic_term(u_m, h, -1.0).scale(i_h4);
    u_m.add(&inner).expect("same grid").free_propagator(h)
}

fn apply_s1(explicit: &SpectralField, candidate: &SpectralField, h: f64) -> SpectralField {
    let i_h4 = Complex64::new(0.0, h / 4.0);
    explicit
        .add(&cubic_term(candidate, h, 1.0).scale(i_h4))
        .expect("same grid")
}

/// The map whose fixed point is the next step, evaluated at `candidate`.
pub fn s1_map(u_m: &SpectralField, candidate: &SpectralField, h: f64) -> Result<SpectralField> {
    u_m.check_same_grid(candidate)?;
    Ok(apply_s1(&explicit_part(u_m, h), candidate, h))
}

/// `H^s` norm of the defect of `(u_m, u_next)` in the step relation.
pub fn residual(u_m: &SpectralField, u_next: &SpectralField, h: f64, s: f64) -> Result<f64> {
    Ok(s1_map(u_m, u_next, h)?.sub(u_next)?.sobolev_norm(s))
}

/// One step. Returns the new state and the number of `S1` evaluations used.
pub fn lowreg_step(
    u_m: &SpectralField,
    h: f64,
    config: &LowRegConfig,
) -> Result<(SpectralField, usize)> {
    config.validate()?;
    let explicit = explicit_part(u_m, h);
    let mut c = u_m.free_propagator(h);
    let mut dist = f64::INFINITY;
    for it in 1..=config.fp_max_iters {
        let next = apply_s1(&explicit, &c, h);
        dist = next.sub(&c)?.sobolev_norm(config.s_norm);
        c = next;
        if !dist.is_finite() {
            break;
        }
        if dist < config.fp_tolerance {
            return Ok((c, it));
        }
    }
    Err(Error::NonContractive {
        step: 0,
        iters: config.fp_max_iters,
        distance: dist,
    })
}

/// `n_steps` steps of size `h`, all states included (first is `u0`).
pub fn run_lowreg(
    u0: &SpectralField,
    h: f64,
    n_steps: usize,
    config: &LowRegConfig,
) -> Result<Vec<SpectralField>> {
    Ok(run_lowreg_counted(u0, h, n_steps, config)?.0)
}

/// As [`run_lowreg`], also returning the iteration count of every step.
pub fn run_lowreg_counted(
    u0: &SpectralField,
    h: f64,
    n_steps: usize,
    config: &LowRegConfig,
) -> Result<(Vec<SpectralField>, Vec<usize>)> {
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut iters = Vec::with_capacity(n_steps);
    states.push(u0.clone());
    for m in 0..n_steps {
        let (next, it) = lowreg_step(&states[m], h, config).map_err(|e| match e {
            Error::NonContractive {
                iters, distance, ..
            } => Error::NonContractive {
                step: m,
                iters,
                distance,
            },
            other => other,
        })?;
        states.push(next);
        iters.push(it);
    }
    Ok((states, iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn smooth_random(n: usize, seed: u64, amp: f64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(grid(n));
        for k in -6i64..=6 {
            let w = amp / (1.0 + (k * k) as f64);
            f.set_coeff(
                k,
                Complex64::new(rng.gen_range(-w..w), rng.gen_range(-w..w)),
            );
        }
        f
    }

    fn constant(n: usize, a: Complex64) -> SpectralField {
        SpectralField::from_fn(grid(n), |_| a)
    }

    #[test]
    fn s1_with_zero_data() {
        let c = smooth_random(32, 1, 1.0);
        let z = SpectralField::zeros(grid(32));
        let h = 0.1;
        let want = cubic_term(&c, h, 1.0).scale(Complex64::new(0.0, h / 4.0));
        let got = s1_map(&z, &c, h).unwrap();
        assert!(got.sub(&want).unwrap().sobolev_norm(0.0) < 1e-15);
    }

    #[test]
    fn s1_on_constants() {
        let a = Complex64::new(0.7, 0.0);
        let u = constant(16, a);
        let h = 0.3;
        let got = s1_map(&u, &u, h).unwrap().coeff(0);
        let want = a * (1.0 + Complex64::new(0.0, h * a.norm_sqr() / 2.0));
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn s1_at_zero_step() {
        let u = smooth_random(16, 2, 1.0);
        let c = smooth_random(16, 3, 1.0);
        let got = s1_map(&u, &c, 0.0).unwrap();
        assert!(got.sub(&u).unwrap().sobolev_norm(0.0) < 1e-15);
        assert!(s1_map(&u, &constant(8, Complex64::new(1.0, 0.0)), 0.1).is_err());
    }

    #[test]
    fn zero_in_one_iteration() {
        let z = SpectralField::zeros(grid(16));
        let (v, it) = lowreg_step(&z, 0.1, &LowRegConfig::default()).unwrap();
        assert_eq!(it, 1);
        assert_eq!(v.sobolev_norm(0.0), 0.0);
    }

    #[test]
    fn constant_data_matches_scalar_solve() {
        let a = 0.9;
        let h = 0.2;
        let (v, _) = lowreg_step(
            &constant(16, Complex64::new(a, 0.0)),
            h,
            &Default::default(),
        )
        .unwrap();
        // Scalar oracle for z = A + iθ(A³ + |z|²z), θ = h/4: for r = |z| we
        // have z = (A + iθA³)/(1 − iθr²), so bisect on |z(r)| = r.
        let th = h / 4.0;
        let zr = |r: f64| Complex64::new(a, th * a.powi(3)) / Complex64::new(1.0, -th * r * r);
        let (mut lo, mut hi) = (0.0, 2.0 * a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if zr(mid).norm() > mid {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = zr(0.5 * (lo + hi));
        assert!((v.coeff(0) - z).norm() < 1e-12, "{} vs {}", v.coeff(0), z);
    }

    #[test]
    fn residual_and_symmetry() {
        let cfg = LowRegConfig::default();
        let u = smooth_random(64, 4, 1.5);
        let h = 0.05;
        let (v, _) = lowreg_step(&u, h, &cfg).unwrap();
        assert!(residual(&u, &v, h, 1.0).unwrap() <= 10.0 * cfg.fp_tolerance);
        let (back, _) = lowreg_step(&v, -h, &cfg).unwrap();
        assert!(back.sub(&u).unwrap().sobolev_norm(1.0) <= 10.0 * cfg.fp_tolerance);
    }

    #[test]
    fn step_stays_near_free_flow() {
        let cfg = LowRegConfig::default();
        let u = smooth_random(64, 5, 1.0);
        let r = u.sobolev_norm(1.0);
        for h in [0.04, 0.02, 0.01] {
            let (v, _) = lowreg_step(&u, h, &cfg).unwrap();
            let d = v.sub(&u.free_propagator(h)).unwrap().sobolev_norm(1.0);
            assert!(d <= h * 2.0 * r.powi(3), "h={h}: {d}");
        }
    }

    #[test]
    fn contraction_ratio() {
        let u = smooth_random(64, 6, 1.0);
        let h = 0.02;
        let explicit = explicit_part(&u, h);
        let mut c = u.free_propagator(h);
        let mut prev = f64::NAN;
        for _ in 0..6 {
            let next = apply_s1(&explicit, &c, h);
            let d = next.sub(&c).unwrap().sobolev_norm(1.0);
            if prev.is_finite() && prev > 1e-14 {
                assert!(d / prev <= 0.5, "ratio {}", d / prev);
            }
            prev = d;
            c = next;
        }
    }

    #[test]
    fn large_step_is_reported() {
        let u = smooth_random(32, 7, 40.0);
        let cfg = LowRegConfig {
            fp_max_iters: 20,
            ..Default::default()
        };
        let err = run_lowreg(&u, 2.0, 3, &cfg).unwrap_err();
        assert!(
            matches!(err, Error::NonContractive { step: 0, .. }),
            "{err}"
        );
    }

    #[test]
    fn run_lengths() {
        let u = smooth_random(16, 8, 1.0);
        let cfg = LowRegConfig::default();
        assert_eq!(run_lowreg(&u, 0.1, 0, &cfg).unwrap(), vec![u.clone()]);
        let (states, iters) = run_lowreg_counted(&u, 0.1, 4, &cfg).unwrap();
        assert_eq!((states.len(), iters.len()), (5, 4));
    }

    #[test]
    fn rejects_bad_config() {
        let u = smooth_random(16, 9, 1.0);
        let cfg = LowRegConfig {
            fp_tolerance: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            lowreg_step(&u, 0.1, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
