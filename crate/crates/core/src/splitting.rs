//! Exponential splitting for the cubic NLS `i u_t + u_xx + ½|u|²u = 0`.
//!
//! The two sub-flows are solved exactly: the dispersive part by a Fourier
//! multiplier, the nonlinear part pointwise (it preserves `|u|`).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::SpectralField;

const SUM_TOL: f64 = 1e-12;

/// Coefficients of `u ↦ e^{a_1hD_Δ}e^{b_1hD_N}⋯e^{a_ShD_Δ}e^{b_ShD_N}u`.
///
/// Flows are applied right to left: for `s = S, …, 1` first the nonlinear
/// flow over `b_s h`, then the dispersive flow over `a_s h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme {
    a: Vec<f64>,
    b: Vec<f64>,
    declared_order: usize,
}

impl SplittingScheme {
    pub fn new(a: Vec<f64>, b: Vec<f64>, declared_order: usize) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InconsistentScheme(format!(
                "coefficient lists have lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        if (sa - 1.0).abs() > SUM_TOL || (sb - 1.0).abs() > SUM_TOL {
            return Err(Error::InconsistentScheme(format!(
                "coefficients must sum to 1 (got {sa} and {sb})"
            )));
        }
        Ok(Self {
            a,
            b,
            declared_order,
        })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn declared_order(&self) -> usize {
        self.declared_order
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    /// Palindromic test for time symmetry. With one-based indices either
    /// `a_1 ≠ 0, b_S = 0, a_{S+1−s} = a_s, b_{S−s} = b_s`, or the same with the
    /// roles of `a` and `b` exchanged.
    pub fn is_symmetric(&self) -> bool {
        let eq = |x: f64, y: f64| (x - y).abs() <= 1e-14 * (1.0 + x.abs());
        let pattern = |p: &[f64], q: &[f64]| {
            let s = p.len();
            p[0] != 0.0
                && q[s - 1] == 0.0
                && (0..s).all(|i| eq(p[i], p[s - 1 - i]))
                && (0..s - 1).all(|i| eq(q[i], q[s - 2 - i]))
        };
        pattern(&self.a, &self.b) || pattern(&self.b, &self.a)
    }
}

/// Named coefficient sets: `lie`, `strang`, `yoshida4`.
pub fn preset(name: &str) -> Result<SplittingScheme> {
    match name {
        "lie" => SplittingScheme::new(vec![1.0], vec![1.0], 1),
        "strang" => SplittingScheme::new(vec![0.5, 0.5], vec![1.0, 0.0], 2),
        "yoshida4" => {
            // Triple jump of Strang: γ1 = γ3 = 1/(2 − 2^{1/3}), γ2 = 1 − 2γ1.
            let g1 = 1.0 / (2.0 - 2f64.cbrt());
            let g2 = 1.0 - 2.0 * g1;
            SplittingScheme::new(
                vec![0.5 * g1, 0.5 * (g1 + g2), 0.5 * (g1 + g2), 0.5 * g1],
                vec![g1, g2, g1, 0.0],
                4,
            )
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// `e^{it∂²}u`.
pub fn flow_p1(u: &SpectralField, t: f64) -> SpectralField {
    u.free_propagator(t)
}

/// `u e^{it|u|²/2}`, pointwise.
pub fn flow_p2(u: &SpectralField, t: f64) -> SpectralField {
    if t == 0.0 {
        return u.clone();
    }
    let vals = u.to_values();
    let out = par::map_indices(vals.len(), |i| {
        let z = vals[i];
        z * Complex64::from_polar(1.0, 0.5 * t * z.norm_sqr())
    });
    SpectralField::from_values(u.grid(), &out).expect("same length")
}

pub fn splitting_step(u: &SpectralField, h: f64, scheme: &SplittingScheme) -> SpectralField {
    let mut v = u.clone();
    for s in (0..scheme.stages()).rev() {
        if scheme.b[s] != 0.0 {
            v = flow_p2(&v, scheme.b[s] * h);
        }
        if scheme.a[s] != 0.0 {
            v = flow_p1(&v, scheme.a[s] * h);
        }
    }
    v
}

/// States at each of `times` (which must start at 0 and increase strictly).
pub fn run_splitting(
    u0: &SpectralField,
    times: &[f64],
    scheme: &SplittingScheme,
) -> Result<Vec<SpectralField>> {
    run_splitting_substeps(u0, times, scheme, None)
}

/// As [`run_splitting`], but every gap longer than `max_step` is cut into the
/// smallest number of equal substeps not exceeding it.
pub fn run_splitting_substeps(
    u0: &SpectralField,
    times: &[f64],
    scheme: &SplittingScheme,
    max_step: Option<f64>,
) -> Result<Vec<SpectralField>> {
    check_times(times)?;
    let mut out = Vec::with_capacity(times.len());
    let mut u = u0.clone();
    out.push(u.clone());
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let pieces = match max_step {
            Some(m) if m > 0.0 => (gap / m * (1.0 - 1e-12)).ceil().max(1.0) as usize,
            _ => 1,
        };
        let dt = gap / pieces as f64;
        for _ in 0..pieces {
            u = splitting_step(&u, dt, scheme);
        }
        out.push(u.clone());
    }
    Ok(out)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::NonMonotoneTimes(0)),
        Some(&t0) if t0 != 0.0 => return Err(Error::NonMonotoneTimes(0)),
        _ => {}
    }
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimes(i + 1));
    }
    Ok(())
}
