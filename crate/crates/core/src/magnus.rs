//! Interpolatory Magnus integrators for the frame ODE `y_t = A(t,x) y` and
//! the splitting-based driver (Scheme A).
//!
//! `A` is skew at every node, so each step is a pointwise rotation and the
//! frame stays orthonormal up to roundoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::par;
use crate::spectral::{cross, SpectralField};
use crate::splitting::{run_splitting_substeps, SplittingScheme};

/// `A(t,x)` in the form produced by the NLS state: `alpha = u_x`,
/// `beta = |u|²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewFieldCoeffs {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<f64>,
}

impl SkewFieldCoeffs {
    pub fn to_matrix_field(&self) -> SkewMatrixField {
        SkewMatrixField {
            a: self.alpha.iter().map(|z| z.im).collect(),
            b: self.alpha.iter().map(|z| z.re).collect(),
            c: self.beta.clone(),
        }
    }
}

/// Pointwise skew matrices `[[0, −a, b], [a, 0, −c], [−b, c, 0]]`.
///
/// Under `so(3) ≅ ℝ³` the matrix is the cross-product map of `ω = (c, b, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrixField {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub type Rotation = [[f64; 3]; 3];

impl SkewMatrixField {
    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    #[inline]
    pub fn axis(&self, i: usize) -> [f64; 3] {
        [self.c[i], self.b[i], self.a[i]]
    }

    fn from_axes(axes: Vec<[f64; 3]>) -> Self {
        let mut out = Self::zeros(axes.len());
        for (i, w) in axes.into_iter().enumerate() {
            out.c[i] = w[0];
            out.b[i] = w[1];
            out.a[i] = w[2];
        }
        out
    }

    pub fn matrix(&self, i: usize) -> Rotation {
        let (a, b, c) = (self.a[i], self.b[i], self.c[i]);
        [[0.0, -a, b], [a, 0.0, -c], [-b, c, 0.0]]
    }

    /// `s·self + t·other`.
    pub fn combine(&self, s: f64, other: &Self, t: f64) -> Self {
        let f = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(p, q)| s * p + t * q).collect()
        };
        Self {
            a: f(&self.a, &other.a),
            b: f(&self.b, &other.b),
            c: f(&self.c, &other.c),
        }
    }

    /// Pointwise `[self, other]`, via the cross product of axes.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_axes(
            (0..self.len())
                .map(|i| cross(self.axis(i), other.axis(i)))
                .collect(),
        )
    }
}

/// `A` from the NLS state `u`.
pub fn assemble_a(u: &SpectralField) -> SkewFieldCoeffs {
    let alpha = u.derivative().to_values();
    let beta = u.to_values().iter().map(|z| 0.5 * z.norm_sqr()).collect();
    SkewFieldCoeffs { alpha, beta }
}

/// Gauss–Legendre nodes on (0, 1).
pub fn gauss_nodes(l: usize) -> Result<Vec<f64>> {
    match l {
        1 => Ok(vec![0.5]),
        2 => {
            let d = 3f64.sqrt() / 6.0;
            Ok(vec![0.5 - d, 0.5 + d])
        }
        other => Err(Error::UnsupportedNodes(other)),
    }
}

/// Number of Gauss nodes used by a given order.
pub fn nodes_for_order(order: usize) -> Result<usize> {
    match order {
        2 => Ok(1),
        4 => Ok(2),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Truncated Magnus exponent from `A` sampled at the Gauss nodes.
///
/// Order 2 is the midpoint rule `hA(h/2)`. Order 4 keeps the first two terms,
/// `(h/2)(A₁ + A₂) + (√3h²/12)[A₂, A₁]`; with symmetric nodes the omitted
/// triple-integral term only enters at fifth order.
pub fn magnus_omega(
    a_at_nodes: &[SkewMatrixField],
    h: f64,
    order: usize,
) -> Result<SkewMatrixField> {
    let l = nodes_for_order(order)?;
    if a_at_nodes.len() != l {
        return Err(Error::NodeCountMismatch {
            expected: l,
            actual: a_at_nodes.len(),
        });
    }
    Ok(match order {
        2 => a_at_nodes[0].combine(h, &a_at_nodes[0], 0.0),
        _ => {
            let (a1, a2) = (&a_at_nodes[0], &a_at_nodes[1]);
            let w = 3f64.sqrt() * h * h / 12.0;
            a1.combine(0.5 * h, a2, 0.5 * h)
                .combine(1.0, &a2.commutator(a1), w)
        }
    })
}

/// Rodrigues formula for a single axis vector.
#[inline]
pub fn exp_axis(w: [f64; 3]) -> Rotation {
    let phi2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let phi = phi2.sqrt();
    let (s1, s2) = if phi < 1e-4 {
        (
            1.0 - phi2 / 6.0 + phi2 * phi2 / 120.0,
            0.5 - phi2 / 24.0 + phi2 * phi2 / 720.0,
        )
    } else {
        (phi.sin() / phi, (1.0 - phi.cos()) / phi2)
    };
    let k = [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let k2 = (0..3).map(|m| k[i][m] * k[m][j]).sum::<f64>();
            r[i][j] = if i == j { 1.0 } else { 0.0 } + s1 * k[i][j] + s2 * k2;
        }
    }
    r
}

/// Pointwise matrix exponential of a skew field.
pub fn exp_so3(field: &SkewMatrixField) -> Vec<Rotation> {
    par::map_indices(field.len(), |i| exp_axis(field.axis(i)))
}

/// `y ← R y` at every node, `y` having rows `(T, e1, e2)`.
pub fn apply_rotations(frame: &Frame, rots: &[Rotation]) -> Result<Frame> {
    let n = frame.grid().n_modes();
    if rots.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rots.len(),
        });
    }
    let rows = par::map_indices(n, |i| {
        let y = frame.rows(i);
        let r = &rots[i];
        let mut out = [[0.0; 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = r[a][0] * y[0][j] + r[a][1] * y[1][j] + r[a][2] * y[2][j];
            }
        }
        out
    });
    let mut next = frame.clone();
    for (i, r) in rows.into_iter().enumerate() {
        next.set_rows(i, r);
    }
    Ok(next)
}

/// One Magnus step driven by the NLS states at `t_m + c_l h`.
pub fn scheme_a_step(
    frame: &Frame,
    u_at_nodes: &[SpectralField],
    h: f64,
    order: usize,
) -> Result<Frame> {
    for u in u_at_nodes {
        if u.grid() != frame.grid() {
            return Err(Error::GridMismatch {
                left: frame.grid().n_modes(),
                right: u.grid().n_modes(),
            });
        }
    }
    let a: Vec<SkewMatrixField> = u_at_nodes
        .iter()
        .map(|u| assemble_a(u).to_matrix_field())
        .collect();
    let omega = magnus_omega(&a, h, order)?;
    apply_rotations(frame, &exp_so3(&omega))
}

/// Output of [`scheme_a_run`].
#[derive(Debug, Clone)]
pub struct SchemeATrajectory {
    /// Frames at `t_m = mh`, `m = 0..=M`.
    pub frames: Vec<Frame>,
    /// Node times `t_{m,l} = mh + c_l h`, flattened.
    pub node_times: Vec<f64>,
    /// NLS states at the node times.
    pub node_states: Vec<SpectralField>,
}

/// Scheme A: integrate the NLS once over the Gauss-node time grid with the
/// given splitting, then advance the frame by Magnus steps.
pub fn scheme_a_run(
    frame0: &Frame,
    u0: &SpectralField,
    h: f64,
    n_steps: usize,
    order: usize,
    nls_scheme: &SplittingScheme,
) -> Result<SchemeATrajectory> {
    let c = gauss_nodes(nodes_for_order(order)?)?;
    let mut times = Vec::with_capacity(1 + c.len() * n_steps);
    times.push(0.0);
    for m in 0..n_steps {
        for cl in &c {
            times.push(h * (m as f64 + cl));
        }
    }
    let states = run_splitting_substeps(u0, &times, nls_scheme, Some(h))?;
    let l = c.len();
    let mut frames = Vec::with_capacity(n_steps + 1);
    frames.push(frame0.clone());
    for m in 0..n_steps {
        let nodes = &states[1 + l * m..1 + l * (m + 1)];
        let next = scheme_a_step(&frames[m], nodes, h, order)?;
        frames.push(next);
    }
    Ok(SchemeATrajectory {
        frames,
        node_times: times[1..].to_vec(),
        node_states: states[1..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::initial_frame_frenet;
    use crate::spectral::{dot, TorusGrid, VectorField3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_skew(n: usize, seed: u64, scale: f64) -> SkewMatrixField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SkewMatrixField::zeros(n);
        for i in 0..n {
            f.a[i] = scale * rng.gen_range(-1.0..1.0);
            f.b[i] = scale * rng.gen_range(-1.0..1.0);
            f.c[i] = scale * rng.gen_range(-1.0..1.0);
        }
        f
    }

    fn matmul(x: &Rotation, y: &Rotation) -> Rotation {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        r
    }

    /// Truncated power series, used as an independent oracle.
    fn expm_series(k: &Rotation, terms: usize) -> Rotation {
        let mut out = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut term = out;
        for n in 1..terms {
            term = matmul(&term, k);
            for row in term.iter_mut() {
                for v in row.iter_mut() {
                    *v /= n as f64;
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += term[i][j];
                }
            }
        }
        out
    }

    fn circle_frame(n: usize) -> Frame {
        let g = TorusGrid::new(n).unwrap();
        initial_frame_frenet(&VectorField3::from_fn(g, |x| [x.cos(), x.sin(), 0.0])).unwrap()
    }

    #[test]
    fn assemble_a_examples() {
        let g = TorusGrid::new(16).unwrap();
        let z = assemble_a(&SpectralField::zeros(g));
        assert!(z.alpha.iter().all(|c| c.norm() == 0.0) && z.beta.iter().all(|b| *b == 0.0));
        let u = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, x));
        let a = assemble_a(&u);
        for i in 0..16 {
            let want = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, g.node(i));
            assert!((a.alpha[i] - want).norm() < 1e-13);
            assert!((a.beta[i] - 0.5).abs() < 1e-14);
        }
        let c = assemble_a(&SpectralField::from_fn(g, |_| Complex64::new(1.5, 0.0)));
        assert!(c.alpha.iter().all(|z| z.norm() < 1e-15));
        assert!(c.beta.iter().all(|b| (b - 1.125).abs() < 1e-14));
    }

    #[test]
    fn skew_entries_match_frame_ode() {
        let sk = SkewFieldCoeffs {
            alpha: vec![Complex64::new(0.3, -0.7)],
            beta: vec![0.9],
        };
        let m = sk.to_matrix_field().matrix(0);
        assert_eq!(m[0][1], 0.7);
        assert_eq!(m[0][2], 0.3);
        assert_eq!(m[1][2], -0.9);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], -m[j][i]);
            }
        }
    }

    #[test]
    fn gauss_node_values() {
        assert_eq!(gauss_nodes(1).unwrap(), vec![0.5]);
        let c = gauss_nodes(2).unwrap();
        assert!((c[0] - 0.211_324_865_405_187).abs() < 1e-14);
        assert!((c[1] - 0.788_675_134_594_813).abs() < 1e-14);
        assert!((c[0] + c[1] - 1.0).abs() < 1e-15);
        // Roots of the shifted Legendre polynomial 6x² − 6x + 1.
        for x in c {
            assert!((6.0 * x * x - 6.0 * x + 1.0).abs() < 1e-14);
        }
        assert!(matches!(gauss_nodes(3), Err(Error::UnsupportedNodes(3))));
    }

    #[test]
    fn commutator_is_cross_product() {
        let x = random_skew(50, 1, 1.0);
        let y = random_skew(50, 2, 1.0);
        let c = x.commutator(&y);
        for i in 0..50 {
            let (p, q) = (x.matrix(i), y.matrix(i));
            let (pq, qp) = (matmul(&p, &q), matmul(&q, &p));
            let m = c.matrix(i);
            for r in 0..3 {
                for s in 0..3 {
                    assert!((pq[r][s] - qp[r][s] - m[r][s]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn omega_special_cases() {
        let a = random_skew(8, 3, 1.0);
        let o2 = magnus_omega(&[a.clone()], 0.1, 2).unwrap();
        let o4 = magnus_omega(&[a.clone(), a.clone()], 0.1, 4).unwrap();
        for i in 0..8 {
            for (p, q) in o2.axis(i).iter().zip(o4.axis(i)) {
                assert!((p - q).abs() < 1e-15);
            }
            assert!((o2.a[i] - 0.1 * a.a[i]).abs() < 1e-16);
        }
        assert!(matches!(
            magnus_omega(&[a.clone()], 0.1, 4),
            Err(Error::NodeCountMismatch { .. })
        ));
        assert!(matches!(
            magnus_omega(&[a], 0.1, 6),
            Err(Error::UnsupportedOrder(6))
        ));
    }

    #[test]
    fn exp_matches_series() {
        let f = random_skew(40, 4, 1.5);
        let small = random_skew(10, 5, 1e-6);
        for field in [&f, &small] {
            let rots = exp_so3(field);
            for (i, r) in rots.iter().enumerate() {
                let want = expm_series(&field.matrix(i), 30);
                for p in 0..3 {
                    for q in 0..3 {
                        assert!((r[p][q] - want[p][q]).abs() < 1e-13);
                    }
                }
            }
        }
        let z = exp_so3(&SkewMatrixField::zeros(1));
        assert_eq!(z[0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn exp_about_single_axis() {
        let phi = 0.8;
        let mut f = SkewMatrixField::zeros(1);
        f.a[0] = phi;
        let r = exp_so3(&f)[0];
        assert!((r[0][0] - phi.cos()).abs() < 1e-15);
        assert!((r[0][1] + phi.sin()).abs() < 1e-15);
        assert!((r[1][0] - phi.sin()).abs() < 1e-15);
        assert!((r[2][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_is_orthogonal() {
        let f = random_skew(100, 6, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in exp_so3(&f) {
            let v = [rng.gen::<f64>(), rng.gen(), rng.gen()];
            let rv: Vec<f64> = (0..3).map(|i| dot(r[i], v)).collect();
            let (a, b) = (
                dot(v, v).sqrt(),
                (rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]).sqrt(),
            );
            assert!((a - b).abs() < 1e-12);
            let det = dot(r[0], cross(r[1], r[2]));
            assert!((det - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_leaves_frame() {
        let f = circle_frame(16);
        let z = SpectralField::zeros(f.grid());
        let next = scheme_a_step(&f, &[z.clone(), z], 0.1, 4).unwrap();
        assert_eq!(next, f);
    }

    #[test]
    fn frozen_data_is_exact_exponential() {
        let f = circle_frame(16);
        let g = f.grid();
        let u = SpectralField::from_fn(g, |x| Complex64::new(1.0 + 0.3 * x.cos(), 0.2 * x.sin()));
        let h = 0.05;
        let next = scheme_a_step(&f, &[u.clone(), u.clone()], h, 4).unwrap();
        let a = assemble_a(&u).to_matrix_field();
        for i in 0..16 {
            let mut k = a.matrix(i);
            k.iter_mut().flatten().for_each(|v| *v *= h);
            let r = expm_series(&k, 30);
            let y = f.rows(i);
            let got = next.rows(i);
            for p in 0..3 {
                for j in 0..3 {
                    let want: f64 = (0..3).map(|q| r[p][q] * y[q][j]).sum();
                    assert!((got[p][j] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn magnus_step_reverses() {
        let f = circle_frame(32);
        let g = f.grid();
        let u1 = SpectralField::from_fn(g, |x| Complex64::new(1.0 + 0.3 * x.cos(), 0.2 * x.sin()));
        let u2 = SpectralField::from_fn(g, |x| Complex64::new(0.9 + 0.4 * x.sin(), 0.1 * x.cos()));
        let h = 0.07;
        let fwd = scheme_a_step(&f, &[u1.clone(), u2.clone()], h, 4).unwrap();
        let back = scheme_a_step(&fwd, &[u2, u1], -h, 4).unwrap();
        for i in 0..32 {
            let (a, b) = (back.rows(i), f.rows(i));
            for p in 0..3 {
                for j in 0..3 {
                    assert!((a[p][j] - b[p][j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn long_run_keeps_orthonormality() {
        let f = circle_frame(32);
        let g = f.grid();
        let u = SpectralField::from_fn(g, |x| Complex64::new(1.0 + 0.5 * x.cos(), 0.3 * x.sin()));
        let mut y = f;
        for _ in 0..1000 {
            y = scheme_a_step(&y, &[u.clone(), u.clone()], 0.01, 4).unwrap();
        }
        assert!(y.orthonormality_defect() < 1e-10);
        assert!(y.t.max_unit_defect() < 1e-12);
    }

    #[test]
    fn run_shapes() {
        let f = circle_frame(16);
        let u0 = crate::frame::frame_nls_data(&f);
        let s = crate::splitting::preset("strang").unwrap();
        let tr = scheme_a_run(&f, &u0, 0.1, 3, 4, &s).unwrap();
        assert_eq!(tr.frames.len(), 4);
        assert_eq!(tr.node_states.len(), 6);
        assert!((tr.node_times[5] - 0.2 - 0.1 * gauss_nodes(2).unwrap()[1]).abs() < 1e-15);
    }
}
