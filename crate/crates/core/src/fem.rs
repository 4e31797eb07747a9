//! Uniform P1 finite elements on `(0, 1)` with homogeneous Dirichlet
//! conditions.
//!
//! Unknowns are the nodal values at the `n_cells − 1` interior nodes. All
//! integrals of nonlinear integrands use three-point Gauss quadrature per
//! cell, exact for polynomials of degree five.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::linalg::{SymTridiag, TridiagFactor};

const GAUSS_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
/// Quadrature points per cell.
pub const QUAD_PER_CELL: usize = 3;

/// Nodal coefficients of an interior P1 function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FemVector(pub Vec<f64>);

impl FemVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Two-row CSV: interior node coordinates, then nodal values.
    pub fn to_csv(&self, space: &FemSpace) -> String {
        let mut out = String::new();
        let header: Vec<String> = space.nodes().iter().map(|x| format!("{x}")).collect();
        let values: Vec<String> = self.0.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", header.join(","));
        let _ = writeln!(out, "{}", values.join(","));
        out
    }

    pub fn from_csv(space: &FemSpace, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse = |line: &str| -> Result<Vec<f64>> {
            line.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad CSV number {t:?}: {e}")))
                })
                .collect()
        };
        let header = parse(lines.next().ok_or_else(|| Error::invalid("empty CSV"))?)?;
        let values = parse(lines.next().ok_or_else(|| Error::invalid("CSV missing value row"))?)?;
        if header.len() != space.dim() || values.len() != space.dim() {
            return Err(Error::invalid(format!(
                "CSV has {} columns, space has {} interior nodes",
                values.len(),
                space.dim()
            )));
        }
        for (a, b) in header.iter().zip(space.nodes()) {
            if (a - b).abs() > 1e-12 {
                return Err(Error::invalid("CSV node coordinates do not match the mesh"));
            }
        }
        Ok(Self(values))
    }
}

impl Deref for FemVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for FemVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for FemVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// L², Ḣ¹-seminorm and Ḣ⁻¹ norms of a discrete function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h_minus1: f64,
}

#[derive(Debug, Clone)]
pub struct FemSpace {
    n_cells: usize,
    h: f64,
    nodes: Vec<f64>,
    mass: SymTridiag,
    stiffness: SymTridiag,
    mass_factor: TridiagFactor,
    stiffness_factor: TridiagFactor,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
    phi_left: [f64; 3],
    phi_right: [f64; 3],
}

impl FemSpace {
    pub fn build(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 cells for an interior node, got {n_cells}"
            )));
        }
        let n = n_cells - 1;
        let h = 1.0 / n_cells as f64;
        let nodes = (1..n_cells).map(|i| i as f64 * h).collect();
        let mass = SymTridiag::toeplitz(n, 2.0 * h / 3.0, h / 6.0);
        let stiffness = SymTridiag::toeplitz(n, 2.0 / h, -1.0 / h);
        let mass_factor = mass.factor().expect("P1 mass matrix is SPD");
        let stiffness_factor = stiffness.factor().expect("P1 stiffness matrix is SPD");

        let mut quad_points = Vec::with_capacity(n_cells * QUAD_PER_CELL);
        let mut quad_weights = Vec::with_capacity(n_cells * QUAD_PER_CELL);
        for c in 0..n_cells {
            let left = c as f64 * h;
            for q in 0..QUAD_PER_CELL {
                quad_points.push(left + 0.5 * h * (1.0 + GAUSS_NODES[q]));
                quad_weights.push(0.5 * h * GAUSS_WEIGHTS[q]);
            }
        }
        let phi_left = GAUSS_NODES.map(|s| 0.5 * (1.0 - s));
        let phi_right = GAUSS_NODES.map(|s| 0.5 * (1.0 + s));
        Ok(Self {
            n_cells,
            h,
            nodes,
            mass,
            stiffness,
            mass_factor,
            stiffness_factor,
            quad_points,
            quad_weights,
            phi_left,
            phi_right,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of interior nodes.
    pub fn dim(&self) -> usize {
        self.n_cells - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    pub fn quad_points(&self) -> &[f64] {
        &self.quad_points
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn n_quad(&self) -> usize {
        self.quad_points.len()
    }

    /// Solve `M c = b`.
    pub fn solve_mass(&self, b: &[f64]) -> Vec<f64> {
        self.mass_factor.solve(b)
    }

    /// Solve `K c = b`.
    pub fn solve_stiffness(&self, b: &[f64]) -> Vec<f64> {
        self.stiffness_factor.solve(b)
    }

    #[inline]
    fn cell_coeffs(&self, u: &[f64], c: usize) -> (f64, f64) {
        let left = if c >= 1 { u[c - 1] } else { 0.0 };
        let right = if c + 1 < self.n_cells { u[c] } else { 0.0 };
        (left, right)
    }

    /// Values of the P1 interpolant of `u` at every quadrature point.
    pub fn values_at_quad_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.dim());
        for c in 0..self.n_cells {
            let (ul, ur) = self.cell_coeffs(u, c);
            for q in 0..QUAD_PER_CELL {
                out[c * QUAD_PER_CELL + q] = ul * self.phi_left[q] + ur * self.phi_right[q];
            }
        }
    }

    pub fn values_at_quad(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_quad()];
        self.values_at_quad_into(u, &mut out);
        out
    }

    /// `b_i = Σ_q w_q v_q φ_i(ξ_q)` for integrand values `v` at quadrature points.
    pub fn load_from_quad_into(&self, vals: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|b| *b = 0.0);
        for c in 0..self.n_cells {
            let mut bl = 0.0;
            let mut br = 0.0;
            for q in 0..QUAD_PER_CELL {
                let k = c * QUAD_PER_CELL + q;
                let wv = self.quad_weights[k] * vals[k];
                bl += wv * self.phi_left[q];
                br += wv * self.phi_right[q];
            }
            if c >= 1 {
                out[c - 1] += bl;
            }
            if c + 1 < self.n_cells {
                out[c] += br;
            }
        }
    }

    pub fn load_from_quad(&self, vals: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.load_from_quad_into(vals, &mut out);
        out
    }

    /// Weighted mass matrix `∫ w(ξ) φ_i φ_j` with `w` given at quadrature points.
    pub fn weighted_mass(&self, weights: &[f64]) -> SymTridiag {
        let n = self.dim();
        let mut m = SymTridiag::zeros(n);
        for c in 0..self.n_cells {
            let (mut ll, mut lr, mut rr) = (0.0, 0.0, 0.0);
            for q in 0..QUAD_PER_CELL {
                let k = c * QUAD_PER_CELL + q;
                let w = self.quad_weights[k] * weights[k];
                ll += w * self.phi_left[q] * self.phi_left[q];
                lr += w * self.phi_left[q] * self.phi_right[q];
                rr += w * self.phi_right[q] * self.phi_right[q];
            }
            let has_left = c >= 1;
            let has_right = c + 1 < self.n_cells;
            if has_left {
                m.diag[c - 1] += ll;
            }
            if has_right {
                m.diag[c] += rr;
            }
            if has_left && has_right {
                m.off[c - 1] += lr;
            }
        }
        m
    }

    /// Load vector of `fn` against every hat function.
    pub fn load_of(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let vals: Vec<f64> = self.quad_points.iter().map(|&x| f(x)).collect();
        self.load_from_quad(&vals)
    }

    /// L² projection onto the discrete space.
    pub fn project_l2(&self, f: impl Fn(f64) -> f64) -> FemVector {
        FemVector(self.solve_mass(&self.load_of(f)))
    }

    /// Nodal interpolant.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> FemVector {
        FemVector(self.nodes.iter().map(|&x| f(x)).collect())
    }

    /// `b_i = ∫ f(u(ξ)) φ_i(ξ) dξ` for the P1 function `u`.
    pub fn nemytskii_load(&self, f: impl Fn(f64) -> f64, u: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = self.values_at_quad(u).into_iter().map(f).collect();
        self.load_from_quad(&vals)
    }

    /// Discrete L² inner product `aᵀ M b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        crate::linalg::dot(a, &self.mass.mul_vec(b))
    }

    pub fn l2_norm_sq(&self, v: &[f64]) -> f64 {
        self.mass.quad_form(v).max(0.0)
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.l2_norm_sq(v).sqrt()
    }

    pub fn h1_semi_sq(&self, v: &[f64]) -> f64 {
        self.stiffness.quad_form(v).max(0.0)
    }

    pub fn norms(&self, v: &[f64]) -> Norms {
        let b = self.mass.mul_vec(v);
        let kinv_b = self.solve_stiffness(&b);
        Norms {
            l2: self.l2_norm(v),
            h1_semi: self.h1_semi_sq(v).sqrt(),
            h_minus1: crate::linalg::dot(&b, &kinv_b).max(0.0).sqrt(),
        }
    }

    /// Closed-form generalized eigenvalue of `K v = λ M v` for the `k`-th
    /// discrete sine mode on a uniform mesh.
    pub fn discrete_eigenvalue(&self, k: usize) -> f64 {
        let c = (k as f64 * PI * self.h).cos();
        6.0 / (self.h * self.h) * (1.0 - c) / (2.0 + c)
    }

    /// Nodal values `sin(kπξ_i)` of the `k`-th discrete eigenvector (unnormalized).
    pub fn sine_mode(&self, k: usize) -> FemVector {
        self.interpolate(|x| (k as f64 * PI * x).sin())
    }

    /// Smallest eigenpair of `K v = λ M v` by inverse iteration; the
    /// eigenvector is M-normalized with positive values.
    pub fn smallest_eigenvalue(&self) -> Result<(f64, FemVector)> {
        const TOL: f64 = 1e-10;
        const MAX_ITERS: usize = 10_000;
        let n = self.dim();
        let mut v = vec![1.0; n];
        let s = self.l2_norm(&v);
        v.iter_mut().for_each(|x| *x /= s);
        let mut lambda = self.stiffness.quad_form(&v);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERS {
            let mut w = self.stiffness_factor.solve(&self.mass.mul_vec(&v));
            let s = self.l2_norm(&w);
            w.iter_mut().for_each(|x| *x /= s);
            lambda = self.stiffness.quad_form(&w);
            let kw = self.stiffness.mul_vec(&w);
            let mw = self.mass.mul_vec(&w);
            let num: f64 = kw
                .iter()
                .zip(&mw)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let den = lambda * crate::linalg::norm2(&mw);
            residual = num / den;
            v = w;
            if residual <= TOL {
                if v.iter().sum::<f64>() < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                return Ok((lambda, FemVector(v)));
            }
        }
        let _ = lambda;
        Err(Error::ConvergenceFailure {
            iterations: MAX_ITERS,
            residual,
        })
    }

    /// Evaluate the P1 function with coefficients `v` at `x ∈ [0, 1]`.
    pub fn eval_at(&self, v: &[f64], x: f64) -> f64 {
        let t = (x / self.h).clamp(0.0, self.n_cells as f64);
        let c = (t.floor() as usize).min(self.n_cells - 1);
        let s = t - c as f64;
        let (ul, ur) = self.cell_coeffs(v, c);
        ul * (1.0 - s) + ur * s
    }

    /// Interpolate `v` onto the nodes of a finer mesh. For nested uniform
    /// meshes this reproduces the same piecewise-linear function.
    pub fn prolong_to(&self, fine: &FemSpace, v: &[f64]) -> FemVector {
        FemVector(fine.nodes.iter().map(|&x| self.eval_at(v, x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn assembly_small_meshes() {
        let s = FemSpace::build(2).unwrap();
        assert_eq!(s.dim(), 1);
        assert_relative_eq!(s.mass().diag[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.stiffness().diag[0], 4.0, epsilon = 1e-15);

        let s = FemSpace::build(4).unwrap();
        assert!(s.mass().diag.iter().all(|d| (d - 1.0 / 6.0).abs() < 1e-15));
        assert!(s.mass().off.iter().all(|d| (d - 1.0 / 24.0).abs() < 1e-15));
        assert!(s.stiffness().diag.iter().all(|d| (d - 8.0).abs() < 1e-14));
        assert!(s.stiffness().off.iter().all(|d| (d + 4.0).abs() < 1e-14));
        assert!(FemSpace::build(1).is_err());
        assert!(FemSpace::build(0).is_err());
    }

    #[test]
    fn quadrature_mass_matches_assembled() {
        let s = FemSpace::build(7).unwrap();
        let wm = s.weighted_mass(&vec![1.0; s.n_quad()]);
        assert!(max_abs_diff(&wm.diag, &s.mass().diag) < 1e-15);
        assert!(max_abs_diff(&wm.off, &s.mass().off) < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let s = FemSpace::build(16).unwrap();
        assert!(s.project_l2(|_| 0.0).iter().all(|&c| c == 0.0));
        // Projection of a hat function is the unit vector.
        for j in [0usize, 5, 14] {
            let xj = s.nodes()[j];
            let h = s.h();
            let hat = move |x: f64| (1.0 - (x - xj).abs() / h).max(0.0);
            let c = s.project_l2(hat);
            for (i, &ci) in c.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ci - want).abs() < 1e-13, "j={j} i={i} c={ci}");
            }
        }
        let s = FemSpace::build(64).unwrap();
        let c = s.project_l2(|x| (PI * x).sin());
        let err = s
            .nodes()
            .iter()
            .zip(c.iter())
            .map(|(x, c)| (c - (PI * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn norms_of_sine() {
        let s = FemSpace::build(3).unwrap();
        assert_eq!(
            s.norms(&[0.0, 0.0]),
            Norms {
                l2: 0.0,
                h1_semi: 0.0,
                h_minus1: 0.0
            }
        );
        let s = FemSpace::build(256).unwrap();
        let v = s.interpolate(|x| (PI * x).sin());
        let n = s.norms(&v);
        assert!((n.l2 - 0.5f64.sqrt()).abs() < 1e-4);
        assert!((n.h1_semi - PI / 2f64.sqrt()).abs() < 1e-3);
        // ‖sin πξ‖_{-1} = ‖sin πξ‖ / π
        assert!((n.h_minus1 - 0.5f64.sqrt() / PI).abs() < 1e-4);
    }

    #[test]
    fn eigenvalue_closed_form() {
        let s = FemSpace::build(10).unwrap();
        let (lam, v) = s.smallest_eigenvalue().unwrap();
        let exact = s.discrete_eigenvalue(1);
        assert!((exact - 9.95104).abs() < 1e-5);
        assert!((lam - exact).abs() <= 1e-10 * exact);
        assert!((s.l2_norm(&v) - 1.0).abs() < 1e-12);
        let s = FemSpace::build(128).unwrap();
        let (lam, _) = s.smallest_eigenvalue().unwrap();
        assert!(lam >= PI * PI && lam - PI * PI < 5e-3);
    }

    #[test]
    fn nemytskii_examples() {
        let s = FemSpace::build(8).unwrap();
        let u: Vec<f64> = (0..s.dim()).map(|i| (i as f64 * 0.37).sin() - 0.2).collect();
        let b = s.nemytskii_load(|_| 1.0, &u);
        assert!(b.iter().all(|&bi| (bi - s.h()).abs() < 1e-15));
        let b = s.nemytskii_load(|x| x, &u);
        assert!(max_abs_diff(&b, &s.mass().mul_vec(&u)) < 1e-15);
        let ones = vec![1.0; s.dim()];
        let b = s.nemytskii_load(|x| x * x * x, &ones);
        for bi in &b[1..s.dim() - 1] {
            assert!((bi - s.h()).abs() < 1e-15);
        }
        assert!((b[0] - s.h()).abs() > 1e-3);
    }

    #[test]
    fn prolongation_is_exact_on_nested_meshes() {
        let coarse = FemSpace::build(4).unwrap();
        let fine = FemSpace::build(16).unwrap();
        let v = vec![0.3, -1.0, 2.0];
        let p = coarse.prolong_to(&fine, &v);
        for (i, &x) in fine.nodes().iter().enumerate() {
            assert!((p[i] - coarse.eval_at(&v, x)).abs() < 1e-15);
        }
        assert!((p[3] - 0.3).abs() < 1e-15 && (p[7] + 1.0).abs() < 1e-15);
        // Norms agree on both meshes since the function is the same.
        assert!((coarse.l2_norm(&v) - fine.l2_norm(&p)).abs() < 1e-14);
    }

    #[test]
    fn csv_roundtrip() {
        let s = FemSpace::build(5).unwrap();
        let v = FemVector(vec![0.1, -0.25, 1e-20, 3.5]);
        let back = FemVector::from_csv(&s, &v.to_csv(&s)).unwrap();
        assert_eq!(v, back);
        assert!(FemVector::from_csv(&FemSpace::build(4).unwrap(), &v.to_csv(&s)).is_err());
    }

    fn cubic_by_dense_quadrature(s: &FemSpace, u: &[f64], coef: [f64; 4]) -> Vec<f64> {
        // Exact integration of a quartic on each cell by 5 Gauss points.
        let g = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let mut b = vec![0.0; s.dim()];
        for c in 0..s.n_cells() {
            let ul = if c >= 1 { u[c - 1] } else { 0.0 };
            let ur = if c + 1 < s.n_cells() { u[c] } else { 0.0 };
            for (t, w) in g {
                let (pl, pr) = (0.5 * (1.0 - t), 0.5 * (1.0 + t));
                let x = ul * pl + ur * pr;
                let fx = coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x * x * x;
                let w = 0.5 * s.h() * w;
                if c >= 1 {
                    b[c - 1] += w * fx * pl;
                }
                if c + 1 < s.n_cells() {
                    b[c] += w * fx * pr;
                }
            }
        }
        b
    }

    proptest! {
        #[test]
        fn cubic_loads_are_exact(
            u in proptest::collection::vec(-2.0f64..2.0, 9),
            coef in proptest::array::uniform4(-2.0f64..2.0),
        ) {
            let s = FemSpace::build(10).unwrap();
            let f = |x: f64| coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x * x * x;
            let b = s.nemytskii_load(f, &u);
            let want = cubic_by_dense_quadrature(&s, &u, coef);
            prop_assert!(max_abs_diff(&b, &want) < 1e-13);
        }

        #[test]
        fn projection_is_galerkin_orthogonal(a in -2.0f64..2.0, k in 1u32..6) {
            let s = FemSpace::build(12).unwrap();
            let f = move |x: f64| a * (k as f64 * PI * x).sin() + x * x;
            let c = s.project_l2(f);
            let r = s.mass().mul_vec(&c);
            let b = s.load_of(f);
            prop_assert!(max_abs_diff(&r, &b) < 1e-12);
        }

        #[test]
        fn norm_embeddings(v in proptest::collection::vec(-3.0f64..3.0, 15)) {
            let s = FemSpace::build(16).unwrap();
            let lam = s.discrete_eigenvalue(1);
            let n = s.norms(&v);
            prop_assert!(n.h_minus1 <= n.l2 / lam.sqrt() * (1.0 + 1e-10) + 1e-14);
            prop_assert!(n.l2 <= n.h1_semi / lam.sqrt() * (1.0 + 1e-10) + 1e-14);
        }
    }
}
