//! Truncated Karhunen–Loève expansion of a Q-Wiener process on `(0, 1)`
//! with the Dirichlet sine basis `g_k(ξ) = √2 sin(kπξ)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::fill_standard_normals;

/// Covariance eigenvalues `q_k`, `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenvalueRule {
    /// `q_k = scale · k^{−exponent}`.
    Power { exponent: f64, scale: f64 },
    /// Explicit list; modes beyond its length have `q_k = 0`.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QWienerSpec {
    pub rule: EigenvalueRule,
    pub n_modes: usize,
}

/// Partial trace and, for power-law rules, the bound `∫_K^∞ x^{−s} dx` on the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSummary {
    pub partial: f64,
    pub tail_bound: Option<f64>,
}

impl QWienerSpec {
    pub fn power(exponent: f64, n_modes: usize) -> Result<Self> {
        Self::power_scaled(exponent, 1.0, n_modes)
    }

    pub fn power_scaled(exponent: f64, scale: f64, n_modes: usize) -> Result<Self> {
        if !(exponent > 1.0) {
            return Err(Error::invalid(format!(
                "decay exponent {exponent} must exceed 1 for trace-class noise"
            )));
        }
        if !(scale >= 0.0) {
            return Err(Error::invalid("noise scale must be nonnegative"));
        }
        if n_modes == 0 {
            return Err(Error::invalid("need at least one noise mode"));
        }
        Ok(Self {
            rule: EigenvalueRule::Power { exponent, scale },
            n_modes,
        })
    }

    /// `q_k = k⁻²`: trace class, but not regular enough for `Ḣ¹` estimates.
    pub fn trace_class(n_modes: usize) -> Result<Self> {
        Self::power(2.0, n_modes)
    }

    /// `q_k = k⁻⁴`: `Σ λ_k q_k < ∞`, required by the strong-rate experiments.
    pub fn smooth(n_modes: usize) -> Result<Self> {
        Self::power(4.0, n_modes)
    }

    pub fn explicit(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("explicit eigenvalues must be nonnegative"));
        }
        let n = q.len();
        Ok(Self {
            rule: EigenvalueRule::Explicit(q),
            n_modes: n,
        })
    }

    pub fn with_modes(&self, n_modes: usize) -> Self {
        Self {
            rule: self.rule.clone(),
            n_modes,
        }
    }

    /// `q_k` for `k ≥ 1`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        match &self.rule {
            EigenvalueRule::Power { exponent, scale } => scale * (k as f64).powf(-exponent),
            EigenvalueRule::Explicit(q) => q.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn partial_trace(&self) -> TraceSummary {
        // Sum smallest terms first.
        let partial = (1..=self.n_modes).rev().map(|k| self.eigenvalue(k)).sum();
        let tail_bound = match self.rule {
            EigenvalueRule::Power { exponent, scale } => {
                Some(scale * (self.n_modes as f64).powf(1.0 - exponent) / (exponent - 1.0))
            }
            EigenvalueRule::Explicit(_) => None,
        };
        TraceSummary {
            partial,
            tail_bound,
        }
    }

    /// `Σ_k λ_k q_k` with `λ_k = (kπ)²`, the squared `HS(H; Ḣ¹)` norm of
    /// `Q^{1/2}` (finite only for sufficiently fast decay).
    pub fn h1_trace(&self) -> f64 {
        (1..=self.n_modes)
            .rev()
            .map(|k| (k as f64 * PI).powi(2) * self.eigenvalue(k))
            .sum()
    }
}

/// `g_k(ξ) = √2 sin(kπξ)`.
#[inline]
pub fn basis(k: usize, xi: f64) -> f64 {
    SQRT_2 * (k as f64 * PI * xi).sin()
}

/// Brownian increments `Δβ_k` of one path, stored step-major.
///
/// An aggregated path keeps the increments it was generated at, so every
/// coarse increment is a left-to-right sum of fine ones regardless of how
/// many aggregation steps produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    tau: f64,
    n_steps: usize,
    n_modes: usize,
    increments: Vec<f64>,
    seed: u64,
    base: Option<(Arc<Vec<f64>>, f64, usize)>,
}

impl NoisePath {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.increments[step * self.n_modes..(step + 1) * self.n_modes]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Sum consecutive blocks of `factor` steps.
    pub fn aggregate(&self, factor: usize) -> Result<NoisePath> {
        if factor < 1 {
            return Err(Error::invalid("aggregation factor must be at least 1"));
        }
        if !self.n_steps.is_multiple_of(factor) {
            return Err(Error::invalid(format!(
                "{} steps are not divisible by factor {factor}",
                self.n_steps
            )));
        }
        let n_coarse = self.n_steps / factor;
        let (fine, fine_tau, group) = match &self.base {
            Some((f, t, g)) => (f.clone(), *t, g * factor),
            None => (Arc::new(self.increments.clone()), self.tau, factor),
        };
        let mut inc = vec![0.0; n_coarse * self.n_modes];
        for j in 0..n_coarse {
            let dst = &mut inc[j * self.n_modes..(j + 1) * self.n_modes];
            for s in j * group..(j + 1) * group {
                let row = &fine[s * self.n_modes..(s + 1) * self.n_modes];
                for (d, v) in dst.iter_mut().zip(row) {
                    *d += v;
                }
            }
        }
        Ok(NoisePath {
            tau: fine_tau * group as f64,
            n_steps: n_coarse,
            n_modes: self.n_modes,
            increments: inc,
            seed: self.seed,
            base: Some((fine, fine_tau, group)),
        })
    }

    /// Long-format CSV `step,mode,increment` (modes are 1-based).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,mode,increment\n");
        for s in 0..self.n_steps {
            for (k, v) in self.row(s).iter().enumerate() {
                let _ = writeln!(out, "{s},{},{v}", k + 1);
            }
        }
        out
    }

    pub fn from_csv(text: &str, tau: f64, seed: u64) -> Result<NoisePath> {
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let bad = || Error::invalid(format!("malformed noise CSV line {}", lineno + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let s = parts[0].trim().parse::<usize>().map_err(|_| bad())?;
            let k = parts[1].trim().parse::<usize>().map_err(|_| bad())?;
            let v = parts[2].trim().parse::<f64>().map_err(|_| bad())?;
            rows.push((s, k, v));
        }
        let n_steps = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let n_modes = rows.iter().map(|r| r.1).max().unwrap_or(0);
        if n_steps * n_modes != rows.len() || n_modes == 0 {
            return Err(Error::invalid("noise CSV is not a complete step × mode table"));
        }
        let mut inc = vec![f64::NAN; n_steps * n_modes];
        for (s, k, v) in rows {
            if k == 0 {
                return Err(Error::invalid("noise CSV modes are 1-based"));
            }
            inc[s * n_modes + k - 1] = v;
        }
        if inc.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("noise CSV has duplicate entries"));
        }
        Ok(NoisePath {
            tau,
            n_steps,
            n_modes,
            increments: inc,
            seed,
            base: None,
        })
    }
}

/// Anything that can supply the mode increments of step `m`.
pub trait NoiseSource: Sync {
    fn tau(&self) -> f64;
    fn n_steps(&self) -> usize;
    fn n_modes(&self) -> usize;
    fn fill_increments(&self, step: usize, out: &mut [f64]);
}

impl NoiseSource for NoisePath {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn n_steps(&self) -> usize {
        self.n_steps
    }
    fn n_modes(&self) -> usize {
        self.n_modes
    }
    fn fill_increments(&self, step: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(step));
    }
}

/// Increments regenerated on demand from the seed; identical to the rows
/// of [`sample_path`] with the same arguments, without storing them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamedNoise {
    pub tau: f64,
    pub n_steps: usize,
    pub n_modes: usize,
    pub seed: u64,
}

impl NoiseSource for StreamedNoise {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn n_steps(&self) -> usize {
        self.n_steps
    }
    fn n_modes(&self) -> usize {
        self.n_modes
    }
    fn fill_increments(&self, step: usize, out: &mut [f64]) {
        fill_row(self.seed, step, self.tau, out);
    }
}

fn fill_row(seed: u64, step: usize, tau: f64, out: &mut [f64]) {
    fill_standard_normals(seed, step as u64, out);
    let s = tau.sqrt();
    out.iter_mut().for_each(|x| *x *= s);
}

/// Draw `n_steps × n_modes` independent `N(0, τ)` increments.
pub fn sample_path(spec: &QWienerSpec, tau: f64, n_steps: usize, seed: u64) -> Result<NoisePath> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("tau = {tau} must be positive")));
    }
    if n_steps == 0 {
        return Err(Error::invalid("noise path needs at least one step"));
    }
    let n_modes = spec.n_modes;
    let mut inc = vec![0.0; n_steps * n_modes];
    for (s, row) in inc.chunks_mut(n_modes).enumerate() {
        fill_row(seed, s, tau, row);
    }
    Ok(NoisePath {
        tau,
        n_steps,
        n_modes,
        increments: inc,
        seed,
        base: None,
    })
}

/// `ξ ↦ Σ_k √q_k g_k(ξ) Δβ_k` at each point.
pub fn evaluate_field(spec: &QWienerSpec, increments: &[f64], points: &[f64]) -> Vec<f64> {
    let sq: Vec<f64> = spec.eigenvalues().iter().map(|q| q.sqrt()).collect();
    points
        .iter()
        .map(|&x| {
            increments
                .iter()
                .zip(&sq)
                .enumerate()
                .map(|(k, (db, s))| s * basis(k + 1, x) * db)
                .sum()
        })
        .collect()
}

/// Precomputed `√q_k g_k(ξ_p)` on a fixed point set, for repeated field
/// evaluation, together with `Σ_k q_k g_k(ξ_p)²`.
#[derive(Debug, Clone)]
pub struct FieldBasis {
    n_points: usize,
    n_modes: usize,
    /// Point-major.
    values: Vec<f64>,
    q_diag: Vec<f64>,
}

impl FieldBasis {
    pub fn new(spec: &QWienerSpec, points: &[f64]) -> Self {
        let n_modes = spec.n_modes;
        let sq: Vec<f64> = spec.eigenvalues().iter().map(|q| q.sqrt()).collect();
        let mut values = Vec::with_capacity(points.len() * n_modes);
        let mut q_diag = Vec::with_capacity(points.len());
        for &x in points {
            let mut d = 0.0;
            for (k, s) in sq.iter().enumerate() {
                let v = s * basis(k + 1, x);
                values.push(v);
                d += v * v;
            }
            q_diag.push(d);
        }
        Self {
            n_points: points.len(),
            n_modes,
            values,
            q_diag,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Field values for the increments of one step; only the first
    /// `n_modes` increments are used.
    pub fn field_into(&self, increments: &[f64], out: &mut [f64]) {
        let inc = &increments[..self.n_modes];
        for (p, o) in out.iter_mut().enumerate() {
            let row = &self.values[p * self.n_modes..(p + 1) * self.n_modes];
            *o = row.iter().zip(inc).map(|(a, b)| a * b).sum();
        }
    }

    pub fn q_diag(&self) -> &[f64] {
        &self.q_diag
    }
}
