//! Time stepping: drift-implicit Euler Galerkin (DIEG) and its Milstein
//! refinement (DIEM).
//!
//! One step solves
//!
//! ```text
//! (M + τK) u − τ L(f(u)) = M x + L(g(x) δW) [+ L(½ g'(x) g(x) (δW² − τ q))]
//! ```
//!
//! where `L(v)_i = ∫ v φ_i` by Gauss quadrature, `δW` is the noise field at
//! the quadrature points and `q(ξ) = Σ_k q_k g_k(ξ)²`. The implicit equation
//! is solved by damped Newton with an exact tridiagonal Jacobian.

use crate::error::{Error, Result};
use crate::fem::{FemSpace, FemVector};
use crate::linalg::{norm2, SymTridiag};
use crate::noise::{FieldBasis, NoiseSource, QWienerSpec};
use crate::observable::Observable;
use crate::problem::{max_wellposed_tau_galerkin, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual tolerance.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub fallback_fixed_point: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            fallback_fixed_point: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::invalid("newton_tol must be positive"));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::invalid("max_newton_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub newton_iters: usize,
    /// `‖residual‖₂ / scale` of the accepted iterate.
    pub final_residual: f64,
    pub used_fallback: bool,
    /// `false` if some accepted Newton update failed to reduce the residual.
    pub residual_decreasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Dieg,
    Diem,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Dieg => "dieg",
            Scheme::Diem => "diem",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dieg" => Ok(Scheme::Dieg),
            "diem" => Ok(Scheme::Diem),
            other => Err(Error::invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Solve `(M + τK) u − τ L(φ(u)) = rhs`, where `φ(q, u_q)` returns the
/// pointwise nonlinearity and its derivative at quadrature point `q`.
/// On failure returns the last relative residual.
fn solve_implicit(
    space: &FemSpace,
    system: &SymTridiag,
    tau: f64,
    rhs: &[f64],
    guess: Vec<f64>,
    phi: impl Fn(usize, f64) -> (f64, f64),
    cfg: &SolverConfig,
) -> std::result::Result<(Vec<f64>, StepReport), f64> {
    let nq = space.n_quad();
    let mut uq = vec![0.0; nq];
    let mut fq = vec![0.0; nq];
    let mut dfq = vec![0.0; nq];
    let mut load = vec![0.0; space.dim()];
    let rhs_norm = norm2(rhs);

    // Residual, its norm, and the scale the tolerance is relative to.
    let mut eval = |u: &[f64], want_jac: bool, fq: &mut [f64], dfq: &mut [f64]| {
        space.values_at_quad_into(u, &mut uq);
        for q in 0..nq {
            let (v, d) = phi(q, uq[q]);
            fq[q] = v;
            if want_jac {
                dfq[q] = d;
            }
        }
        space.load_from_quad_into(fq, &mut load);
        let mut r = system.mul_vec(u);
        for i in 0..r.len() {
            r[i] -= tau * load[i] + rhs[i];
        }
        let scale = rhs_norm.max(tau * norm2(&load)).max(f64::MIN_POSITIVE);
        let rn = norm2(&r);
        (r, rn, scale)
    };

    let mut u = guess;
    let (mut r, mut rn, mut scale) = eval(&u, true, &mut fq, &mut dfq);
    let mut report = StepReport {
        residual_decreasing: true,
        ..Default::default()
    };
    let mut newton_ok = true;
    while rn > cfg.newton_tol * scale {
        if report.newton_iters >= cfg.max_newton_iters {
            newton_ok = false;
            break;
        }
        let jac = system.add_scaled(-tau, &space.weighted_mass(&dfq));
        let Some(factor) = jac.factor() else {
            newton_ok = false;
            break;
        };
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        factor.solve_in_place(&mut delta);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let (rt, rnt, st) = eval(&trial, true, &mut fq, &mut dfq);
            if rnt < rn || rnt <= cfg.newton_tol * st {
                u = trial;
                r = rt;
                rn = rnt;
                scale = st;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        report.newton_iters += 1;
        if !accepted {
            newton_ok = false;
            break;
        }
    }
    if newton_ok {
        report.final_residual = rn / scale;
        return Ok((u, report));
    }
    if !cfg.fallback_fixed_point {
        return Err(rn / scale);
    }

    // u ← (M + τK)⁻¹ (rhs + τ L(φ(u))), a contraction when τL₁ < 1 + τλ₁ʰ.
    report.used_fallback = true;
    let factor = system.factor().ok_or(rn / scale)?;
    let mut uq2 = vec![0.0; nq];
    let mut load2 = vec![0.0; space.dim()];
    for _ in 0..(20 * cfg.max_newton_iters) {
        space.values_at_quad_into(&u, &mut uq2);
        for q in 0..nq {
            fq[q] = phi(q, uq2[q]).0;
        }
        space.load_from_quad_into(&fq, &mut load2);
        let mut next: Vec<f64> = rhs.iter().zip(&load2).map(|(b, l)| b + tau * l).collect();
        factor.solve_in_place(&mut next);
        u = next;
        let (_, rnn, sn) = eval(&u, false, &mut fq, &mut dfq);
        rn = rnn;
        scale = sn;
        if rn <= cfg.newton_tol * scale {
            report.final_residual = rn / scale;
            return Ok((u, report));
        }
    }
    Err(rn / scale)
}

fn noise_rhs(
    space: &FemSpace,
    problem: &ProblemSpec,
    state: &[f64],
    dw: Option<&[f64]>,
    milstein: Option<(&[f64], f64)>,
) -> Vec<f64> {
    let mut rhs = space.mass().mul_vec(state);
    let Some(dw) = dw else {
        return rhs;
    };
    let g = &problem.diffusion;
    let sq = space.values_at_quad(state);
    let vals: Vec<f64> = match milstein {
        Some((qdiag, tau)) if !g.is_additive() => sq
            .iter()
            .zip(dw)
            .zip(qdiag)
            .map(|((&s, &w), &qd)| {
                let gs = g.eval(s);
                gs * w + 0.5 * g.derivative(s) * gs * (w * w - tau * qd)
            })
            .collect(),
        _ => sq.iter().zip(dw).map(|(&s, &w)| g.eval(s) * w).collect(),
    };
    let nl = space.load_from_quad(&vals);
    rhs.iter_mut().zip(&nl).for_each(|(a, b)| *a += b);
    rhs
}

#[allow(clippy::too_many_arguments)]
fn step_with(
    space: &FemSpace,
    problem: &ProblemSpec,
    system: &SymTridiag,
    state: &[f64],
    dw: Option<&[f64]>,
    milstein: Option<(&[f64], f64)>,
    tau: f64,
    cfg: &SolverConfig,
) -> std::result::Result<(FemVector, StepReport), f64> {
    let rhs = noise_rhs(space, problem, state, dw, milstein);
    let f = &problem.drift;
    if f.is_zero() {
        let u = system.solve(&rhs).ok_or(f64::INFINITY)?;
        return Ok((FemVector(u), StepReport {
            residual_decreasing: true,
            ..Default::default()
        }));
    }
    solve_implicit(
        space,
        system,
        tau,
        &rhs,
        state.to_vec(),
        |_, u| (f.eval(u), f.derivative(u)),
        cfg,
    )
    .map(|(u, r)| (FemVector(u), r))
}

fn system_matrix(space: &FemSpace, tau: f64) -> SymTridiag {
    space.mass().add_scaled(tau, space.stiffness())
}

fn check_field_len(space: &FemSpace, dw: &[f64]) -> Result<()> {
    if dw.len() != space.n_quad() {
        return Err(Error::invalid(format!(
            "noise field has {} values, expected {} quadrature points",
            dw.len(),
            space.n_quad()
        )));
    }
    Ok(())
}

/// One DIEG step from `state` with noise field `dw_field` at the quadrature points.
pub fn dieg_step(
    space: &FemSpace,
    problem: &ProblemSpec,
    state: &[f64],
    dw_field: &[f64],
    tau: f64,
    cfg: &SolverConfig,
) -> Result<(FemVector, StepReport)> {
    check_field_len(space, dw_field)?;
    let system = system_matrix(space, tau);
    step_with(space, problem, &system, state, Some(dw_field), None, tau, cfg)
        .map_err(|residual| Error::SolverFailure { step: 0, residual })
}

/// One DIEM step: DIEG plus the pointwise Milstein correction
/// `½ g'(x) g(x) (δW² − τ q)`, valid for Nemytskii diffusion with the sine basis.
pub fn diem_step(
    space: &FemSpace,
    problem: &ProblemSpec,
    state: &[f64],
    dw_field: &[f64],
    q_diag_field: &[f64],
    tau: f64,
    cfg: &SolverConfig,
) -> Result<(FemVector, StepReport)> {
    check_field_len(space, dw_field)?;
    check_field_len(space, q_diag_field)?;
    let system = system_matrix(space, tau);
    step_with(
        space,
        problem,
        &system,
        state,
        Some(dw_field),
        Some((q_diag_field, tau)),
        tau,
        cfg,
    )
    .map_err(|residual| Error::SolverFailure { step: 0, residual })
}

/// A configured stepper: space, problem, noise basis at the quadrature
/// points, scheme and step size.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    space: &'a FemSpace,
    problem: &'a ProblemSpec,
    basis: Option<FieldBasis>,
    scheme: Scheme,
    tau: f64,
    cfg: SolverConfig,
    system: SymTridiag,
}

impl<'a> Integrator<'a> {
    /// Fails if `τ` violates the Galerkin well-posedness bound
    /// `(L₁ − λ₁) τ < 1`.
    pub fn new(
        space: &'a FemSpace,
        problem: &'a ProblemSpec,
        noise: &QWienerSpec,
        scheme: Scheme,
        tau: f64,
        cfg: SolverConfig,
    ) -> Result<Self> {
        let bound = max_wellposed_tau_galerkin(&problem.constants);
        if !bound.admits(tau) {
            return Err(Error::Precondition {
                what: format!("tau below the well-posedness bound {}", bound.value()),
                margin: bound.value() - tau,
            });
        }
        Self::new_unchecked(space, problem, noise, scheme, tau, cfg)
    }

    pub fn new_unchecked(
        space: &'a FemSpace,
        problem: &'a ProblemSpec,
        noise: &QWienerSpec,
        scheme: Scheme,
        tau: f64,
        cfg: SolverConfig,
    ) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid(format!("tau = {tau} must be positive")));
        }
        cfg.validate()?;
        let basis = if problem.diffusion.is_zero() {
            None
        } else {
            Some(FieldBasis::new(noise, space.quad_points()))
        };
        Ok(Self {
            space,
            problem,
            basis,
            scheme,
            tau,
            cfg,
            system: system_matrix(space, tau),
        })
    }

    pub fn space(&self) -> &'a FemSpace {
        self.space
    }

    pub fn problem(&self) -> &'a ProblemSpec {
        self.problem
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of noise modes the integrator consumes per step (0 without noise).
    pub fn n_modes(&self) -> usize {
        self.basis.as_ref().map_or(0, |b| b.n_modes())
    }

    pub fn initial_state(&self) -> FemVector {
        let ic = &self.problem.initial;
        self.space.project_l2(|x| ic.eval(x))
    }

    fn field(&self, increments: &[f64]) -> Option<Vec<f64>> {
        self.basis.as_ref().map(|b| {
            let mut out = vec![0.0; self.space.n_quad()];
            b.field_into(increments, &mut out);
            out
        })
    }

    fn milstein(&self) -> Option<(&[f64], f64)> {
        match (self.scheme, &self.basis) {
            (Scheme::Diem, Some(b)) => Some((b.q_diag(), self.tau)),
            _ => None,
        }
    }

    /// Advance one step with the given mode increments. On failure returns
    /// the last relative residual.
    pub fn step(
        &self,
        state: &[f64],
        increments: &[f64],
    ) -> std::result::Result<(FemVector, StepReport), f64> {
        let field = self.field(increments);
        step_with(
            self.space,
            self.problem,
            &self.system,
            state,
            field.as_deref(),
            self.milstein(),
            self.tau,
            &self.cfg,
        )
    }

    /// Advance the offset `d = y − x` of a second trajectory `y` driven by
    /// the same noise as `x`, given `x` before and after the step. Working
    /// with the offset keeps the difference accurate far below the rounding
    /// level of the states themselves.
    pub fn step_offset(
        &self,
        x_prev: &[f64],
        x_next: &[f64],
        d_prev: &[f64],
        increments: &[f64],
    ) -> std::result::Result<(FemVector, StepReport), f64> {
        let space = self.space;
        let f = &self.problem.drift;
        let g = &self.problem.diffusion;
        let mut rhs = space.mass().mul_vec(d_prev);
        if let Some(field) = self.field(increments) {
            if !g.is_additive() {
                let xq = space.values_at_quad(x_prev);
                let dq = space.values_at_quad(d_prev);
                let ms = self.milstein();
                let vals: Vec<f64> = (0..space.n_quad())
                    .map(|q| {
                        let (x, d, w) = (xq[q], dq[q], field[q]);
                        let mut v = g.increment(x, d) * w;
                        if let Some((qd, tau)) = ms {
                            let gg = |s: f64| g.derivative(s) * g.eval(s);
                            v += 0.5 * (gg(x + d) - gg(x)) * (w * w - tau * qd[q]);
                        }
                        v
                    })
                    .collect();
                let nl = space.load_from_quad(&vals);
                rhs.iter_mut().zip(&nl).for_each(|(a, b)| *a += b);
            }
        }
        if f.is_zero() {
            let u = self.system.solve(&rhs).ok_or(f64::INFINITY)?;
            return Ok((FemVector(u), StepReport {
                residual_decreasing: true,
                ..Default::default()
            }));
        }
        let xq = space.values_at_quad(x_next);
        solve_implicit(
            space,
            &self.system,
            self.tau,
            &rhs,
            d_prev.to_vec(),
            |q, d| (f.increment(xq[q], d), f.derivative(xq[q] + d)),
            &self.cfg,
        )
        .map(|(u, r)| (FemVector(u), r))
    }
}

/// What [`simulate`] records along a trajectory.
#[derive(Debug, Clone, Default)]
pub struct RecordSpec {
    pub observables: Vec<Observable>,
    /// Keep every `k`-th state; `None` keeps only the first and last.
    pub state_stride: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct StatePath {
    pub tau: f64,
    pub n_steps: usize,
    /// `(step, state)`, starting with the projected initial condition.
    pub states: Vec<(usize, FemVector)>,
    /// Observable name and its value at steps `0..=n_steps`.
    pub observables: Vec<(String, Vec<f64>)>,
    pub max_newton_iters: usize,
    pub fallback_steps: usize,
}

impl StatePath {
    pub fn final_state(&self) -> &FemVector {
        &self.states.last().expect("initial state is always stored").1
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// CSV with columns `step,time,<observable>…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,time");
        for (n, _) in &self.observables {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for m in 0..=self.n_steps {
            out.push_str(&format!("{m},{}", m as f64 * self.tau));
            for (_, v) in &self.observables {
                out.push_str(&format!(",{}", v[m]));
            }
            out.push('\n');
        }
        out
    }
}

/// Run `noise.n_steps()` steps from the projected initial condition.
pub fn simulate(
    integrator: &Integrator<'_>,
    noise: &dyn NoiseSource,
    record: &RecordSpec,
) -> Result<StatePath> {
    let tau = integrator.tau();
    if (noise.tau() - tau).abs() > 1e-12 * tau {
        return Err(Error::invalid(format!(
            "noise step {} does not match integrator step {tau}",
            noise.tau()
        )));
    }
    let n_modes = integrator.n_modes();
    if noise.n_modes() < n_modes {
        return Err(Error::invalid(format!(
            "noise source has {} modes, integrator needs {n_modes}",
            noise.n_modes()
        )));
    }
    let space = integrator.space();
    let n_steps = noise.n_steps();
    let mut state = integrator.initial_state();
    let mut obs: Vec<(String, Vec<f64>)> = record
        .observables
        .iter()
        .map(|o| (o.name(), Vec::with_capacity(n_steps + 1)))
        .collect();
    let push_obs = |obs: &mut Vec<(String, Vec<f64>)>, x: &[f64]| {
        for (o, (_, series)) in record.observables.iter().zip(obs.iter_mut()) {
            series.push(o.eval(space, x));
        }
    };
    push_obs(&mut obs, &state);
    let mut states = vec![(0, state.clone())];
    let mut row = vec![0.0; noise.n_modes()];
    let mut max_iters = 0;
    let mut fallbacks = 0;
    for m in 0..n_steps {
        if n_modes > 0 {
            noise.fill_increments(m, &mut row);
        }
        let (next, rep) = integrator
            .step(&state, &row)
            .map_err(|residual| Error::SolverFailure { step: m, residual })?;
        max_iters = max_iters.max(rep.newton_iters);
        fallbacks += rep.used_fallback as usize;
        state = next;
        push_obs(&mut obs, &state);
        let keep = match record.state_stride {
            Some(k) => (m + 1) % k.max(1) == 0,
            None => m + 1 == n_steps,
        };
        if keep {
            states.push((m + 1, state.clone()));
        }
    }
    Ok(StatePath {
        tau,
        n_steps,
        states,
        observables: obs,
        max_newton_iters: max_iters,
        fallback_steps: fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_path, StreamedNoise};
    use crate::problem::{allen_cahn_spec, DiffusionSpec, InitialCondition};
    use proptest::prelude::*;

    fn quiet(problem: ProblemSpec) -> ProblemSpec {
        problem.with_diffusion(DiffusionSpec::zero(), 0.0, 0.0, 0.0)
    }

    #[test]
    fn first_eigenvector_decays_by_resolvent_factor() {
        let s = FemSpace::build(10).unwrap();
        let p = ProblemSpec::heat(InitialCondition::Zero).unwrap();
        let lam = s.discrete_eigenvalue(1);
        let v = s.sine_mode(1);
        let nv = s.l2_norm(&v);
        let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
        let dw = vec![0.0; s.n_quad()];
        let (u, _) = dieg_step(&s, &p, &v, &dw, 0.1, &SolverConfig::default()).unwrap();
        let factor = 1.0 / (1.0 + 0.1 * lam);
        assert!((factor - 0.50123).abs() < 1e-5);
        for (a, b) in u.iter().zip(v.iter()) {
            assert!((a - factor * b).abs() < 1e-12);
        }
        let (z, _) = dieg_step(&s, &p, &vec![0.0; s.dim()], &dw, 0.1, &SolverConfig::default())
            .unwrap();
        assert!(z.iter().all(|&x| x == 0.0));
    }

    fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn allen_cahn_newton_is_fast() {
        let s = FemSpace::build(64).unwrap();
        let p = quiet(allen_cahn_spec(1.0, 0.0, 0.0).unwrap());
        let x = s.project_l2(|xi| 1.5 * (std::f64::consts::PI * xi).sin());
        let dw = vec![0.0; s.n_quad()];
        let cfg = SolverConfig::default();
        let (u, rep) = dieg_step(&s, &p, &x, &dw, 0.1, &cfg).unwrap();
        assert!(rep.newton_iters <= 6, "{rep:?}");
        assert!(!rep.used_fallback && rep.residual_decreasing);
        // Each component of the solution is the root of its residual equation
        // with the other components frozen.
        let rhs = s.mass().mul_vec(&x);
        let sys = s.mass().add_scaled(0.1, s.stiffness());
        for i in [0, 20, 31, 50] {
            let ri = |ui: f64| {
                let mut w = u.0.clone();
                w[i] = ui;
                let load = s.nemytskii_load(|z| p.drift.eval(z), &w);
                sys.mul_vec(&w)[i] - 0.1 * load[i] - rhs[i]
            };
            let root = bisect_root(ri, u[i] - 1.0, u[i] + 1.0);
            assert!((root - u[i]).abs() < 1e-9, "{i}: {root} vs {}", u[i]);
        }
    }

    #[test]
    fn milstein_matches_galerkin_under_additive_noise() {
        let s = FemSpace::build(16).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let spec = QWienerSpec::smooth(15).unwrap();
        let basis = FieldBasis::new(&spec, s.quad_points());
        let path = sample_path(&spec, 0.01, 1, 7).unwrap();
        let mut dw = vec![0.0; s.n_quad()];
        basis.field_into(path.row(0), &mut dw);
        let x = s.project_l2(|xi| (std::f64::consts::PI * xi).sin());
        let cfg = SolverConfig::default();
        let a = dieg_step(&s, &p, &x, &dw, 0.01, &cfg).unwrap().0;
        let b = diem_step(&s, &p, &x, &dw, basis.q_diag(), 0.01, &cfg).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn milstein_correction_with_zero_increments() {
        let s = FemSpace::build(12).unwrap();
        let p = ProblemSpec::heat(InitialCondition::Zero)
            .unwrap()
            .with_diffusion(DiffusionSpec::linear(0.0, 1.0), 0.0, 1.0, 0.0);
        let v = s.project_l2(|xi| xi * (1.0 - xi));
        let (tau, c) = (0.05, 0.7);
        let dw = vec![0.0; s.n_quad()];
        let qd = vec![c; s.n_quad()];
        let (u, _) = diem_step(&s, &p, &v, &dw, &qd, tau, &SolverConfig::default()).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * (1.0 - 0.5 * tau * c)).collect();
        let want = s
            .mass()
            .add_scaled(tau, s.stiffness())
            .solve(&s.mass().mul_vec(&scaled))
            .unwrap();
        for (a, b) in u.iter().zip(&want) {
            assert!((a - b).abs() < 1e-14);
        }
        let g = dieg_step(&s, &p, &v, &dw, tau, &SolverConfig::default()).unwrap().0;
        assert!(g.iter().zip(u.iter()).any(|(a, b)| a != b));
    }

    #[test]
    fn heat_equation_decays_geometrically() {
        let s = FemSpace::build(64).unwrap();
        let p = ProblemSpec::heat(InitialCondition::sine(1.0, 1)).unwrap();
        let spec = QWienerSpec::smooth(1).unwrap();
        let integ = Integrator::new(&s, &p, &spec, Scheme::Dieg, 0.01, SolverConfig::default())
            .unwrap();
        let noise = StreamedNoise {
            tau: 0.01,
            n_steps: 100,
            n_modes: 1,
            seed: 0,
        };
        let rec = RecordSpec {
            observables: vec![Observable::L2Norm],
            state_stride: None,
        };
        let path = simulate(&integ, &noise, &rec).unwrap();
        let series = path.observable("l2").unwrap();
        let r = 1.0 / (1.0 + 0.01 * s.discrete_eigenvalue(1));
        for (m, &v) in series.iter().enumerate() {
            let want = series[0] * r.powi(m as i32);
            assert!((v - want).abs() <= 1e-8 * want, "step {m}");
        }
        assert_eq!(path.states.len(), 2);
        assert_eq!(path.states[0].1, integ.initial_state());
    }

    #[test]
    fn zero_steps_keep_initial_state() {
        let s = FemSpace::build(8).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let spec = QWienerSpec::smooth(7).unwrap();
        let integ = Integrator::new(&s, &p, &spec, Scheme::Dieg, 0.01, SolverConfig::default())
            .unwrap();
        let noise = StreamedNoise {
            tau: 0.01,
            n_steps: 0,
            n_modes: 7,
            seed: 1,
        };
        let path = simulate(&integ, &noise, &RecordSpec::default()).unwrap();
        assert_eq!(path.states.len(), 1);
        assert_eq!(path.final_state(), &integ.initial_state());
    }

    #[test]
    fn simulation_is_deterministic() {
        let s = FemSpace::build(32).unwrap();
        let p = allen_cahn_spec(0.5, 0.0, 0.0).unwrap();
        let spec = QWienerSpec::smooth(31).unwrap();
        let integ = Integrator::new(&s, &p, &spec, Scheme::Dieg, 0.01, SolverConfig::default())
            .unwrap();
        let noise = StreamedNoise {
            tau: 0.01,
            n_steps: 50,
            n_modes: 31,
            seed: 42,
        };
        let rec = RecordSpec {
            observables: vec![Observable::L2Norm, Observable::H1Semi],
            state_stride: Some(10),
        };
        let a = simulate(&integ, &noise, &rec).unwrap();
        let b = simulate(&integ, &noise, &rec).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.states.len(), 6);
        let stored = sample_path(&spec, 0.01, 50, 42).unwrap();
        let c = simulate(&integ, &stored, &rec).unwrap();
        assert_eq!(a.to_csv(), c.to_csv());
    }

    #[test]
    fn mismatched_noise_step_is_rejected() {
        let s = FemSpace::build(8).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let spec = QWienerSpec::smooth(7).unwrap();
        let integ = Integrator::new(&s, &p, &spec, Scheme::Dieg, 0.01, SolverConfig::default())
            .unwrap();
        let noise = StreamedNoise {
            tau: 0.02,
            n_steps: 3,
            n_modes: 7,
            seed: 1,
        };
        assert!(simulate(&integ, &noise, &RecordSpec::default()).is_err());
        assert!(SolverConfig {
            newton_tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn offset_step_matches_difference_of_steps() {
        let s = FemSpace::build(24).unwrap();
        let p = allen_cahn_spec(0.5, 0.0, 0.0)
            .unwrap()
            .with_diffusion(DiffusionSpec::linear(0.3, 0.5), 0.25, 0.25, 0.09);
        let spec = QWienerSpec::smooth(23).unwrap();
        for scheme in [Scheme::Dieg, Scheme::Diem] {
            let integ =
                Integrator::new_unchecked(&s, &p, &spec, scheme, 0.01, SolverConfig::default())
                    .unwrap();
            let path = sample_path(&spec, 0.01, 1, 3).unwrap();
            let x = s.project_l2(|xi| (std::f64::consts::PI * xi).sin());
            let y = s.project_l2(|xi| 0.5 * (2.0 * std::f64::consts::PI * xi).sin());
            let d: Vec<f64> = y.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
            let x1 = integ.step(&x, path.row(0)).unwrap().0;
            let y1 = integ.step(&y, path.row(0)).unwrap().0;
            let d1 = integ.step_offset(&x, &x1, &d, path.row(0)).unwrap().0;
            for i in 0..s.dim() {
                assert!((d1[i] - (y1[i] - x1[i])).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn newton_residual_decreases(amp in -3.0f64..3.0, mode in 1u32..5, tau in 0.001f64..0.2) {
            let s = FemSpace::build(32).unwrap();
            let p = quiet(allen_cahn_spec(0.7, 0.0, 0.0).unwrap());
            let x = s.project_l2(|xi| amp * (mode as f64 * std::f64::consts::PI * xi).sin());
            let dw = vec![0.0; s.n_quad()];
            let cfg = SolverConfig::default();
            let (_, rep) = dieg_step(&s, &p, &x, &dw, tau, &cfg).unwrap();
            prop_assert!(rep.residual_decreasing);
            prop_assert!(rep.final_residual <= cfg.newton_tol);
        }

        #[test]
        fn additive_noise_contracts_pathwise(seed in 0u64..1000, shift in -2.0f64..2.0) {
            let s = FemSpace::build(16).unwrap();
            let p = allen_cahn_spec(0.5, 0.0, 0.0).unwrap();
            let spec = QWienerSpec::smooth(15).unwrap();
            let tau = 0.01;
            let integ = Integrator::new(&s, &p, &spec, Scheme::Dieg, tau, SolverConfig::default()).unwrap();
            let path = sample_path(&spec, tau, 20, seed).unwrap();
            let c = &p.constants;
            let ratio = (1.0 + c.l6 * tau) / (1.0 + 2.0 * (c.lambda1 - c.l1) * tau);
            let mut x = integ.initial_state();
            let mut d = s.project_l2(|xi| shift * xi * (1.0 - xi)).0;
            for m in 0..20 {
                let x1 = integ.step(&x, path.row(m)).unwrap().0;
                let d1 = integ.step_offset(&x, &x1, &d, path.row(m)).unwrap().0;
                let (e0, e1) = (s.l2_norm_sq(&d), s.l2_norm_sq(&d1));
                prop_assert!(e1 <= e0 * ratio * (1.0 + 1e-8), "{e1} > {e0} * {ratio}");
                x = x1;
                d = d1.0;
            }
        }
    }
}
