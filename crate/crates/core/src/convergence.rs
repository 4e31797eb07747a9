//! Strong error experiments against a fine common-noise reference.
//!
//! Errors are `sup_k E‖X^{ref}_{t_k} − X_k‖²` over evenly spaced
//! checkpoints in `(0, T]`, estimated over independent paths. All ladder
//! levels of one path see the same Brownian increments: in time by
//! aggregating the reference increments, in space by evaluating the same
//! Karhunen–Loève modes on every mesh.

use crate::error::{Error, Result};
use crate::fem::{FemSpace, FemVector};
use crate::noise::{sample_path, NoisePath, NoiseSource, QWienerSpec};
use crate::parallel::map_indexed;
use crate::problem::ProblemSpec;
use crate::rng::derive_seed;
use crate::schemes::{Integrator, Scheme, SolverConfig};
use crate::stats::mean_stderr;
pub use crate::stats::{fit_loglog, RateFit};

pub use crate::stats::fit_loglog as fit;

pub const DEFAULT_CHECKPOINTS: usize = 8;
pub const DEFAULT_PATHS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    H,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Tau => "tau",
            Axis::H => "h",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Axis::Tau),
            "h" => Ok(Axis::H),
            other => Err(Error::invalid(format!("unknown axis {other:?}, expected tau or h"))),
        }
    }
}

/// Parameters shared by both axes.
#[derive(Debug, Clone)]
pub struct StrongErrorConfig<'a> {
    pub problem: &'a ProblemSpec,
    pub noise: QWienerSpec,
    pub scheme: Scheme,
    pub solver: SolverConfig,
    pub t_horizon: f64,
    pub n_paths: usize,
    pub n_checkpoints: usize,
    pub seed: u64,
}

impl<'a> StrongErrorConfig<'a> {
    pub fn new(problem: &'a ProblemSpec, noise: QWienerSpec, t_horizon: f64, seed: u64) -> Self {
        Self {
            problem,
            noise,
            scheme: Scheme::Dieg,
            solver: SolverConfig::default(),
            t_horizon,
            n_paths: DEFAULT_PATHS,
            n_checkpoints: DEFAULT_CHECKPOINTS,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        if self.n_paths == 0 || self.n_checkpoints == 0 {
            return Err(Error::invalid("need at least one path and one checkpoint"));
        }
        Ok(())
    }

    /// Whether the error theorem's hypothesis
    /// `L₁ + (2(q² + q − 1) − 1) L₉ / 2 < λ₁` holds.
    pub fn in_guaranteed_regime(&self) -> bool {
        let c = &self.problem.constants;
        let q = c.q;
        c.l1 + (2.0 * (q * q + q - 1.0) - 1.0) * c.l9 / 2.0 < c.lambda1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub h: f64,
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub axis: Axis,
    pub scheme: Scheme,
    pub levels: Vec<Level>,
    /// Sup over checkpoints of the Monte Carlo mean-square error.
    pub mse: Vec<f64>,
    /// Standard error at the maximizing checkpoint.
    pub mc_stderr: Vec<f64>,
    /// Checkpoint index attaining the sup, per level.
    pub argmax: Vec<usize>,
    /// Mean-square error per level and checkpoint.
    pub per_checkpoint: Vec<Vec<f64>>,
    pub checkpoint_times: Vec<f64>,
    /// Log-log fit of mse against the active axis; absent for one level.
    pub fit: Option<RateFit>,
    pub n_paths: usize,
    pub in_guaranteed_regime: bool,
}

impl ConvergenceTable {
    fn new(
        axis: Axis,
        cfg: &StrongErrorConfig<'_>,
        levels: Vec<Level>,
        per_path: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let nl = levels.len();
        let nc = cfg.n_checkpoints;
        let mut mse = Vec::with_capacity(nl);
        let mut se = Vec::with_capacity(nl);
        let mut argmax = Vec::with_capacity(nl);
        let mut per_checkpoint = Vec::with_capacity(nl);
        let mut col = vec![0.0; per_path.len()];
        for l in 0..nl {
            let stats: Vec<(f64, f64)> = (0..nc)
                .map(|k| {
                    for (c, p) in col.iter_mut().zip(&per_path) {
                        *c = p[l][k];
                    }
                    mean_stderr(&col)
                })
                .collect();
            let (k, &(m, s)) = stats
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .expect("at least one checkpoint");
            mse.push(m);
            se.push(s);
            argmax.push(k);
            per_checkpoint.push(stats.iter().map(|s| s.0).collect());
        }
        let x = |lv: &Level| match axis {
            Axis::Tau => lv.tau,
            Axis::H => lv.h,
        };
        let fit = if nl >= 2 && mse.iter().all(|&m| m > 0.0) {
            Some(fit_loglog(&levels.iter().map(x).zip(mse.iter().copied()).collect::<Vec<_>>())?)
        } else {
            None
        };
        Ok(Self {
            axis,
            scheme: cfg.scheme,
            levels,
            mse,
            mc_stderr: se,
            argmax,
            per_checkpoint,
            checkpoint_times: (1..=nc)
                .map(|k| k as f64 * cfg.t_horizon / nc as f64)
                .collect(),
            fit,
            n_paths: cfg.n_paths,
            in_guaranteed_regime: cfg.in_guaranteed_regime(),
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Whether the fitted slope lies in `[lo, hi]` with `r² ≥ min_r2`.
    pub fn passes(&self, lo: f64, hi: f64, min_r2: f64) -> bool {
        self.fit
            .is_some_and(|f| (lo..=hi).contains(&f.slope) && f.r_squared >= min_r2)
    }

    /// Each finer level's error does not exceed the coarser one by more
    /// than two combined standard errors.
    pub fn monotone_within_noise(&self) -> bool {
        self.mse.windows(2).zip(self.mc_stderr.windows(2)).all(|(m, s)| {
            m[1] - 2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt() <= m[0]
        })
    }

    /// Columns `level,h,tau,mse,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,tau,mse,stderr\n");
        for (i, lv) in self.levels.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{},{}\n",
                lv.h, lv.tau, self.mse[i], self.mc_stderr[i]
            ));
        }
        out
    }

    pub fn summary(&self, window: Option<(f64, f64, f64)>) -> String {
        let (slope, r2) = match self.fit {
            Some(f) => (f.slope.to_string(), f.r_squared.to_string()),
            None => ("none".into(), "none".into()),
        };
        let flag = match window {
            Some((lo, hi, r)) => {
                if self.passes(lo, hi, r) {
                    "pass"
                } else {
                    "fail"
                }
            }
            None => "n/a",
        };
        format!(
            "converge axis={} scheme={} levels={} paths={} slope={slope} r2={r2} guaranteed_regime={} flag={flag}",
            self.axis.name(),
            self.scheme.name(),
            self.levels.len(),
            self.n_paths,
            self.in_guaranteed_regime
        )
    }
}

/// Per-level sup-mse changes between two horizons, each compared with
/// `factor` combined standard errors.
pub fn horizon_consistent(a: &ConvergenceTable, b: &ConvergenceTable, factor: f64) -> Vec<bool> {
    a.mse
        .iter()
        .zip(&b.mse)
        .zip(a.mc_stderr.iter().zip(&b.mc_stderr))
        .map(|((ma, mb), (sa, sb))| (ma - mb).abs() <= factor * (sa * sa + sb * sb).sqrt())
        .collect()
}

/// `coarse / fine` when it is a power of two (including 1).
fn dyadic_ratio(coarse: f64, fine: f64) -> Option<usize> {
    let r = coarse / fine;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * r {
        return None;
    }
    let k = k as usize;
    k.is_power_of_two().then_some(k)
}

fn steps_for(t: f64, tau: f64) -> Result<usize> {
    let n = (t / tau).round();
    if n < 1.0 || (n * tau - t).abs() > 1e-9 * t {
        return Err(Error::invalid(format!("horizon {t} is not a multiple of tau = {tau}")));
    }
    Ok(n as usize)
}

fn strictly_monotone(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] > w[1]) || xs.windows(2).all(|w| w[0] < w[1])
}

/// States at every `stride`-th step, excluding the initial one.
fn checkpoint_states(
    integ: &Integrator<'_>,
    noise: &dyn NoiseSource,
    stride: usize,
) -> Result<Vec<FemVector>> {
    let n_steps = noise.n_steps();
    let mut row = vec![0.0; noise.n_modes()];
    let mut x = integ.initial_state();
    let mut out = Vec::with_capacity(n_steps / stride);
    for m in 0..n_steps {
        if integ.n_modes() > 0 {
            noise.fill_increments(m, &mut row);
        }
        x = integ
            .step(&x, &row)
            .map_err(|residual| Error::SolverFailure { step: m, residual })?
            .0;
        if (m + 1) % stride == 0 {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn integrator<'s>(
    cfg: &StrongErrorConfig<'s>,
    space: &'s FemSpace,
    tau: f64,
) -> Result<Integrator<'s>> {
    Integrator::new(space, cfg.problem, &cfg.noise, cfg.scheme, tau, cfg.solver)
}

fn path_noise(cfg: &StrongErrorConfig<'_>, tau: f64, n_steps: usize, p: usize) -> Result<NoisePath> {
    let modes = if cfg.problem.diffusion.is_zero() { 1 } else { cfg.noise.n_modes };
    sample_path(
        &cfg.noise.with_modes(modes),
        tau,
        n_steps,
        derive_seed(cfg.seed, "converge", p as u64),
    )
}

fn collect<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    map_indexed(n, f).into_iter().collect()
}

/// Mean-square error against time step on a fixed mesh of `n_cells` cells.
/// The reference runs at `tau_ref` and every ladder entry must be a
/// power-of-two multiple of it.
pub fn strong_error_vs_tau(
    cfg: &StrongErrorConfig<'_>,
    n_cells: usize,
    tau_ladder: &[f64],
    tau_ref: f64,
) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if tau_ladder.is_empty() || !strictly_monotone(tau_ladder) {
        return Err(Error::invalid("tau ladder must be nonempty and strictly ordered"));
    }
    let factors: Vec<usize> = tau_ladder
        .iter()
        .map(|&t| {
            dyadic_ratio(t, tau_ref).filter(|&k| k >= 2).ok_or_else(|| {
                Error::invalid(format!("tau = {t} is not a dyadic multiple of tau_ref = {tau_ref}"))
            })
        })
        .collect::<Result<_>>()?;
    let n_ref = steps_for(cfg.t_horizon, tau_ref)?;
    let nc = cfg.n_checkpoints;
    for (&t, &k) in tau_ladder.iter().zip(&factors) {
        if (n_ref / k) % nc != 0 {
            return Err(Error::invalid(format!(
                "{nc} checkpoints do not fall on steps of tau = {t}"
            )));
        }
    }
    let space = FemSpace::build(n_cells)?;
    let reference = integrator(cfg, &space, tau_ref)?;
    let levels_integ: Vec<Integrator<'_>> = tau_ladder
        .iter()
        .map(|&t| integrator(cfg, &space, t))
        .collect::<Result<_>>()?;
    let per_path = collect(cfg.n_paths, |p| {
        let fine = path_noise(cfg, tau_ref, n_ref, p)?;
        let xr = checkpoint_states(&reference, &fine, n_ref / nc)?;
        factors
            .iter()
            .zip(&levels_integ)
            .map(|(&k, integ)| {
                let coarse = fine.aggregate(k)?;
                let xs = checkpoint_states(integ, &coarse, coarse.n_steps() / nc)?;
                Ok(xs
                    .iter()
                    .zip(&xr)
                    .map(|(a, b)| {
                        let d: Vec<f64> = a.iter().zip(b.iter()).map(|(u, v)| u - v).collect();
                        space.l2_norm_sq(&d)
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()
    })?;
    let h = space.h();
    let levels = tau_ladder.iter().map(|&tau| Level { h, tau }).collect();
    ConvergenceTable::new(Axis::Tau, cfg, levels, per_path)
}

/// Mean-square error against mesh size at fixed `tau`. Ladder entries are
/// cell counts; `n_cells_ref` must be a power-of-two multiple of each.
/// Coarse states are interpolated onto the reference mesh.
pub fn strong_error_vs_h(
    cfg: &StrongErrorConfig<'_>,
    tau: f64,
    n_cells_ladder: &[usize],
    n_cells_ref: usize,
) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let as_f: Vec<f64> = n_cells_ladder.iter().map(|&n| n as f64).collect();
    if n_cells_ladder.is_empty() || !strictly_monotone(&as_f) {
        return Err(Error::invalid("mesh ladder must be nonempty and strictly ordered"));
    }
    for &n in n_cells_ladder {
        if n == 0 || dyadic_ratio(n_cells_ref as f64, n as f64).filter(|&k| k >= 2).is_none() {
            return Err(Error::invalid(format!(
                "{n} cells is not a dyadic coarsening of {n_cells_ref} reference cells"
            )));
        }
    }
    let n_steps = steps_for(cfg.t_horizon, tau)?;
    let nc = cfg.n_checkpoints;
    if n_steps % nc != 0 {
        return Err(Error::invalid(format!(
            "{nc} checkpoints do not fall on steps of tau = {tau}"
        )));
    }
    let fine_space = FemSpace::build(n_cells_ref)?;
    let spaces: Vec<FemSpace> = n_cells_ladder
        .iter()
        .map(|&n| FemSpace::build(n))
        .collect::<Result<_>>()?;
    let reference = integrator(cfg, &fine_space, tau)?;
    let levels_integ: Vec<Integrator<'_>> = spaces
        .iter()
        .map(|s| integrator(cfg, s, tau))
        .collect::<Result<_>>()?;
    let stride = n_steps / nc;
    let per_path = collect(cfg.n_paths, |p| {
        let noise = path_noise(cfg, tau, n_steps, p)?;
        let xr = checkpoint_states(&reference, &noise, stride)?;
        spaces
            .iter()
            .zip(&levels_integ)
            .map(|(s, integ)| {
                let xs = checkpoint_states(integ, &noise, stride)?;
                Ok(xs
                    .iter()
                    .zip(&xr)
                    .map(|(a, b)| {
                        let up = s.prolong_to(&fine_space, a);
                        let d: Vec<f64> = up.iter().zip(b.iter()).map(|(u, v)| u - v).collect();
                        fine_space.l2_norm_sq(&d)
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()
    })?;
    let levels = spaces.iter().map(|s| Level { h: s.h(), tau }).collect();
    ConvergenceTable::new(Axis::H, cfg, levels, per_path)
}

#[derive(Debug, Clone)]
pub struct DiemRateReport {
    pub gamma: f64,
    pub tau_table: ConvergenceTable,
    pub h_table: ConvergenceTable,
    /// Mean-square slopes predicted for `Ḣ^{1+γ}` data: `1 + γ` in `τ`.
    pub expected_tau_slope: f64,
    /// And `2(1 + γ)` in `h`.
    pub expected_h_slope: f64,
}

/// Run both ladders with the Milstein scheme (reference included).
#[allow(clippy::too_many_arguments)]
pub fn diem_rate_experiment(
    cfg: &StrongErrorConfig<'_>,
    gamma: f64,
    n_cells: usize,
    tau_ladder: &[f64],
    tau_ref: f64,
    tau_fixed: f64,
    n_cells_ladder: &[usize],
    n_cells_ref: usize,
) -> Result<DiemRateReport> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma = {gamma} must lie in [0, 1]")));
    }
    let cfg = StrongErrorConfig {
        scheme: Scheme::Diem,
        ..cfg.clone()
    };
    Ok(DiemRateReport {
        gamma,
        tau_table: strong_error_vs_tau(&cfg, n_cells, tau_ladder, tau_ref)?,
        h_table: strong_error_vs_h(&cfg, tau_fixed, n_cells_ladder, n_cells_ref)?,
        expected_tau_slope: 1.0 + gamma,
        expected_h_slope: 2.0 * (1.0 + gamma),
    })
}
