//! Long-time experiments: coupling contraction, moment stability, Cesàro
//! averages of the H¹ seminorm, ergodic time averages, mixing decay and
//! temporal Hölder ratios.

use crate::error::{Error, Result};
use crate::fem::{FemSpace, FemVector};
use crate::noise::{NoiseSource, QWienerSpec, StreamedNoise};
use crate::observable::Observable;
use crate::parallel::map_indexed;
use crate::problem::{
    contraction_rate_gamma6, ergodicity_margins, stability_rate_gamma5, ProblemSpec,
    StabilityRate,
};
use crate::report::{fmt_opt, series_csv};
use crate::rng::derive_seed;
use crate::schemes::{Integrator, Scheme, SolverConfig};
use crate::stats::{batch_means, column_mean_stderr, fit_exponential};

/// Relative slack of the per-step contraction check.
pub const PATHWISE_SLACK: f64 = 1e-8;
/// Series entries at or below this level are excluded from rate fits.
pub const FIT_FLOOR: f64 = 1e-12;
pub const DEFAULT_BATCHES: usize = 20;

/// Everything an experiment needs besides its own parameters.
#[derive(Debug, Clone)]
pub struct Setup<'a> {
    pub space: &'a FemSpace,
    pub problem: &'a ProblemSpec,
    pub noise: QWienerSpec,
    pub scheme: Scheme,
    pub tau: f64,
    pub solver: SolverConfig,
    /// Run even when the ergodicity hypotheses fail; reports are flagged.
    pub allow_out_of_hypothesis: bool,
}

impl<'a> Setup<'a> {
    /// DIEG with default solver settings and one noise mode per interior node.
    pub fn new(space: &'a FemSpace, problem: &'a ProblemSpec, noise: QWienerSpec, tau: f64) -> Self {
        Self {
            space,
            problem,
            noise,
            scheme: Scheme::Dieg,
            tau,
            solver: SolverConfig::default(),
            allow_out_of_hypothesis: false,
        }
    }

    pub fn integrator(&self) -> Result<Integrator<'a>> {
        if self.allow_out_of_hypothesis {
            Integrator::new_unchecked(self.space, self.problem, &self.noise, self.scheme, self.tau, self.solver)
        } else {
            Integrator::new(self.space, self.problem, &self.noise, self.scheme, self.tau, self.solver)
        }
    }

    fn times(&self, n_steps: usize) -> Vec<f64> {
        (0..=n_steps).map(|m| m as f64 * self.tau).collect()
    }

    /// Fails unless both ergodicity margins are positive or the override is
    /// set; returns whether the hypotheses fail.
    fn gate(&self) -> Result<bool> {
        let m = ergodicity_margins(&self.problem.constants);
        if m.both_positive() {
            return Ok(false);
        }
        if self.allow_out_of_hypothesis {
            return Ok(true);
        }
        Err(Error::Precondition {
            what: "positive ergodicity margins".into(),
            margin: m.contraction.min(m.stability),
        })
    }
}

fn noise_for(integ: &Integrator<'_>, n_steps: usize, seed: u64) -> StreamedNoise {
    StreamedNoise {
        tau: integ.tau(),
        n_steps,
        n_modes: integ.n_modes(),
        seed,
    }
}

/// Step from `x0` for `n_steps`, calling `visit(m, X_m)` for `m = 0..=n_steps`.
fn run_path(
    integ: &Integrator<'_>,
    x0: &[f64],
    n_steps: usize,
    seed: u64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    let noise = noise_for(integ, n_steps, seed);
    let mut row = vec![0.0; noise.n_modes()];
    let mut x = x0.to_vec();
    visit(0, &x);
    for m in 0..n_steps {
        noise.fill_increments(m, &mut row);
        x = integ
            .step(&x, &row)
            .map_err(|residual| Error::SolverFailure { step: m, residual })?
            .0
             .0;
        visit(m + 1, &x);
    }
    Ok(())
}

fn collect<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    map_indexed(n, f).into_iter().collect()
}

fn check_len(space: &FemSpace, v: &[f64], what: &str) -> Result<()> {
    if v.len() != space.dim() {
        return Err(Error::invalid(format!(
            "{what} has {} coefficients, space has {}",
            v.len(),
            space.dim()
        )));
    }
    Ok(())
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::invalid("at least one path is required"));
    }
    Ok(())
}

/// Fit `series ≈ A e^{−r t}` over the entries above `floor`.
fn fitted_rate(times: &[f64], series: &[f64], floor: f64) -> Option<f64> {
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(series)
        .filter(|(_, &v)| v > floor)
        .map(|(&t, &v)| (t, v))
        .unzip();
    fit_exponential(&t, &y).ok().map(|(r, _)| r)
}

#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub times: Vec<f64>,
    /// Monte Carlo mean of `‖X_m^x − X_m^y‖²`.
    pub mean_sq_diff: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `e^{−γ₆ t_m} ‖x − y‖²`, absent when `γ₆` is undefined.
    pub bound: Option<Vec<f64>>,
    pub gamma6: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub n_paths: usize,
    pub hypothesis_failed: bool,
    /// Per-step factor `(1 + L₆τ)/(1 + 2(λ₁ − L₁)τ)` of the pathwise check.
    pub rho: f64,
    /// Whether the pathwise check applies (additive or no noise).
    pub pathwise_checked: bool,
    pub pathwise_violations: usize,
    /// Largest observed `‖E_{k+1}‖² / (ρ ‖E_k‖²)`.
    pub max_step_ratio: f64,
}

impl CouplingReport {
    pub fn pathwise_contraction(&self) -> Option<bool> {
        self.pathwise_checked.then_some(self.pathwise_violations == 0)
    }

    pub fn to_csv(&self) -> String {
        series_csv(0, &self.times, &self.mean_sq_diff, self.bound.as_deref(), Some(&self.stderr))
    }

    pub fn summary(&self) -> String {
        let flag = match self.pathwise_contraction() {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "n/a",
        };
        format!(
            "coupling n_paths={} gamma6={} fitted_rate={} rho={} pathwise_contraction={flag} violations={} hypothesis_failed={}",
            self.n_paths,
            fmt_opt(self.gamma6),
            fmt_opt(self.fitted_rate),
            self.rho,
            self.pathwise_violations,
            self.hypothesis_failed
        )
    }
}

/// Evolve pairs from `x` and `y` under identical noise on each path.
pub fn coupling_experiment(
    setup: &Setup<'_>,
    x: &FemVector,
    y: &FemVector,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<CouplingReport> {
    check_len(setup.space, x, "x")?;
    check_len(setup.space, y, "y")?;
    check_paths(n_paths)?;
    let hypothesis_failed = setup.gate()?;
    let integ = setup.integrator()?;
    let space = setup.space;
    let c = &setup.problem.constants;
    let tau = setup.tau;
    let rho = (1.0 + c.l6 * tau) / (1.0 + 2.0 * (c.lambda1 - c.l1) * tau);
    let g = &setup.problem.diffusion;
    let pathwise_checked = g.is_additive() || g.is_zero();
    let d0: Vec<f64> = y.iter().zip(x.iter()).map(|(b, a)| b - a).collect();

    let runs = collect(n_paths, |p| {
        let noise = noise_for(&integ, n_steps, derive_seed(seed, "coupling", p as u64));
        let mut row = vec![0.0; noise.n_modes()];
        let mut xs = x.0.clone();
        let mut d = d0.clone();
        let mut series = Vec::with_capacity(n_steps + 1);
        series.push(space.l2_norm_sq(&d));
        let (mut violations, mut worst) = (0usize, 0.0f64);
        for m in 0..n_steps {
            noise.fill_increments(m, &mut row);
            let fail = |residual| Error::SolverFailure { step: m, residual };
            let x1 = integ.step(&xs, &row).map_err(fail)?.0 .0;
            let d1 = integ.step_offset(&xs, &x1, &d, &row).map_err(fail)?.0 .0;
            let (e0, e1) = (series[m], space.l2_norm_sq(&d1));
            let allowed = e0 * rho;
            if allowed > 0.0 {
                worst = worst.max(e1 / allowed);
            }
            if e1 > allowed * (1.0 + PATHWISE_SLACK) {
                violations += 1;
            }
            series.push(e1);
            xs = x1;
            d = d1;
        }
        Ok((series, violations, worst))
    })?;

    let mut rows = Vec::with_capacity(n_paths);
    let (mut violations, mut worst) = (0, 0.0f64);
    for (s, v, w) in runs {
        rows.push(s);
        violations += v;
        worst = worst.max(w);
    }
    let (mean_sq_diff, stderr) = column_mean_stderr(&rows);
    let times = setup.times(n_steps);
    let gamma6 = contraction_rate_gamma6(c).ok();
    let e0 = space.l2_norm_sq(&d0);
    let bound = gamma6.map(|g6| times.iter().map(|t| (-g6 * t).exp() * e0).collect());
    let fitted = fitted_rate(&times, &mean_sq_diff, FIT_FLOOR);
    Ok(CouplingReport {
        times,
        mean_sq_diff,
        stderr,
        bound,
        gamma6,
        fitted_rate: fitted,
        n_paths,
        hypothesis_failed,
        rho,
        pathwise_checked,
        pathwise_violations: if pathwise_checked { violations } else { 0 },
        max_step_ratio: worst,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub p: u32,
    pub times: Vec<f64>,
    /// Monte Carlo mean of `‖X_m‖^p`.
    pub moment: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `e^{−γ₅ t_m}‖X₀‖² + C_γ₅`, for `p = 2` only.
    pub envelope: Option<Vec<f64>>,
    pub rate: Option<StabilityRate>,
    /// Entries above `envelope · (1 + 3 stderr / moment)`.
    pub violations: usize,
    pub strictly_below: Option<bool>,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        series_csv(0, &self.times, &self.moment, self.envelope.as_deref(), Some(&self.stderr))
    }

    pub fn summary(&self) -> String {
        format!(
            "stability p={} gamma5={} c_gamma5={} violations={} strictly_below={} envelope={}",
            self.p,
            fmt_opt(self.rate.map(|r| r.gamma5)),
            fmt_opt(self.rate.map(|r| r.c_gamma5)),
            self.violations,
            self.strictly_below.map_or("n/a", |b| if b { "pass" } else { "fail" }),
            if self.envelope.is_some() { "present" } else { "absent" },
        )
    }
}

/// Monte Carlo estimate of `E‖X_m‖^p` for `p ∈ {2, 4, 6}`.
pub fn stability_experiment(
    setup: &Setup<'_>,
    x0: &FemVector,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    p: u32,
) -> Result<StabilityReport> {
    if ![2, 4, 6].contains(&p) {
        return Err(Error::invalid(format!("moment order {p} is not one of 2, 4, 6")));
    }
    check_len(setup.space, x0, "X0")?;
    check_paths(n_paths)?;
    let rate = if p == 2 {
        match stability_rate_gamma5(&setup.problem.constants, setup.tau) {
            Ok(r) => Some(r),
            Err(e) if !setup.allow_out_of_hypothesis => return Err(e),
            Err(_) => None,
        }
    } else {
        None
    };
    let integ = setup.integrator()?;
    let space = setup.space;
    let rows = collect(n_paths, |k| {
        let mut s = Vec::with_capacity(n_steps + 1);
        run_path(&integ, x0, n_steps, derive_seed(seed, "stability", k as u64), |_, x| {
            s.push(space.l2_norm_sq(x).powi(p as i32 / 2));
        })?;
        Ok(s)
    })?;
    let (moment, stderr) = column_mean_stderr(&rows);
    let times = setup.times(n_steps);
    let x0_sq = space.l2_norm_sq(x0);
    let envelope: Option<Vec<f64>> =
        rate.map(|r| times.iter().map(|&t| r.envelope(t, x0_sq)).collect());
    let (violations, strictly_below) = match &envelope {
        Some(env) => {
            let v = moment
                .iter()
                .zip(&stderr)
                .zip(env)
                .filter(|((&m, &s), &e)| {
                    let rel = if m > 0.0 { s / m } else { 0.0 };
                    m > e * (1.0 + 3.0 * rel)
                })
                .count();
            (v, Some(moment.iter().zip(env).all(|(m, e)| m < e)))
        }
        None => (0, None),
    };
    Ok(StabilityReport {
        p,
        times,
        moment,
        stderr,
        envelope,
        rate,
        violations,
        strictly_below,
    })
}

#[derive(Debug, Clone)]
pub struct CesaroReport {
    pub times: Vec<f64>,
    /// `(1/(m+1)) Σ_{k≤m} E‖X_k‖₁²`.
    pub running: Vec<f64>,
    pub sup: f64,
}

impl CesaroReport {
    pub fn to_csv(&self) -> String {
        series_csv(0, &self.times, &self.running, None, None)
    }

    pub fn summary(&self) -> String {
        format!("cesaro_h1 steps={} sup={}", self.running.len() - 1, self.sup)
    }
}

pub fn cesaro_h1(
    setup: &Setup<'_>,
    x0: &FemVector,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<CesaroReport> {
    check_len(setup.space, x0, "X0")?;
    check_paths(n_paths)?;
    let integ = setup.integrator()?;
    let space = setup.space;
    let rows = collect(n_paths, |k| {
        let mut s = Vec::with_capacity(n_steps + 1);
        run_path(&integ, x0, n_steps, derive_seed(seed, "cesaro", k as u64), |_, x| {
            s.push(space.h1_semi_sq(x));
        })?;
        Ok(s)
    })?;
    let (mean, _) = column_mean_stderr(&rows);
    let mut acc = 0.0;
    let running: Vec<f64> = mean
        .iter()
        .enumerate()
        .map(|(m, v)| {
            acc += v;
            acc / (m + 1) as f64
        })
        .collect();
    let sup = running.iter().copied().fold(0.0, f64::max);
    Ok(CesaroReport {
        times: setup.times(n_steps),
        running,
        sup,
    })
}

#[derive(Debug, Clone)]
pub struct ErgodicAverageReport {
    pub functional_name: String,
    pub in_lip_b: bool,
    pub burn_in: usize,
    pub n_total: usize,
    pub tau: f64,
    /// Running average of `φ(X_k)` over `k = burn_in + 1, …`.
    pub running_average: Vec<f64>,
    pub batch_means_stderr: f64,
    pub final_estimate: f64,
}

impl ErgodicAverageReport {
    pub fn to_csv(&self) -> String {
        let times: Vec<f64> = (1..=self.running_average.len())
            .map(|j| (self.burn_in + j) as f64 * self.tau)
            .collect();
        series_csv(self.burn_in + 1, &times, &self.running_average, None, None)
    }

    pub fn summary(&self) -> String {
        format!(
            "ergodic functional={} lip_b={} burn_in={} n_total={} estimate={} stderr={}",
            self.functional_name,
            self.in_lip_b,
            self.burn_in,
            self.n_total,
            self.final_estimate,
            self.batch_means_stderr
        )
    }
}

/// Default burn-in of 20% of the run.
pub fn default_burn_in(n_total: usize) -> usize {
    n_total / 5
}

/// Time average of `phi` along one long trajectory after `burn_in` steps,
/// with a batch-means error bar.
pub fn ergodic_average(
    setup: &Setup<'_>,
    phi: &Observable,
    x0: &FemVector,
    n_total: usize,
    burn_in: Option<usize>,
    seed: u64,
) -> Result<ErgodicAverageReport> {
    check_len(setup.space, x0, "X0")?;
    let burn_in = burn_in.unwrap_or_else(|| default_burn_in(n_total));
    if burn_in >= n_total {
        return Err(Error::invalid(format!(
            "burn_in = {burn_in} must be below n_total = {n_total}"
        )));
    }
    if n_total - burn_in < DEFAULT_BATCHES {
        return Err(Error::invalid(format!(
            "need at least {DEFAULT_BATCHES} samples after burn-in"
        )));
    }
    let integ = setup.integrator()?;
    let space = setup.space;
    let mut samples = Vec::with_capacity(n_total - burn_in);
    run_path(&integ, x0, n_total, derive_seed(seed, "ergodic", 0), |m, x| {
        if m > burn_in {
            samples.push(phi.eval(space, x));
        }
    })?;
    let mut acc = 0.0;
    let running_average: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(j, v)| {
            acc += v;
            acc / (j + 1) as f64
        })
        .collect();
    let (_, batch_means_stderr) = batch_means(&samples, DEFAULT_BATCHES)?;
    Ok(ErgodicAverageReport {
        functional_name: phi.name(),
        in_lip_b: phi.in_lip_b(),
        burn_in,
        n_total,
        tau: setup.tau,
        final_estimate: *running_average.last().expect("nonempty"),
        running_average,
        batch_means_stderr,
    })
}

#[derive(Debug, Clone)]
pub struct MixingReport {
    pub functional_name: String,
    pub times: Vec<f64>,
    /// Ensemble estimate of `P_m φ(x)`.
    pub ensemble_mean: Vec<f64>,
    pub ensemble_stderr: Vec<f64>,
    pub pi_hat: f64,
    pub pi_stderr: f64,
    /// `|P_m φ(x) − π(φ)|`.
    pub deviation: Vec<f64>,
    /// Three combined standard errors.
    pub floor: Vec<f64>,
    /// Number of leading entries above the floor used in the fit.
    pub window: usize,
    pub fitted_rate: Option<f64>,
    pub gamma6: Option<f64>,
    pub hypothesis_failed: bool,
}

impl MixingReport {
    pub fn to_csv(&self) -> String {
        series_csv(0, &self.times, &self.deviation, None, Some(&self.floor))
    }

    /// Whether the fitted rate reaches `γ₆/2 − tol`.
    pub fn meets_lower_bound(&self, tol: f64) -> Option<bool> {
        Some(self.fitted_rate? >= self.gamma6? / 2.0 - tol)
    }

    pub fn summary(&self) -> String {
        format!(
            "mixing functional={} fitted_rate={} half_gamma6={} window={} pi_hat={} pi_stderr={} hypothesis_failed={}",
            self.functional_name,
            fmt_opt(self.fitted_rate),
            fmt_opt(self.gamma6.map(|g| g / 2.0)),
            self.window,
            self.pi_hat,
            self.pi_stderr,
            self.hypothesis_failed
        )
    }
}

/// Decay of `|P_m φ(x) − π(φ)|` over `horizon_steps`, with `π(φ)` from a
/// separate long run of `long_run_steps`.
#[allow(clippy::too_many_arguments)]
pub fn mixing_decay(
    setup: &Setup<'_>,
    phi: &Observable,
    x: &FemVector,
    horizon_steps: usize,
    n_ensemble: usize,
    long_run_steps: usize,
    seed: u64,
) -> Result<MixingReport> {
    check_len(setup.space, x, "x")?;
    check_paths(n_ensemble)?;
    let hypothesis_failed = setup.gate()?;
    let integ = setup.integrator()?;
    let space = setup.space;
    let rows = collect(n_ensemble, |k| {
        let mut s = Vec::with_capacity(horizon_steps + 1);
        run_path(&integ, x, horizon_steps, derive_seed(seed, "mixing", k as u64), |_, st| {
            s.push(phi.eval(space, st));
        })?;
        Ok(s)
    })?;
    let (ensemble_mean, ensemble_stderr) = column_mean_stderr(&rows);
    let long = ergodic_average(
        setup,
        phi,
        x,
        long_run_steps,
        None,
        derive_seed(seed, "mixing-long-run", 0),
    )?;
    let (pi_hat, pi_stderr) = (long.final_estimate, long.batch_means_stderr);
    let deviation: Vec<f64> = ensemble_mean.iter().map(|m| (m - pi_hat).abs()).collect();
    let floor: Vec<f64> = ensemble_stderr
        .iter()
        .map(|s| 3.0 * (s * s + pi_stderr * pi_stderr).sqrt())
        .collect();
    let window = deviation
        .iter()
        .zip(&floor)
        .take_while(|(d, f)| d > f && **d > FIT_FLOOR)
        .count();
    let times = setup.times(horizon_steps);
    let fitted_rate = fit_exponential(&times[..window], &deviation[..window])
        .ok()
        .map(|(r, _)| r);
    Ok(MixingReport {
        functional_name: phi.name(),
        times,
        ensemble_mean,
        ensemble_stderr,
        pi_hat,
        pi_stderr,
        deviation,
        floor,
        window,
        fitted_rate,
        gamma6: contraction_rate_gamma6(&setup.problem.constants).ok(),
        hypothesis_failed,
    })
}

#[derive(Debug, Clone)]
pub struct HolderReport {
    pub p: u32,
    pub lags: Vec<usize>,
    pub base_steps: Vec<usize>,
    /// `ratios[i][j]`: lag `lags[i]` at base step `base_steps[j]`.
    pub ratios: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub sup: f64,
}

impl HolderReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,base_step,ratio,stderr\n");
        for (i, l) in self.lags.iter().enumerate() {
            for (j, b) in self.base_steps.iter().enumerate() {
                out.push_str(&format!("{l},{b},{},{}\n", self.ratios[i][j], self.stderr[i][j]));
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        format!("holder p={} sup={}", self.p, self.sup)
    }
}

/// `E‖X_{b+l} − X_b‖^p / (lτ)^{p/2}` for every lag `l` and base step `b`.
pub fn holder_ratio(
    setup: &Setup<'_>,
    x0: &FemVector,
    n_paths: usize,
    lags: &[usize],
    base_steps: &[usize],
    seed: u64,
    p: u32,
) -> Result<HolderReport> {
    if p != 2 && p != 4 {
        return Err(Error::invalid(format!("moment order {p} is not 2 or 4")));
    }
    if lags.is_empty() || base_steps.is_empty() || lags.contains(&0) {
        return Err(Error::invalid("need nonempty positive lags and base steps"));
    }
    check_len(setup.space, x0, "X0")?;
    check_paths(n_paths)?;
    let integ = setup.integrator()?;
    let space = setup.space;
    let n_steps = base_steps.iter().max().unwrap() + lags.iter().max().unwrap();
    let rows = collect(n_paths, |k| {
        let mut stored: Vec<Option<Vec<f64>>> = vec![None; n_steps + 1];
        let needed = |m: usize| {
            base_steps
                .iter()
                .any(|&b| m == b || lags.iter().any(|&l| b + l == m))
        };
        run_path(&integ, x0, n_steps, derive_seed(seed, "holder", k as u64), |m, x| {
            if needed(m) {
                stored[m] = Some(x.to_vec());
            }
        })?;
        let mut out = Vec::with_capacity(lags.len() * base_steps.len());
        for &l in lags {
            for &b in base_steps {
                let (xs, xt) = (stored[b].as_ref().unwrap(), stored[b + l].as_ref().unwrap());
                let diff: Vec<f64> = xt.iter().zip(xs).map(|(a, c)| a - c).collect();
                out.push(space.l2_norm_sq(&diff).powi(p as i32 / 2));
            }
        }
        Ok(out)
    })?;
    let (mean, se) = column_mean_stderr(&rows);
    let nb = base_steps.len();
    let mut ratios = Vec::with_capacity(lags.len());
    let mut stderr = Vec::with_capacity(lags.len());
    for (i, &l) in lags.iter().enumerate() {
        let scale = (l as f64 * setup.tau).powf(p as f64 / 2.0);
        ratios.push(mean[i * nb..(i + 1) * nb].iter().map(|v| v / scale).collect());
        stderr.push(se[i * nb..(i + 1) * nb].iter().map(|v| v / scale).collect());
    }
    let sup = mean
        .iter()
        .enumerate()
        .map(|(idx, v)| v / (lags[idx / nb] as f64 * setup.tau).powf(p as f64 / 2.0))
        .fold(0.0, f64::max);
    Ok(HolderReport {
        p,
        lags: lags.to_vec(),
        base_steps: base_steps.to_vec(),
        ratios,
        stderr,
        sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{allen_cahn_spec, DiffusionSpec, InitialCondition};
    use std::f64::consts::PI;

    fn sine(space: &FemSpace) -> FemVector {
        space.project_l2(|xi| (PI * xi).sin())
    }

    #[test]
    fn identical_starts_never_separate() {
        let s = FemSpace::build(16).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(15).unwrap(), 0.05);
        let x = sine(&s);
        let r = coupling_experiment(&setup, &x, &x, 30, 3, 1).unwrap();
        assert!(r.mean_sq_diff.iter().all(|&v| v == 0.0));
        assert_eq!(r.pathwise_contraction(), Some(true));
        assert!(r.fitted_rate.is_none());
    }

    #[test]
    fn allen_cahn_couples_pathwise() {
        let s = FemSpace::build(32).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(31).unwrap(), 0.05);
        let r = coupling_experiment(&setup, &sine(&s), &FemVector::zeros(s.dim()), 100, 4, 9)
            .unwrap();
        assert_eq!(r.pathwise_violations, 0);
        assert!((r.rho - 1.0 / (1.0 + 2.0 * (PI * PI - 1.0) * 0.05)).abs() < 1e-15);
        assert!(!r.hypothesis_failed);
        let bound = r.bound.as_ref().unwrap();
        assert!(r.mean_sq_diff.iter().zip(bound).all(|(m, b)| m <= b));
        assert!(r.fitted_rate.unwrap() >= r.gamma6.unwrap());
        assert_eq!(r.to_csv().lines().count(), 102);
    }

    #[test]
    fn out_of_hypothesis_needs_override() {
        let s = FemSpace::build(16).unwrap();
        let p = allen_cahn_spec(0.3, 0.0, 0.0).unwrap();
        let mut setup = Setup::new(&s, &p, QWienerSpec::smooth(15).unwrap(), 0.01);
        let (x, y) = (sine(&s), FemVector::zeros(s.dim()));
        assert!(matches!(
            coupling_experiment(&setup, &x, &y, 10, 2, 0),
            Err(Error::Precondition { .. })
        ));
        setup.allow_out_of_hypothesis = true;
        let r = coupling_experiment(&setup, &x, &y, 10, 2, 0).unwrap();
        assert!(r.hypothesis_failed && r.gamma6.is_none());
    }

    #[test]
    fn deterministic_heat_sits_below_envelope() {
        let s = FemSpace::build(32).unwrap();
        let p = ProblemSpec::heat(InitialCondition::sine(1.0, 1)).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(1).unwrap(), 0.01);
        let x0 = sine(&s);
        let r = stability_experiment(&setup, &x0, 50, 1, 0, 2).unwrap();
        let f = (1.0 + 0.01 * s.discrete_eigenvalue(1)).powi(-2);
        for (m, v) in r.moment.iter().enumerate() {
            let want = s.l2_norm_sq(&x0) * f.powi(m as i32);
            assert!((v - want).abs() <= 1e-8 * want);
        }
        // The heat ledger has C_γ₅ = 0, so the envelope is attained at t = 0.
        let env = r.envelope.as_ref().unwrap();
        assert_eq!(r.moment[0], env[0]);
        assert!(r.moment.iter().zip(env).skip(1).all(|(m, e)| m < e));
        assert_eq!(r.violations, 0);
        assert!(r.stderr.iter().all(|&e| e == 0.0));
        assert!(stability_experiment(&setup, &x0, 5, 1, 0, 3).is_err());
    }

    #[test]
    fn stationary_moment_stays_below_constant() {
        let s = FemSpace::build(32).unwrap();
        let noise = QWienerSpec::smooth(31).unwrap();
        let l8 = noise.partial_trace().partial;
        let p = allen_cahn_spec(1.0, l8, 0.0).unwrap();
        let setup = Setup::new(&s, &p, noise, 0.05);
        let r = stability_experiment(&setup, &FemVector::zeros(s.dim()), 200, 32, 4, 2).unwrap();
        let c = r.rate.unwrap().c_gamma5;
        let tail = &r.moment[150..];
        let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(plateau <= c * 1.05, "{plateau} vs {c}");
        assert_eq!(r.violations, 0);
        let r4 = stability_experiment(&setup, &FemVector::zeros(s.dim()), 20, 4, 4, 4).unwrap();
        assert!(r4.envelope.is_none());
    }

    #[test]
    fn cesaro_averages() {
        let s = FemSpace::build(32).unwrap();
        let p = ProblemSpec::heat(InitialCondition::Zero).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(1).unwrap(), 0.01);
        let r = cesaro_h1(&setup, &FemVector::zeros(s.dim()), 20, 1, 0).unwrap();
        assert!(r.running.iter().all(|&v| v == 0.0));
        let x0 = sine(&s);
        let r = cesaro_h1(&setup, &x0, 40, 1, 0).unwrap();
        assert!(r.running.windows(2).skip(1).all(|w| w[1] < w[0]));
        assert!(r.sup <= s.h1_semi_sq(&x0) * (1.0 + 1e-12));
    }

    #[test]
    fn constant_functional_is_exact() {
        let s = FemSpace::build(16).unwrap();
        let p = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(15).unwrap(), 0.05);
        let r = ergodic_average(&setup, &Observable::Constant(1.0), &sine(&s), 200, None, 3)
            .unwrap();
        assert_eq!(r.final_estimate, 1.0);
        assert_eq!(r.batch_means_stderr, 0.0);
        assert_eq!(r.burn_in, 40);
        assert!(ergodic_average(&setup, &Observable::Constant(1.0), &sine(&s), 50, Some(50), 3)
            .is_err());
        let m = mixing_decay(&setup, &Observable::Constant(2.0), &sine(&s), 20, 8, 200, 1).unwrap();
        assert!(m.deviation.iter().zip(&m.floor).all(|(d, f)| d <= f));
        assert_eq!(m.window, 0);
    }

    #[test]
    fn holder_ratios() {
        let s = FemSpace::build(32).unwrap();
        let p = ProblemSpec::heat(InitialCondition::Zero).unwrap();
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(1).unwrap(), 0.01);
        let r = holder_ratio(&setup, &FemVector::zeros(s.dim()), 2, &[1, 2], &[5, 10], 0, 2).unwrap();
        assert_eq!(r.sup, 0.0);
        let p = ProblemSpec::heat(InitialCondition::Zero)
            .unwrap()
            .with_diffusion(DiffusionSpec::additive(1.0), 0.0, 0.0, 1.0);
        let setup = Setup::new(&s, &p, QWienerSpec::smooth(31).unwrap(), 0.01);
        let r = holder_ratio(&setup, &FemVector::zeros(s.dim()), 400, &[1, 2], &[100, 200], 5, 2)
            .unwrap();
        for j in 0..2 {
            let q = r.ratios[1][j] / r.ratios[0][j];
            assert!((0.25..=4.0).contains(&q), "{q}");
        }
        let drift = (r.ratios[0][1] / r.ratios[0][0] - 1.0).abs();
        assert!(drift < 5.0 * r.stderr[0][0] / r.ratios[0][0] + 0.05, "{drift}");
        assert!(r.sup.is_finite() && r.sup > 0.0);
    }
}
