//! Key-value run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Lists are
//! comma-separated. Every key has a default except where a value cannot be
//! derived (constants of tabulated nonlinearities).
//!
//! ```text
//! drift.kind = allen_cahn
//! drift.alpha = 1
//! diffusion.kind = additive
//! noise.decay_exponent = 4
//! scheme.tau = 0.05
//! scheme.n_steps = 400
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::QWienerSpec;
use crate::problem::{
    allen_cahn_spec, ConstantsLedger, DiffusionSpec, DriftSpec, InitialCondition, ProblemSpec,
    ScalarFn,
};
use crate::schemes::{Scheme, SolverConfig};

const KEYS: &[&str] = &[
    "drift.kind",
    "drift.coeffs",
    "drift.alpha",
    "drift.table_x",
    "drift.table_y",
    "diffusion.kind",
    "diffusion.sigma",
    "diffusion.offset",
    "diffusion.slope",
    "diffusion.table_x",
    "diffusion.table_y",
    "constants.L1",
    "constants.L2",
    "constants.L3",
    "constants.L4",
    "constants.L5",
    "constants.L6",
    "constants.L7",
    "constants.L8",
    "constants.L9",
    "constants.L10",
    "constants.q",
    "constants.lambda1",
    "initial.kind",
    "initial.amplitude",
    "initial.mode",
    "initial.table_x",
    "initial.table_y",
    "noise.decay_exponent",
    "noise.n_modes",
    "noise.seed",
    "scheme.kind",
    "scheme.tau",
    "scheme.n_steps",
    "solver.newton_tol",
    "solver.max_iters",
    "solver.fallback",
    "mesh.n_cells",
    "experiment.paths",
    "experiment.moment",
    "ergodic.burn_in",
    "ergodic.functional",
    "ergodic.cap",
    "mixing.horizon_steps",
    "mixing.long_run_steps",
    "converge.expected_slope",
    "converge.slope_tol",
    "converge.min_r2",
    "converge.axis",
    "converge.ladder",
    "converge.reference",
    "converge.horizon",
    "converge.checkpoints",
    "converge.tau",
    "converge.n_cells",
];

/// Parsed but unresolved `key = value` pairs with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {n}"), "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::config(format!("line {n}"), format!("unknown key `{k}`")));
            }
            if v.is_empty() {
                return Err(Error::config(format!("line {n}"), format!("empty value for `{k}`")));
            }
            if let Some((prev, _)) = entries.insert(k.to_string(), (n, v.to_string())) {
                return Err(Error::config(
                    format!("line {n}"),
                    format!("`{k}` already set on line {prev}"),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// Set or replace a value (command-line overrides).
    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::config("override", format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), (0, value.to_string()));
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn location(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some((0, _)) | None => format!("key {key}"),
            Some((n, _)) => format!("line {n} (key {key})"),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn parse_with<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => f(v)
                .map(Some)
                .ok_or_else(|| Error::config(self.location(key), format!("expected {what}, got `{v}`"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, "a finite number", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, "a nonnegative integer", |v| v.parse().ok())
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, "a nonnegative integer", |v| v.parse().ok())
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.parse_with(key, "true or false", |v| v.parse().ok())
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parse_with(key, "a comma-separated list of numbers", |v| {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect()
        })
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.raw(key)
    }

    fn require_f64(&self, key: &str, why: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::config(format!("key {key}"), format!("missing `{key}` ({why})")))
    }

    fn check(&self, key: &str, ok: bool, msg: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::config(self.location(key), msg.to_string()))
        }
    }
}

/// Piecewise-linear interpolant through `(xs, ys)`, extended linearly.
fn table(xs: &[f64], ys: &[f64]) -> (ScalarFn, ScalarFn) {
    let (xs, ys): (Arc<[f64]>, Arc<[f64]>) = (xs.into(), ys.into());
    let n = xs.len();
    let segment = {
        let xs = xs.clone();
        move |x: f64| xs[1..n - 1].partition_point(|&k| k <= x)
    };
    let slope = {
        let (xs, ys) = (xs.clone(), ys.clone());
        move |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
    };
    let (seg1, sl1) = (segment.clone(), slope.clone());
    let (xs1, ys1) = (xs.clone(), ys.clone());
    let f: ScalarFn = Arc::new(move |x| {
        let j = seg1(x);
        ys1[j] + sl1(j) * (x - xs1[j])
    });
    let fp: ScalarFn = Arc::new(move |x| slope(segment(x)));
    (f, fp)
}

fn read_table(raw: &RawConfig, prefix: &str) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let kx = format!("{prefix}.table_x");
    let ky = format!("{prefix}.table_y");
    let (Some(xs), Some(ys)) = (raw.list(&kx)?, raw.list(&ky)?) else {
        return Ok(None);
    };
    raw.check(&ky, xs.len() == ys.len(), "table_x and table_y differ in length")?;
    raw.check(&kx, xs.len() >= 2, "a table needs at least two points")?;
    raw.check(&kx, xs.windows(2).all(|w| w[0] < w[1]), "table_x must be strictly increasing")?;
    Ok(Some((xs, ys)))
}

fn require_table(raw: &RawConfig, prefix: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    read_table(raw, prefix)?.ok_or_else(|| {
        Error::config(
            format!("key {prefix}.table_x"),
            format!("custom_table needs `{prefix}.table_x` and `{prefix}.table_y`"),
        )
    })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub noise: QWienerSpec,
    pub seed: u64,
    pub n_cells: usize,
    pub scheme: Scheme,
    pub tau: f64,
    pub n_steps: usize,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
    snapshot: BTreeMap<String, String>,
}

/// Parameters of the long-time and convergence experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub paths: usize,
    pub moment: u32,
    pub burn_in: Option<usize>,
    pub functional: String,
    pub cap: f64,
    pub horizon_steps: usize,
    pub long_run_steps: usize,
    pub axis: String,
    pub ladder: Option<Vec<f64>>,
    /// `τ_ref` for the time axis, reference cell count for the space axis.
    pub reference: Option<f64>,
    pub horizon: f64,
    pub checkpoints: usize,
    /// Fixed step on the space axis.
    pub converge_tau: Option<f64>,
    /// Fixed mesh on the time axis.
    pub converge_n_cells: Option<usize>,
    /// Pass window `expected ± tol` for the fitted slope; the default
    /// expectation is the theorem's exponent on the chosen axis.
    pub expected_slope: Option<f64>,
    pub slope_tol: f64,
    pub min_r2: f64,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::resolve(&RawConfig::parse(text)?)
    }

    pub fn resolve(raw: &RawConfig) -> Result<Self> {
        let mut snap = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            snap.insert(k.to_string(), v);
        };

        let n_cells = raw.usize("mesh.n_cells")?.unwrap_or(64);
        raw.check("mesh.n_cells", n_cells >= 2, "mesh.n_cells must be at least 2")?;
        put("mesh.n_cells", n_cells.to_string());

        let decay = raw.f64("noise.decay_exponent")?.unwrap_or(4.0);
        let n_modes = raw.usize("noise.n_modes")?.unwrap_or(n_cells - 1);
        raw.check("noise.n_modes", n_modes >= 1, "noise.n_modes must be at least 1")?;
        let noise = QWienerSpec::power(decay, n_modes)
            .map_err(|e| Error::config(raw.location("noise.decay_exponent"), e.to_string()))?;
        let seed = raw.u64("noise.seed")?.unwrap_or(0);
        put("noise.decay_exponent", decay.to_string());
        put("noise.n_modes", n_modes.to_string());
        put("noise.seed", seed.to_string());
        let trace = noise.partial_trace().partial;

        // Drift and the constants it determines.
        let drift_kind = raw.str("drift.kind").unwrap_or("allen_cahn").to_string();
        put("drift.kind", drift_kind.clone());
        let mut consts = ConstantsLedger::default();
        let drift = match drift_kind.as_str() {
            "allen_cahn" => {
                let alpha = raw.f64("drift.alpha")?.unwrap_or(1.0);
                raw.check("drift.alpha", alpha > 0.0, "drift.alpha must be positive")?;
                put("drift.alpha", alpha.to_string());
                let spec = allen_cahn_spec(alpha, 0.0, 0.0)?;
                consts = spec.constants;
                spec.drift
            }
            "polynomial" => {
                let coeffs = raw.list("drift.coeffs")?.ok_or_else(|| {
                    Error::config("key drift.coeffs", "missing `drift.coeffs` for a polynomial drift")
                })?;
                put("drift.coeffs", fmt_list(&coeffs));
                let d = DriftSpec::polynomial(coeffs);
                let p = d.polynomial_coeffs().expect("polynomial drift").clone();
                if let Ok(c) = ConstantsLedger::for_polynomial_drift(&p, raw.f64("constants.L2")?) {
                    consts = c;
                } else {
                    for k in ["L1", "L2", "L3", "L4", "L5"] {
                        raw.require_f64(
                            &format!("constants.{k}"),
                            "not derivable for this polynomial",
                        )?;
                    }
                    consts.q = d.q();
                }
                d
            }
            "custom_table" => {
                let (xs, ys) = require_table(raw, "drift")?;
                for k in ["L1", "L2", "L3", "L4", "L5"] {
                    raw.require_f64(&format!("constants.{k}"), "required for a custom drift")?;
                }
                put("drift.table_x", fmt_list(&xs));
                put("drift.table_y", fmt_list(&ys));
                let (f, fp) = table(&xs, &ys);
                DriftSpec::custom(f, fp, raw.f64("constants.q")?.unwrap_or(1.0))
            }
            other => {
                return Err(Error::config(
                    raw.location("drift.kind"),
                    format!("unknown drift kind `{other}` (allen_cahn, polynomial, custom_table)"),
                ))
            }
        };

        // Diffusion; defaults bound both the Hilbert–Schmidt and the scalar
        // growth conditions.
        let diff_kind = raw.str("diffusion.kind").unwrap_or("additive").to_string();
        put("diffusion.kind", diff_kind.clone());
        let diffusion = match diff_kind.as_str() {
            "additive" => {
                let sigma = raw.f64("diffusion.sigma")?.unwrap_or(1.0);
                put("diffusion.sigma", sigma.to_string());
                consts.l6 = 0.0;
                consts.l7 = 0.0;
                consts.l8 = sigma * sigma * trace;
                consts.l9 = 0.0;
                consts.l10 = sigma * sigma * noise.h1_trace();
                if sigma == 0.0 {
                    DiffusionSpec::zero()
                } else {
                    DiffusionSpec::additive(sigma)
                }
            }
            "linear" => {
                let a = raw.f64("diffusion.offset")?.unwrap_or(0.0);
                let b = raw.f64("diffusion.slope")?.unwrap_or(1.0);
                put("diffusion.offset", a.to_string());
                put("diffusion.slope", b.to_string());
                let k = (2.0 * trace).max(1.0);
                consts.l6 = b * b * k;
                consts.l7 = 2.0 * b * b * k;
                consts.l8 = 2.0 * a * a * k;
                consts.l9 = b * b * k;
                consts.l10 = 2.0 * (a * a + b * b) * noise.h1_trace();
                DiffusionSpec::linear(a, b)
            }
            "custom_table" => {
                let (xs, ys) = require_table(raw, "diffusion")?;
                for k in ["L6", "L7", "L8"] {
                    raw.require_f64(&format!("constants.{k}"), "required for a custom diffusion")?;
                }
                put("diffusion.table_x", fmt_list(&xs));
                put("diffusion.table_y", fmt_list(&ys));
                let additive = ys.windows(2).all(|w| w[0] == w[1]);
                let (g, gp) = table(&xs, &ys);
                DiffusionSpec::custom(g, gp, additive)
            }
            other => {
                return Err(Error::config(
                    raw.location("diffusion.kind"),
                    format!("unknown diffusion kind `{other}` (additive, linear, custom_table)"),
                ))
            }
        };

        // Explicit constants override derived ones.
        let fields: [(&str, &mut f64); 12] = [
            ("L1", &mut consts.l1),
            ("L2", &mut consts.l2),
            ("L3", &mut consts.l3),
            ("L4", &mut consts.l4),
            ("L5", &mut consts.l5),
            ("L6", &mut consts.l6),
            ("L7", &mut consts.l7),
            ("L8", &mut consts.l8),
            ("L9", &mut consts.l9),
            ("L10", &mut consts.l10),
            ("q", &mut consts.q),
            ("lambda1", &mut consts.lambda1),
        ];
        for (k, slot) in fields {
            let key = format!("constants.{k}");
            if let Some(v) = raw.f64(&key)? {
                *slot = v;
            }
            put(&key, slot.to_string());
        }
        consts
            .validate()
            .map_err(|e| Error::config("constants", e.to_string()))?;

        let init_kind = raw.str("initial.kind").unwrap_or("sine_mode").to_string();
        put("initial.kind", init_kind.clone());
        let initial = match init_kind.as_str() {
            "sine_mode" => {
                let amp = raw.f64("initial.amplitude")?.unwrap_or(1.0);
                let mode = raw.usize("initial.mode")?.unwrap_or(1);
                raw.check("initial.mode", mode >= 1 && mode <= u32::MAX as usize, "initial.mode must be at least 1")?;
                put("initial.amplitude", amp.to_string());
                put("initial.mode", mode.to_string());
                InitialCondition::sine(amp, mode as u32)
            }
            "zero" => InitialCondition::Zero,
            "custom_table" => {
                let (xs, ys) = require_table(raw, "initial")?;
                put("initial.table_x", fmt_list(&xs));
                put("initial.table_y", fmt_list(&ys));
                let (f, _) = table(&xs, &ys);
                InitialCondition::Custom {
                    name: "table".into(),
                    f,
                }
            }
            other => {
                return Err(Error::config(
                    raw.location("initial.kind"),
                    format!("unknown initial kind `{other}` (sine_mode, zero, custom_table)"),
                ))
            }
        };
        let problem = ProblemSpec::new(drift, diffusion, consts, initial)
            .map_err(|e| Error::config(raw.location("initial.kind"), e.to_string()))?;

        let scheme: Scheme = raw
            .str("scheme.kind")
            .unwrap_or("dieg")
            .parse()
            .map_err(|e: Error| Error::config(raw.location("scheme.kind"), e.to_string()))?;
        let tau = raw.f64("scheme.tau")?.unwrap_or(0.01);
        raw.check("scheme.tau", tau > 0.0, "scheme.tau must be positive")?;
        let n_steps = raw.usize("scheme.n_steps")?.unwrap_or(100);
        put("scheme.kind", scheme.name().to_string());
        put("scheme.tau", tau.to_string());
        put("scheme.n_steps", n_steps.to_string());

        let solver = SolverConfig {
            newton_tol: raw.f64("solver.newton_tol")?.unwrap_or(1e-10),
            max_newton_iters: raw.usize("solver.max_iters")?.unwrap_or(50),
            fallback_fixed_point: raw.bool("solver.fallback")?.unwrap_or(true),
        };
        solver
            .validate()
            .map_err(|e| Error::config(raw.location("solver.newton_tol"), e.to_string()))?;
        put("solver.newton_tol", solver.newton_tol.to_string());
        put("solver.max_iters", solver.max_newton_iters.to_string());
        put("solver.fallback", solver.fallback_fixed_point.to_string());

        let experiment = ExperimentConfig {
            paths: raw.usize("experiment.paths")?.unwrap_or(16),
            moment: raw.usize("experiment.moment")?.unwrap_or(2) as u32,
            burn_in: raw.usize("ergodic.burn_in")?,
            functional: raw.str("ergodic.functional").unwrap_or("clamped_norm").to_string(),
            cap: raw.f64("ergodic.cap")?.unwrap_or(1.0),
            horizon_steps: raw.usize("mixing.horizon_steps")?.unwrap_or(n_steps),
            long_run_steps: raw.usize("mixing.long_run_steps")?.unwrap_or(20 * n_steps.max(1)),
            axis: raw.str("converge.axis").unwrap_or("tau").to_string(),
            ladder: raw.list("converge.ladder")?,
            reference: raw.f64("converge.reference")?,
            horizon: raw.f64("converge.horizon")?.unwrap_or(1.0),
            checkpoints: raw.usize("converge.checkpoints")?.unwrap_or(8),
            converge_tau: raw.f64("converge.tau")?,
            converge_n_cells: raw.usize("converge.n_cells")?,
            expected_slope: raw.f64("converge.expected_slope")?,
            slope_tol: raw.f64("converge.slope_tol")?.unwrap_or(0.25),
            min_r2: raw.f64("converge.min_r2")?.unwrap_or(0.9),
        };
        raw.check("experiment.paths", experiment.paths >= 1, "experiment.paths must be at least 1")?;
        raw.check(
            "ergodic.functional",
            ["clamped_norm", "l2_sq", "l2", "projection_v1", "constant"].contains(&experiment.functional.as_str()),
            "ergodic.functional must be clamped_norm, l2_sq, l2, projection_v1 or constant",
        )?;
        raw.check("converge.axis", ["tau", "h"].contains(&experiment.axis.as_str()), "converge.axis must be tau or h")?;
        let e = &experiment;
        put("experiment.paths", e.paths.to_string());
        put("experiment.moment", e.moment.to_string());
        if let Some(b) = e.burn_in {
            put("ergodic.burn_in", b.to_string());
        }
        put("ergodic.functional", e.functional.clone());
        put("ergodic.cap", e.cap.to_string());
        put("mixing.horizon_steps", e.horizon_steps.to_string());
        put("mixing.long_run_steps", e.long_run_steps.to_string());
        if let Some(v) = e.expected_slope {
            put("converge.expected_slope", v.to_string());
        }
        put("converge.slope_tol", e.slope_tol.to_string());
        put("converge.min_r2", e.min_r2.to_string());
        put("converge.axis", e.axis.clone());
        if let Some(l) = &e.ladder {
            put("converge.ladder", fmt_list(l));
        }
        if let Some(r) = e.reference {
            put("converge.reference", r.to_string());
        }
        put("converge.horizon", e.horizon.to_string());
        put("converge.checkpoints", e.checkpoints.to_string());
        if let Some(t) = e.converge_tau {
            put("converge.tau", t.to_string());
        }
        if let Some(n) = e.converge_n_cells {
            put("converge.n_cells", n.to_string());
        }

        Ok(Self {
            problem,
            noise,
            seed,
            n_cells,
            scheme,
            tau,
            n_steps,
            solver,
            experiment,
            snapshot: snap,
        })
    }

    /// Every resolved key in sorted order, parseable back into an
    /// equivalent configuration.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.snapshot {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
