use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use monospde::config::{RawConfig, RunConfig};
use monospde::convergence::{strong_error_vs_h, strong_error_vs_tau, Axis, StrongErrorConfig};
use monospde::ergodicity::{
    coupling_experiment, ergodic_average, mixing_decay, stability_experiment, Setup,
};
use monospde::problem::{
    contraction_rate_gamma6, ergodicity_margins, max_wellposed_tau, max_wellposed_tau_galerkin,
    stability_rate_gamma5, verify_conditions, SampleGrid, WellposedBound,
};
use monospde::rng::derive_seed;
use monospde::schemes::{simulate, RecordSpec};
use monospde::{Error, FemSpace, FemVector, Integrator, Observable, StreamedNoise};

use crate::manifest::{append_result, digest, write_output, RunManifest};
use crate::{Cli, Command};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_REFUSED: u8 = 2;

pub struct Outcome {
    pub code: u8,
    pub messages: Vec<String>,
}

/// Refusals (bad config, failed hypotheses, invalid parameters) exit 2;
/// everything else is a runtime failure.
pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config { .. } | Error::Precondition { .. } | Error::InvalidArgument(_)) => {
            EXIT_REFUSED
        }
        _ => EXIT_RUNTIME,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut raw = RawConfig::parse(&text)?;
    if let Some(s) = cli.seed {
        raw.set("noise.seed", s)?;
    }
    if let Some(p) = cli.paths {
        raw.set("experiment.paths", p)?;
    }
    if let Command::Converge { axis, ladder } = &cli.command {
        if let Some(a) = axis {
            raw.set("converge.axis", a)?;
        }
        if let Some(l) = ladder {
            let s: Vec<String> = l.iter().map(|v| v.to_string()).collect();
            raw.set("converge.ladder", s.join(","))?;
        }
    }
    Ok(RunConfig::resolve(&raw)?)
}

struct Run<'c> {
    cli: &'c Cli,
    started: Instant,
    outputs: Vec<PathBuf>,
}

impl Run<'_> {
    fn output(&mut self, name: &str, contents: &str) -> Result<()> {
        write_output(&self.cli.out, name, contents)?;
        self.outputs.push(PathBuf::from(name));
        Ok(())
    }

    fn finish(mut self, command: &str, cfg: &RunConfig, summary: Option<&str>) -> Result<()> {
        let snapshot = cfg.snapshot();
        self.output(&format!("{command}.resolved.cfg"), &snapshot)?;
        let m = RunManifest {
            command: command.into(),
            config_digest: digest(&snapshot),
            seed: cfg.seed,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            outputs: self.outputs,
            wall_time: self.started.elapsed().as_secs_f64(),
            resolved_config: snapshot,
        };
        m.write(&self.cli.out)?;
        if let Some(s) = summary {
            append_result(&self.cli.out, s)?;
        }
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let cfg = load_config(cli)?;
    let run = Run {
        cli,
        started: Instant::now(),
        outputs: Vec::new(),
    };
    match &cli.command {
        Command::Check => check(run, &cfg),
        Command::Simulate => simulate_cmd(run, &cfg),
        Command::Coupling => coupling(run, &cfg),
        Command::Stability => stability(run, &cfg),
        Command::Ergodic => ergodic(run, &cfg),
        Command::Mixing => mixing(run, &cfg),
        Command::Converge { .. } => converge(run, &cfg),
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn bound_str(b: WellposedBound) -> String {
    match b {
        WellposedBound::Unbounded => "unbounded".into(),
        WellposedBound::Below(v) => v.to_string(),
    }
}

fn check(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.problem.constants;
    let report = verify_conditions(&cfg.problem, &SampleGrid::default());
    let margins = ergodicity_margins(c);
    let semi = max_wellposed_tau(c);
    let galerkin = max_wellposed_tau_galerkin(c);
    let mut rows: Vec<(String, String, bool)> = report
        .entries()
        .iter()
        .map(|(name, chk)| (format!("condition.{name}"), chk.max_violation.to_string(), chk.passed))
        .collect();
    rows.push(("margin.contraction".into(), margins.contraction.to_string(), margins.contraction > 0.0));
    rows.push(("margin.stability".into(), margins.stability.to_string(), margins.stability > 0.0));
    rows.push(("max_wellposed_tau".into(), bound_str(semi), semi.admits(cfg.tau)));
    rows.push(("max_wellposed_tau_galerkin".into(), bound_str(galerkin), galerkin.admits(cfg.tau)));
    let g6 = contraction_rate_gamma6(c).ok();
    let g5 = stability_rate_gamma5(c, cfg.tau).ok();
    let info = [
        ("gamma6", g6.map(|v| v.to_string())),
        ("gamma5", g5.map(|r| r.gamma5.to_string())),
        ("c_gamma5", g5.map(|r| r.c_gamma5.to_string())),
    ];

    let mut table = String::new();
    for (k, v, ok) in &rows {
        let _ = writeln!(table, "{k:<28} {v:<24} {}", flag(*ok));
    }
    for (k, v) in &info {
        let _ = writeln!(table, "{k:<28} {}", v.as_deref().unwrap_or("undefined"));
    }
    print!("{table}");

    let mut csv = String::from("item,value,pass\n");
    for (k, v, ok) in &rows {
        let _ = writeln!(csv, "{k},{v},{ok}");
    }
    for (k, v) in &info {
        let _ = writeln!(csv, "{k},{},", v.as_deref().unwrap_or(""));
    }
    run.output("check.csv", &csv)?;
    let all = rows.iter().all(|r| r.2);
    let summary = format!(
        "check margin_contraction={} margin_stability={} all_hypotheses={}",
        margins.contraction,
        margins.stability,
        flag(all)
    );
    run.finish("check", cfg, Some(&summary))?;
    Ok(Outcome {
        code: if all { EXIT_PASS } else { EXIT_REFUSED },
        messages: if all { vec![] } else { vec!["hypotheses do not all hold".into()] },
    })
}

fn integrator<'a>(
    cli: &Cli,
    space: &'a FemSpace,
    cfg: &'a RunConfig,
) -> Result<Integrator<'a>> {
    let p = &cfg.problem;
    if cli.override_checks {
        return Ok(Integrator::new_unchecked(space, p, &cfg.noise, cfg.scheme, cfg.tau, cfg.solver)?);
    }
    let bound = max_wellposed_tau(&p.constants);
    if !bound.admits(cfg.tau) {
        return Err(Error::Precondition {
            what: format!(
                "tau = {} exceeds max_wellposed_tau = {} (use --override to run anyway)",
                cfg.tau,
                bound.value()
            ),
            margin: bound.value() - cfg.tau,
        }
        .into());
    }
    Ok(Integrator::new(space, p, &cfg.noise, cfg.scheme, cfg.tau, cfg.solver)?)
}

fn simulate_cmd(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let space = FemSpace::build(cfg.n_cells)?;
    let integ = integrator(run.cli, &space, cfg)?;
    let noise = StreamedNoise {
        tau: cfg.tau,
        n_steps: cfg.n_steps,
        n_modes: integ.n_modes(),
        seed: derive_seed(cfg.seed, "simulate", 0),
    };
    let record = RecordSpec {
        observables: vec![Observable::L2Norm, Observable::H1Semi],
        state_stride: None,
    };
    let path = simulate(&integ, &noise, &record)?;
    run.output("simulate.csv", &path.to_csv())?;
    run.output("state_final.csv", &path.final_state().to_csv(&space))?;
    let summary = format!(
        "simulate steps={} final_l2={} max_newton_iters={} fallback_steps={}",
        cfg.n_steps,
        space.l2_norm(path.final_state()),
        path.max_newton_iters,
        path.fallback_steps
    );
    run.finish("simulate", cfg, Some(&summary))?;
    Ok(Outcome {
        code: EXIT_PASS,
        messages: vec![],
    })
}

fn setup<'a>(cli: &Cli, space: &'a FemSpace, cfg: &'a RunConfig) -> Setup<'a> {
    Setup {
        space,
        problem: &cfg.problem,
        noise: cfg.noise.clone(),
        scheme: cfg.scheme,
        tau: cfg.tau,
        solver: cfg.solver,
        allow_out_of_hypothesis: cli.override_checks,
    }
}

fn initial(space: &FemSpace, cfg: &RunConfig) -> FemVector {
    let ic = &cfg.problem.initial;
    space.project_l2(|x| ic.eval(x))
}

fn finish_flagged(run: Run<'_>, name: &str, cfg: &RunConfig, summary: String, ok: bool) -> Result<Outcome> {
    println!("{summary}");
    run.finish(name, cfg, Some(&summary))?;
    Ok(Outcome {
        code: if ok { EXIT_PASS } else { EXIT_RUNTIME },
        messages: if ok { vec![] } else { vec![format!("{name}: a check failed")] },
    })
}

fn coupling(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let space = FemSpace::build(cfg.n_cells)?;
    let s = setup(run.cli, &space, cfg);
    let x = initial(&space, cfg);
    let y = FemVector::zeros(space.dim());
    let r = coupling_experiment(
        &s,
        &x,
        &y,
        cfg.n_steps,
        cfg.experiment.paths,
        derive_seed(cfg.seed, "coupling", 0),
    )?;
    run.output("coupling.csv", &r.to_csv())?;
    let ok = r.pathwise_contraction().unwrap_or(true);
    finish_flagged(run, "coupling", cfg, r.summary(), ok)
}

fn stability(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let space = FemSpace::build(cfg.n_cells)?;
    let s = setup(run.cli, &space, cfg);
    let r = stability_experiment(
        &s,
        &initial(&space, cfg),
        cfg.n_steps,
        cfg.experiment.paths,
        derive_seed(cfg.seed, "stability", 0),
        cfg.experiment.moment,
    )?;
    run.output("stability.csv", &r.to_csv())?;
    let ok = r.violations == 0;
    finish_flagged(run, "stability", cfg, r.summary(), ok)
}

fn functional(space: &FemSpace, cfg: &RunConfig) -> Observable {
    match cfg.experiment.functional.as_str() {
        "l2_sq" => Observable::L2NormSq,
        "l2" => Observable::L2Norm,
        "constant" => Observable::Constant(1.0),
        "projection_v1" => {
            let v = space.sine_mode(1);
            let n = space.l2_norm(&v);
            Observable::Projection {
                name: "projection_v1".into(),
                direction: v.iter().map(|x| x / n).collect(),
            }
        }
        _ => Observable::ClampedNorm {
            cap: cfg.experiment.cap,
        },
    }
}

fn ergodic(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(b) = cfg.experiment.burn_in {
        if b >= cfg.n_steps {
            return Err(Error::Config {
                location: "key ergodic.burn_in".into(),
                message: format!("burn_in = {b} must be below scheme.n_steps = {}", cfg.n_steps),
            }
            .into());
        }
    }
    let space = FemSpace::build(cfg.n_cells)?;
    let s = setup(run.cli, &space, cfg);
    let r = ergodic_average(
        &s,
        &functional(&space, cfg),
        &initial(&space, cfg),
        cfg.n_steps,
        cfg.experiment.burn_in,
        derive_seed(cfg.seed, "ergodic", 0),
    )?;
    run.output("ergodic.csv", &r.to_csv())?;
    finish_flagged(run, "ergodic", cfg, r.summary(), true)
}

fn mixing(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let space = FemSpace::build(cfg.n_cells)?;
    let s = setup(run.cli, &space, cfg);
    let r = mixing_decay(
        &s,
        &functional(&space, cfg),
        &initial(&space, cfg),
        cfg.experiment.horizon_steps,
        cfg.experiment.paths,
        cfg.experiment.long_run_steps,
        derive_seed(cfg.seed, "mixing", 0),
    )?;
    run.output("mixing.csv", &r.to_csv())?;
    let ok = r.meets_lower_bound(0.0).unwrap_or(true);
    finish_flagged(run, "mixing", cfg, r.summary(), ok)
}

fn converge(mut run: Run<'_>, cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.experiment;
    let axis: Axis = e.axis.parse()?;
    let mut sc = StrongErrorConfig::new(&cfg.problem, cfg.noise.clone(), e.horizon, derive_seed(cfg.seed, "converge", 0));
    sc.scheme = cfg.scheme;
    sc.solver = cfg.solver;
    sc.n_paths = e.paths;
    sc.n_checkpoints = e.checkpoints;
    let (table, expected) = match axis {
        Axis::Tau => {
            let ladder = e
                .ladder
                .clone()
                .unwrap_or_else(|| (4..=8).map(|j| 2f64.powi(-j)).collect());
            let finest = ladder.iter().copied().fold(f64::INFINITY, f64::min);
            let tau_ref = e.reference.unwrap_or(finest / 8.0);
            let n_cells = e.converge_n_cells.unwrap_or(cfg.n_cells);
            (strong_error_vs_tau(&sc, n_cells, &ladder, tau_ref)?, 1.0)
        }
        Axis::H => {
            let ladder: Vec<usize> = match &e.ladder {
                Some(l) => l
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(anyhow!(Error::InvalidArgument(format!(
                                "h ladder entries are cell counts, got {v}"
                            ))))
                        }
                    })
                    .collect::<Result<_>>()?,
                None => vec![8, 16, 32, 64],
            };
            let n_ref = match e.reference {
                Some(r) => r as usize,
                None => 4 * ladder.iter().copied().max().unwrap_or(1),
            };
            sc.noise = sc.noise.with_modes(n_ref - 1);
            let tau = e.converge_tau.unwrap_or(cfg.tau);
            (strong_error_vs_h(&sc, tau, &ladder, n_ref)?, 2.0)
        }
    };
    let expected = e.expected_slope.unwrap_or(expected);
    let window = (expected - e.slope_tol, expected + e.slope_tol, e.min_r2);
    run.output("converge.csv", &table.to_csv())?;
    let ok = table.fit.is_none() || table.passes(window.0, window.1, window.2);
    finish_flagged(run, "converge", cfg, table.summary(Some(window)), ok)
}
