//! Browser bindings for the stochastic Allen–Cahn demo.
//!
//! Each export has a plain Rust counterpart in [`demo`] so the numerics can be
//! tested natively; the wasm wrappers only convert errors to `JsValue`.

use wasm_bindgen::prelude::*;

pub mod demo {
    use std::f64::consts::PI;

    use monospde::ergodicity::{coupling_experiment, Setup};
    use monospde::problem::{allen_cahn_spec, ergodicity_margins, InitialCondition};
    use monospde::schemes::{simulate, RecordSpec};
    use monospde::{FemSpace, FemVector, Integrator, Observable, QWienerSpec, Scheme, SolverConfig, StreamedNoise};

    pub const MAX_CELLS: usize = 512;
    pub const MAX_STEPS: usize = 20_000;
    pub const MAX_PATHS: usize = 256;

    fn check_sizes(n_cells: usize, n_steps: usize) -> Result<(), String> {
        if !(2..=MAX_CELLS).contains(&n_cells) {
            return Err(format!("n_cells must lie in [2, {MAX_CELLS}], got {n_cells}"));
        }
        if n_steps > MAX_STEPS {
            return Err(format!("n_steps must be at most {MAX_STEPS}, got {n_steps}"));
        }
        Ok(())
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct PathData {
        pub times: Vec<f64>,
        pub l2: Vec<f64>,
        pub nodes: Vec<f64>,
        pub final_state: Vec<f64>,
    }

    /// One trajectory of the Allen–Cahn chain started from `sin(πξ)`.
    /// `final_state` includes the two boundary zeros.
    pub fn path(alpha: f64, n_cells: usize, tau: f64, n_steps: usize, seed: u64) -> Result<PathData, String> {
        check_sizes(n_cells, n_steps)?;
        let space = FemSpace::build(n_cells).map_err(|e| e.to_string())?;
        let noise = QWienerSpec::smooth(n_cells - 1).map_err(|e| e.to_string())?;
        let problem = allen_cahn_spec(alpha, noise.partial_trace().partial, noise.h1_trace())
            .and_then(|p| p.with_initial(InitialCondition::sine(1.0, 1)))
            .map_err(|e| e.to_string())?;
        let integ = Integrator::new_unchecked(&space, &problem, &noise, Scheme::Dieg, tau, SolverConfig::default())
            .map_err(|e| e.to_string())?;
        let src = StreamedNoise { tau, n_steps, n_modes: noise.n_modes, seed };
        let rec = RecordSpec { observables: vec![Observable::L2Norm], state_stride: None };
        let out = simulate(&integ, &src, &rec).map_err(|e| e.to_string())?;
        let l2 = out.observable("l2").ok_or("missing l2 series")?.to_vec();
        let times = (0..l2.len()).map(|m| m as f64 * tau).collect();
        let nodes = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
        let mut final_state = vec![0.0];
        final_state.extend(out.final_state().iter());
        final_state.push(0.0);
        Ok(PathData { times, l2, nodes, final_state })
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct CouplingData {
        pub times: Vec<f64>,
        pub mean_sq_diff: Vec<f64>,
        /// Empty when the contraction hypothesis fails.
        pub bound: Vec<f64>,
        pub gamma6: f64,
        pub pathwise_violations: usize,
    }

    /// Synchronous coupling of the chains started from `sin(πξ)` and `0`.
    /// Runs outside the contraction hypothesis too, with `gamma6 = NaN`.
    pub fn coupling(
        alpha: f64,
        n_cells: usize,
        tau: f64,
        n_steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<CouplingData, String> {
        check_sizes(n_cells, n_steps)?;
        if n_paths == 0 || n_paths > MAX_PATHS {
            return Err(format!("n_paths must lie in [1, {MAX_PATHS}], got {n_paths}"));
        }
        let space = FemSpace::build(n_cells).map_err(|e| e.to_string())?;
        let noise = QWienerSpec::smooth(n_cells - 1).map_err(|e| e.to_string())?;
        let problem = allen_cahn_spec(alpha, noise.partial_trace().partial, noise.h1_trace())
            .map_err(|e| e.to_string())?;
        let mut setup = Setup::new(&space, &problem, noise, tau);
        setup.allow_out_of_hypothesis = true;
        let x = space.project_l2(|xi| (PI * xi).sin());
        let y = FemVector::zeros(space.dim());
        let r = coupling_experiment(&setup, &x, &y, n_steps, n_paths, seed).map_err(|e| e.to_string())?;
        Ok(CouplingData {
            times: r.times,
            mean_sq_diff: r.mean_sq_diff,
            bound: r.bound.unwrap_or_default(),
            gamma6: r.gamma6.unwrap_or(f64::NAN),
            pathwise_violations: r.pathwise_violations,
        })
    }

    #[derive(Debug, Clone, Default, PartialEq)]
    pub struct MarginCurve {
        pub alphas: Vec<f64>,
        pub contraction: Vec<f64>,
        pub stability: Vec<f64>,
    }

    /// Contraction and stability margins on an evenly spaced `alpha` grid.
    pub fn margins(alpha_min: f64, alpha_max: f64, n: usize) -> Result<MarginCurve, String> {
        if !(alpha_min > 0.0 && alpha_max >= alpha_min) || !(2..=10_000).contains(&n) {
            return Err("need 0 < alpha_min <= alpha_max and 2 <= n <= 10000".into());
        }
        let mut out = MarginCurve::default();
        for i in 0..n {
            let a = alpha_min + (alpha_max - alpha_min) * i as f64 / (n - 1) as f64;
            let m = ergodicity_margins(&allen_cahn_spec(a, 0.0, 0.0).map_err(|e| e.to_string())?.constants);
            out.alphas.push(a);
            out.contraction.push(m.contraction);
            out.stability.push(m.stability);
        }
        Ok(out)
    }
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub struct Path(demo::PathData);

#[wasm_bindgen]
impl Path {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn l2(&self) -> Vec<f64> {
        self.0.l2.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> Vec<f64> {
        self.0.nodes.clone()
    }
    #[wasm_bindgen(getter, js_name = finalState)]
    pub fn final_state(&self) -> Vec<f64> {
        self.0.final_state.clone()
    }
}

#[wasm_bindgen(js_name = simulatePath)]
pub fn simulate_path(alpha: f64, n_cells: usize, tau: f64, n_steps: usize, seed: u32) -> Result<Path, JsValue> {
    demo::path(alpha, n_cells, tau, n_steps, seed as u64).map(Path).map_err(js_err)
}

#[wasm_bindgen]
pub struct Coupling(demo::CouplingData);

#[wasm_bindgen]
impl Coupling {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }
    #[wasm_bindgen(getter, js_name = meanSqDiff)]
    pub fn mean_sq_diff(&self) -> Vec<f64> {
        self.0.mean_sq_diff.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn bound(&self) -> Vec<f64> {
        self.0.bound.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn gamma6(&self) -> f64 {
        self.0.gamma6
    }
    #[wasm_bindgen(getter, js_name = pathwiseViolations)]
    pub fn pathwise_violations(&self) -> usize {
        self.0.pathwise_violations
    }
}

#[wasm_bindgen(js_name = couplingCurve)]
pub fn coupling_curve(
    alpha: f64,
    n_cells: usize,
    tau: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u32,
) -> Result<Coupling, JsValue> {
    demo::coupling(alpha, n_cells, tau, n_steps, n_paths, seed as u64)
        .map(Coupling)
        .map_err(js_err)
}

/// Flat `[alpha_0, contraction_0, stability_0, alpha_1, ...]`.
#[wasm_bindgen(js_name = marginsVsAlpha)]
pub fn margins_vs_alpha(alpha_min: f64, alpha_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    let m = demo::margins(alpha_min, alpha_max, n).map_err(js_err)?;
    Ok((0..m.alphas.len())
        .flat_map(|i| [m.alphas[i], m.contraction[i], m.stability[i]])
        .collect())
}
