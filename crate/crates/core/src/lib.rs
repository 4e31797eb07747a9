//! Finite element discretization and drift-implicit time stepping for
//! parabolic SPDEs with monotone drift on the unit interval,
//!
//! ```text
//! dX = (ΔX + f(X)) dt + g(X) dW,   X = 0 on {0, 1},
//! ```
//!
//! with tools for ergodicity and strong convergence experiments.
//!
//! ```
//! use monospde::{problem::allen_cahn_spec, FemSpace, Integrator, QWienerSpec, Scheme, SolverConfig};
//!
//! let space = FemSpace::build(32).unwrap();
//! let problem = allen_cahn_spec(1.0, 0.0, 0.0).unwrap();
//! let noise = QWienerSpec::smooth(31).unwrap();
//! let integ = Integrator::new(&space, &problem, &noise, Scheme::Dieg, 0.01, SolverConfig::default()).unwrap();
//! let x0 = integ.initial_state();
//! let (x1, report) = integ.step(&x0, &vec![0.0; 31]).unwrap();
//! assert!(report.newton_iters <= 6);
//! assert!(space.l2_norm(&x1) < space.l2_norm(&x0));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
pub mod ergodicity;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod noise;
pub mod observable;
pub mod parallel;
pub mod polynomial;
pub mod problem;
pub mod report;
pub mod rng;
pub mod schemes;
pub mod stats;

pub use error::{Error, Result};
pub use fem::{FemSpace, FemVector, Norms};
pub use noise::{NoisePath, NoiseSource, QWienerSpec, StreamedNoise};
pub use observable::Observable;
pub use problem::{ConstantsLedger, DiffusionSpec, DriftSpec, InitialCondition, ProblemSpec};
pub use schemes::{Integrator, Scheme, SolverConfig};
