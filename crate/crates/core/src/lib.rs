//! Solvers for multistage stochastic variational inequalities on finite
//! probability spaces.
//!
//! Given a finite sample space, a filtration of refining partitions, pointwise
//! convex constraint sets `C(w)` and a monotone Lipschitz operator `F`, the
//! problem is to find a nonanticipative `x* ∈ C ∩ N` with
//! `<F(x*), x - x*>_{L²} >= 0` for every `x ∈ C ∩ N`.
//!
//! Two solvers are provided:
//!
//! - [`pc_admm`]: an explicit prediction-correction ADMM. Every step is a
//!   closed-form projection or a conditional expectation.
//! - [`pha`]: progressive hedging, which solves a strongly monotone VI at
//!   every atom per iteration.
//!
//! [`problems`] generates the random affine and random-walk control
//! families, [`problem_file`] reads and writes them as JSON, and [`bench`]
//! runs repeated trials and writes CSV traces.
//!
//! ```
//! use msvi::{gen_random_affine, pc_admm, PcAdmmParams};
//!
//! let inst = gen_random_affine(4, 2, 2, 1).unwrap();
//! let problem = inst.msvi();
//! let params = PcAdmmParams { eps: 1e-6, ..PcAdmmParams::for_lipschitz(inst.operator_lipschitz(), 1.1) };
//! let start = pc_admm::default_start(&problem).unwrap();
//! let report = pc_admm::solve(&problem, &params, &start).unwrap();
//! assert!(report.converged());
//! ```

pub mod bench;
pub mod convex_sets;
pub mod error;
pub mod filtration;
mod linalg;
pub mod operators;
pub mod pc_admm;
pub mod pha;
pub mod prob_space;
pub mod problem_file;
pub mod problems;
pub mod report;

pub use convex_sets::{project_point, ConvexSet, PointwiseSet, SetProduct};
pub use error::{Error, Result};
pub use filtration::Filtration;
pub use operators::{lipschitz_estimate, msvi_residual, AffineOperator, MonotoneOperator, PointwiseMap};
pub use pc_admm::{g_norm, GMetric, PcAdmmParams, Triplet};
pub use pha::PhaParams;
pub use prob_space::{conditional_expectation, l2_distance, l2_inner, l2_norm, Partition, RandomVector, SampleSpace};
pub use problem_file::{load_problem, save_problem};
pub use problems::{gen_random_affine, gen_random_walk_socp, GeneratorSpec, Msvi, ProblemInstance};
pub use report::{Algorithm, IterationRecord, SolverReport, Status};
