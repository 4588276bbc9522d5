//! Variational time stepping of 1+1-dimensional periodic initial value
//! problems with a truncated Fourier ansatz.
//!
//! Three execution paths share one problem description: classical finite
//! differences (the reference), exact state-vector products (SVF), and
//! finite-shot sampled products (SEF). The crate covers the advection
//! equation (implicit Crank-Nicolson), the first-order wave system and the
//! viscous Burgers equation (both Heun's method of lines), together with the
//! L1 convergence and self-convergence analysis across resolutions.

pub mod analysis;
pub mod ansatz;
pub mod classical;
pub mod cost;
pub mod engine;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod optim;
pub mod rhs;

pub use analysis::{
    convergence_factors, exact_advection, exact_wave, inject, l1_norm, self_convergence_factors,
    ConvergenceReport,
};
pub use ansatz::ParamVector;
pub use classical::{cn_advection_step, evolve_classical, rk2_step, FieldSet};
pub use cost::{
    cf_cn_advection, cf_cn_generic, cf_rk2a, cf_rk2b, CostContext, CostFunction, Stage,
};
pub use engine::{product_exact, product_fast, sef_sample, Engine, EngineMode, ProductRequest};
pub use error::{Error, Result};
pub use evolve::{
    evolve_vqa, initial_fields, vqa_step_cn, vqa_step_rk2, Problem, ProblemKind, Snapshot,
    StepStats, Trajectory,
};
pub use grid::{build_domain, wrap_index, Domain};
pub use optim::{nelder_mead, OptResult, SimplexOptions};
pub use rhs::{
    apply_rhs, rhs_spec_advection, rhs_spec_burgers, rhs_spec_wave, Field, RhsSpec, RhsTerm,
};
