//! Linearly implicit, energy-conserving finite element solver for nonlinear
//! wave equations `u_tt = Δu − λu − F'(u) + g`.
//!
//! The time integrator is a Crank–Nicolson Galerkin discretisation of the
//! scalar-auxiliary-variable (SAV) reformulation: each step costs two SPD
//! solves with a fixed matrix, and the discrete energy
//! `√(½(‖v‖² + ‖∇u‖² + λ‖u‖²) + r²)` is preserved to solver precision for
//! any time step.
//!
//! Module map:
//! - [`mesh`]: structured simplicial meshes of the unit square and cube.
//! - [`element`]: Lagrange P1/P2 reference elements and simplex quadrature.
//! - [`fem`]: degree-of-freedom layout, assembly, evaluation.
//! - [`linalg`]: CSR matrices, preconditioned CG, rank-1 (Sherman–Morrison) solves.
//! - [`problems`]: the Klein–Gordon and sine–Gordon manufactured problems.
//! - [`sav`]: the SAV stepper and the linearised Crank–Nicolson baseline.
//! - [`analysis`]: Ritz projection, error norms, convergence studies.
//! - [`cli`]: command-line driver writing CSV artifacts.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod element;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod sav;

pub use analysis::{convergence_order, convergence_study, ErrorReport, NRule};
pub use element::{QuadratureRule, ReferenceElement};
pub use error::{Error, Result};
pub use fem::{BoundaryKind, FeFunction, FeSpace};
pub use linalg::SparseMatrix;
pub use mesh::Mesh;
pub use problems::{Field, Problem, TimeField};
pub use sav::{EnergyRecord, SavState, Scheme, StepperContext};

/// Solver tolerance used unless the caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-12;
