//! Crank–Nicolson Galerkin SAV time stepping.
//!
//! With `b = (f(ũ)/√E(ũ), φ_i)`, `ũ = (3uⁿ − uⁿ⁻¹)/2` and
//! `K = 4M + τ²S + τ²λM`, one step solves
//!
//! ```text
//! (K + τ²/2 · b bᵀ) uⁿ⁺¹ = (4M − τ²S − τ²λM) uⁿ + 4τ M vⁿ − 2τ² rⁿ b
//!                          + τ²/2 (bᵀuⁿ) b + 2τ² g(t_{n+½})
//! ```
//!
//! and recovers `vⁿ⁺¹ = 2(uⁿ⁺¹ − uⁿ)/τ − vⁿ`, `rⁿ⁺¹ = rⁿ + ½ bᵀ(uⁿ⁺¹ − uⁿ)`.
//! The energy `√(½(vᵀMv + uᵀSu + λ uᵀMu) + r²)` is then invariant up to the
//! linear-solver residual.

use std::sync::Arc;

use crate::analysis::ritz_projection;
use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::linalg::{dot, solve_rank1, solve_spd, SparseMatrix};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Scalar-auxiliary-variable Crank–Nicolson (energy conserving).
    Sav,
    /// Linearised Crank–Nicolson with an explicit extrapolated nonlinearity.
    Lcn,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sav" => Ok(Self::Sav),
            "lcn" => Ok(Self::Lcn),
            other => Err(Error::Config(format!("unknown scheme '{other}' (expected sav or lcn)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub r: f64,
    /// `uⁿ⁻¹`; absent at step 0.
    pub u_prev: Option<Vec<f64>>,
    pub step: usize,
    pub tau: f64,
}

impl SavState {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.tau
    }

    /// `ũⁿ⁺½ = (3uⁿ − uⁿ⁻¹)/2`, or `u⁰` on the first step.
    pub fn extrapolate(&self) -> Vec<f64> {
        match &self.u_prev {
            Some(prev) => self
                .u
                .iter()
                .zip(prev)
                .map(|(u, p)| 0.5 * (3.0 * u - p))
                .collect(),
            None => self.u.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
}

/// Everything a step needs that does not change between steps.
#[derive(Debug, Clone)]
pub struct StepperContext {
    space: Arc<FeSpace>,
    problem: Problem,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    system: SparseMatrix,
    tau: f64,
    tol: f64,
}

impl StepperContext {
    /// Assembles `M`, `S` and the boundary-eliminated `K`, then checks `K`
    /// by a trial solve.
    pub fn new(space: Arc<FeSpace>, problem: Problem, tau: f64, tol: f64) -> Result<Self> {
        if problem.dim != space.dim() {
            return Err(Error::Config(format!(
                "problem '{}' is {}-dimensional but the space is {}-dimensional",
                problem.name,
                problem.dim,
                space.dim()
            )));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {tau}")));
        }
        if problem.lambda < 0.0 {
            return Err(Error::Config(format!("lambda must be nonnegative, got {}", problem.lambda)));
        }
        let mass = space.assemble_mass();
        let stiffness = space.assemble_stiffness();
        let t2 = tau * tau;
        let k = SparseMatrix::linear_combination(&[(4.0 + t2 * problem.lambda, &mass), (t2, &stiffness)])?;
        let system = space.apply_dirichlet(&k)?;
        system.check_symmetric(1e-14)?;
        let trial: Vec<f64> = (0..system.n()).map(|i| ((i * 7919 % 104729) as f64).sin()).collect();
        solve_spd(&system, &trial, tol)?;
        Ok(Self {
            space,
            problem,
            mass,
            stiffness,
            system,
            tau,
            tol,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Unconstrained mass matrix.
    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    /// Unconstrained stiffness matrix.
    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// `K = 4M + τ²S + τ²λM` with Dirichlet rows/columns eliminated.
    pub fn system(&self) -> &SparseMatrix {
        &self.system
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `E(u) = ∫F(u_h) + c0` on the nonlinear quadrature rule.
    fn sav_energy(&self, u: &[f64]) -> Result<f64> {
        let p = &self.problem;
        let e = self.space.integrate_scalar(u, |s| p.potential(s))? + p.c0;
        if !(e > 0.0) {
            return Err(Error::NonpositiveEnergy(e));
        }
        Ok(e)
    }

    /// Ritz projections of the initial data and `r⁰ = √(∫F(u₀) + c0)`, the
    /// integral taken on the closed-form `u₀` at the nonlinear quadrature
    /// points.
    pub fn init_state(&self) -> Result<SavState> {
        let p = &self.problem;
        let u = ritz_projection(&self.space, &p.u0, self.tol)?.into_coeffs();
        let v = ritz_projection(&self.space, &p.u1, self.tol)?.into_coeffs();
        let e0 = self.space.integrate(|x| p.potential(p.u0.value(x))) + p.c0;
        if !(e0 > 0.0) {
            return Err(Error::NonpositiveEnergy(e0));
        }
        Ok(SavState {
            u,
            v,
            r: e0.sqrt(),
            u_prev: None,
            step: 0,
            tau: self.tau,
        })
    }

    /// Source load `2τ² (g(t), φ_i)` at `t = t_{n+½}`, if any.
    fn source_term(&self, state: &SavState) -> Option<Vec<f64>> {
        self.problem.source.as_ref().map(|g| {
            let t = (state.step as f64 + 0.5) * self.tau;
            let scale = 2.0 * self.tau * self.tau;
            let mut load = self.space.assemble_load(|x| g.value(x, t));
            load.iter_mut().for_each(|l| *l *= scale);
            load
        })
    }

    /// `(4M − τ²S − τ²λM) u + 4τ M v + source`, the part of the right-hand
    /// side shared by both schemes.
    fn linear_rhs(&self, state: &SavState) -> Result<Vec<f64>> {
        let t2 = self.tau * self.tau;
        let mu = self.mass.matvec(&state.u)?;
        let su = self.stiffness.matvec(&state.u)?;
        let mv = self.mass.matvec(&state.v)?;
        let lam = self.problem.lambda;
        let mut rhs: Vec<f64> = (0..mu.len())
            .map(|i| (4.0 - t2 * lam) * mu[i] - t2 * su[i] + 4.0 * self.tau * mv[i])
            .collect();
        if let Some(src) = self.source_term(state) {
            rhs.iter_mut().zip(&src).for_each(|(r, s)| *r += s);
        }
        Ok(rhs)
    }

    fn check_state(&self, state: &SavState) -> Result<()> {
        let n = self.space.n_dofs();
        for len in [state.u.len(), state.v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(())
    }

    fn advance(&self, state: &SavState, u_new: Vec<f64>, r_new: f64) -> SavState {
        let v_new = u_new
            .iter()
            .zip(&state.u)
            .zip(&state.v)
            .map(|((un, u), v)| 2.0 / self.tau * (un - u) - v)
            .collect();
        SavState {
            u: u_new,
            v: v_new,
            r: r_new,
            u_prev: Some(state.u.clone()),
            step: state.step + 1,
            tau: self.tau,
        }
    }

    /// SAV vector `b_i = ∫ f(ũ)/√E(ũ) φ_i` at the extrapolated state.
    pub fn sav_vector(&self, state: &SavState) -> Result<Vec<f64>> {
        let tilde = state.extrapolate();
        let inv_sqrt_e = 1.0 / self.sav_energy(&tilde)?.sqrt();
        let p = &self.problem;
        self.space
            .assemble_nonlinear_vector(&tilde, |s| p.force(s) * inv_sqrt_e)
    }

    /// One step of the SAV scheme.
    pub fn sav_step(&self, state: &SavState) -> Result<SavState> {
        self.check_state(state)?;
        let t2 = self.tau * self.tau;
        let b = self.sav_vector(state)?;
        let mut rhs = self.linear_rhs(state)?;
        let bu = dot(&b, &state.u);
        for (ri, bi) in rhs.iter_mut().zip(&b) {
            *ri += (-2.0 * t2 * state.r + 0.5 * t2 * bu) * bi;
        }
        self.space.zero_boundary(&mut rhs);
        let u_new = solve_rank1(&self.system, &b, 0.5 * t2, &rhs, self.tol)?;
        let du: Vec<f64> = u_new.iter().zip(&state.u).map(|(a, b)| a - b).collect();
        let r_new = state.r + 0.5 * dot(&b, &du);
        Ok(self.advance(state, u_new, r_new))
    }

    /// One step of the linearised Crank–Nicolson baseline. The returned `r`
    /// is `√(∫F(uⁿ⁺¹) + c0)`, kept only for energy reporting.
    pub fn lcn_step(&self, state: &SavState) -> Result<SavState> {
        self.check_state(state)?;
        let t2 = self.tau * self.tau;
        let tilde = state.extrapolate();
        let p = &self.problem;
        let bf = self.space.assemble_nonlinear_vector(&tilde, |s| p.force(s))?;
        let mut rhs = self.linear_rhs(state)?;
        for (ri, bi) in rhs.iter_mut().zip(&bf) {
            *ri -= 2.0 * t2 * bi;
        }
        self.space.zero_boundary(&mut rhs);
        let u_new = solve_spd(&self.system, &rhs, self.tol)?;
        let r_new = self.sav_energy(&u_new)?.sqrt();
        Ok(self.advance(state, u_new, r_new))
    }

    pub fn step(&self, scheme: Scheme, state: &SavState) -> Result<SavState> {
        match scheme {
            Scheme::Sav => self.sav_step(state),
            Scheme::Lcn => self.lcn_step(state),
        }
    }

    /// `√(½(vᵀMv + uᵀSu + λ uᵀMu) + r²)` with unconstrained matrices.
    pub fn discrete_energy(&self, state: &SavState) -> Result<f64> {
        let vmv = self.mass.bilinear(&state.v, &state.v)?;
        let usu = self.stiffness.bilinear(&state.u, &state.u)?;
        let umu = if self.problem.lambda != 0.0 {
            self.mass.bilinear(&state.u, &state.u)?
        } else {
            0.0
        };
        Ok((0.5 * (vmv + usu + self.problem.lambda * umu) + state.r * state.r).sqrt())
    }

    /// Starting state for `scheme`. For LCN, `r⁰` is recomputed from the
    /// discrete `u⁰` so the reported energy uses one definition throughout.
    pub fn initial_state(&self, scheme: Scheme) -> Result<SavState> {
        let mut state = self.init_state()?;
        if scheme == Scheme::Lcn {
            state.r = self.sav_energy(&state.u)?.sqrt();
        }
        Ok(state)
    }

    /// Advances `state` by `n_steps`, optionally recording the energy after
    /// every step (the trace then has `n_steps + 1` entries).
    pub fn run_from(
        &self,
        scheme: Scheme,
        mut state: SavState,
        n_steps: usize,
        record_energy: bool,
    ) -> Result<(SavState, Vec<EnergyRecord>)> {
        if n_steps == 0 {
            return Err(Error::Config("number of steps must be at least 1".into()));
        }
        let mut trace = Vec::new();
        let record = |s: &SavState, trace: &mut Vec<EnergyRecord>| -> Result<()> {
            if record_energy {
                trace.push(EnergyRecord {
                    step: s.step,
                    time: s.time(),
                    energy: self.discrete_energy(s)?,
                });
            }
            Ok(())
        };
        record(&state, &mut trace)?;
        for _ in 0..n_steps {
            state = self.step(scheme, &state)?;
            record(&state, &mut trace)?;
        }
        Ok((state, trace))
    }

    /// Runs `n_steps` from the initial data.
    pub fn run(&self, scheme: Scheme, n_steps: usize, record_energy: bool) -> Result<(SavState, Vec<EnergyRecord>)> {
        let state = self.initial_state(scheme)?;
        self.run_from(scheme, state, n_steps, record_energy)
    }
}

/// Largest `|Eⁿ − E⁰| / E⁰` over a trace.
pub fn max_relative_drift(trace: &[EnergyRecord]) -> f64 {
    let Some(first) = trace.first() else {
        return 0.0;
    };
    trace
        .iter()
        .map(|r| ((r.energy - first.energy) / first.energy).abs())
        .fold(0.0, f64::max)
}
