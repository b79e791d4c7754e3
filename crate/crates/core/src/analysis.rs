//! Ritz projection, error norms and convergence studies.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{BoundaryKind, FeFunction, FeSpace};
use crate::linalg::{solve_spd, SparseMatrix};
use crate::mesh::Mesh;
use crate::problems::{Field, Problem};
use crate::sav::{Scheme, StepperContext};

/// Largest boundary value tolerated for a Dirichlet Ritz target.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Stiffness-orthogonal projection: `(∇(target − R_h target), ∇w) = 0` for
/// all `w` in the space.
///
/// Dirichlet spaces pin boundary dofs to zero and require the target to
/// vanish there. Periodic spaces fix the free constant by matching the mean
/// of the target.
pub fn ritz_projection(space: &Arc<FeSpace>, target: &Field, tol: f64) -> Result<FeFunction> {
    let dim = space.dim();
    if space.boundary_kind() == BoundaryKind::Dirichlet {
        for &i in space.boundary_dofs() {
            let x = space.dof_coord(i);
            let value = target.value(x);
            if !(value.abs() <= BOUNDARY_TOL) {
                return Err(Error::NonvanishingBoundary {
                    point: x.to_vec(),
                    value,
                });
            }
        }
    }

    let mut load = vec![0.0; space.n_dofs()];
    space.for_each_point_with_gradients(|qp, grads| {
        let g = target.gradient(&qp.x[..dim]);
        for (&i, gi) in qp.dofs.iter().zip(grads) {
            let dotp: f64 = (0..dim).map(|a| g[a] * gi[a]).sum();
            load[i] += qp.weight * dotp;
        }
    });

    let stiffness = space.assemble_stiffness();
    let coeffs = match space.boundary_kind() {
        BoundaryKind::Dirichlet => {
            space.zero_boundary(&mut load);
            let k = space.apply_dirichlet(&stiffness)?;
            solve_spd(&k, &load, tol)?
        }
        BoundaryKind::Periodic => {
            // Remove the (rounding-level) component along the kernel so the
            // singular system is consistent.
            let mean = load.iter().sum::<f64>() / load.len() as f64;
            load.iter_mut().for_each(|l| *l -= mean);
            let mut c = solve_spd(&stiffness, &load, tol)?;
            let mass_row_sums = space.assemble_mass().matvec(&vec![1.0; space.n_dofs()])?;
            let current: f64 = c.iter().zip(&mass_row_sums).map(|(a, b)| a * b).sum();
            let shift = (space.integrate(|x| target.value(x)) - current) / mass_row_sums.iter().sum::<f64>();
            c.iter_mut().for_each(|ci| *ci += shift);
            c
        }
    };
    FeFunction::new(space.clone(), coeffs)
}

/// `‖u_h − target‖_{L²}` on the `2k + 2` rule.
pub fn l2_error(space: &FeSpace, coeffs: &[f64], target: &Field) -> Result<f64> {
    check_len(space, coeffs)?;
    let dim = space.dim();
    let mut acc = 0.0;
    space.for_each_point(|qp| {
        let uh: f64 = qp.dofs.iter().zip(qp.values).map(|(&i, &p)| coeffs[i] * p).sum();
        let d = uh - target.value(&qp.x[..dim]);
        acc += qp.weight * d * d;
    });
    Ok(acc.sqrt())
}

/// Full `‖u_h − target‖_{H¹}` (L² part plus gradient seminorm).
pub fn h1_error(space: &FeSpace, coeffs: &[f64], target: &Field) -> Result<f64> {
    check_len(space, coeffs)?;
    let dim = space.dim();
    let mut acc = 0.0;
    space.for_each_point_with_gradients(|qp, grads| {
        let x = &qp.x[..dim];
        let mut uh = 0.0;
        let mut guh = [0.0; 3];
        for ((&i, &p), g) in qp.dofs.iter().zip(qp.values).zip(grads) {
            uh += coeffs[i] * p;
            for a in 0..dim {
                guh[a] += coeffs[i] * g[a];
            }
        }
        let gt = target.gradient(x);
        let d = uh - target.value(x);
        let dg: f64 = (0..dim).map(|a| (guh[a] - gt[a]).powi(2)).sum();
        acc += qp.weight * (d * d + dg);
    });
    Ok(acc.sqrt())
}

/// `√((a−b)ᵀ(M+S)(a−b))`.
pub fn h1_norm_diff(a: &FeFunction, b: &FeFunction) -> Result<f64> {
    if !Arc::ptr_eq(a.space(), b.space()) {
        return Err(Error::SpaceMismatch);
    }
    let space = a.space();
    h1_norm_diff_with(&space.assemble_mass(), &space.assemble_stiffness(), a.coeffs(), b.coeffs())
}

/// [`h1_norm_diff`] with pre-assembled unconstrained matrices.
pub fn h1_norm_diff_with(mass: &SparseMatrix, stiffness: &SparseMatrix, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let q = mass.bilinear(&d, &d)? + stiffness.bilinear(&d, &d)?;
    Ok(q.max(0.0).sqrt())
}

fn check_len(space: &FeSpace, coeffs: &[f64]) -> Result<()> {
    if coeffs.len() != space.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: space.n_dofs(),
            found: coeffs.len(),
        });
    }
    Ok(())
}

/// Observed order `log(coarse/fine) / log(ratio)`.
pub fn convergence_order(coarse_err: f64, fine_err: f64, ratio: f64) -> Result<f64> {
    if !(coarse_err > 0.0 && fine_err > 0.0 && ratio > 1.0) {
        return Err(Error::InvalidInput(format!(
            "convergence order needs positive errors and ratio > 1, got ({coarse_err}, {fine_err}, {ratio})"
        )));
    }
    Ok((coarse_err / fine_err).ln() / ratio.ln())
}

/// How the number of time steps follows the number of subdivisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NRule {
    /// `N = M`.
    EqM,
    /// `N = ⌈M^{3/2}⌉`.
    EqM32,
}

impl NRule {
    pub fn steps(self, m: usize) -> usize {
        match self {
            Self::EqM => m,
            Self::EqM32 => {
                let cube = (m as u128).pow(3);
                let mut n = (cube as f64).sqrt() as u128;
                while n * n > cube {
                    n -= 1;
                }
                while n * n < cube {
                    n += 1;
                }
                n as usize
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EqM => "eq-m",
            Self::EqM32 => "eq-m-3/2",
        }
    }
}

impl std::str::FromStr for NRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq-m" => Ok(Self::EqM),
            "eq-m-3/2" => Ok(Self::EqM32),
            other => Err(Error::Config(format!(
                "unknown n-rule '{other}' (expected eq-m or eq-m-3/2)"
            ))),
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub m: usize,
    pub n_steps: usize,
    pub h: f64,
    pub tau: f64,
    /// `‖u(T) − u_h^N‖_{L²}`.
    pub l2_error: f64,
    /// `‖R_h u(T) − u_h^N‖_{H¹}`.
    pub h1_superclose: f64,
    /// `‖u(T) − u_h^N‖_{H¹}`, the plain (non-superclose) error.
    pub h1_error: f64,
    pub l2_order: Option<f64>,
    pub h1_order: Option<f64>,
    pub h1_error_order: Option<f64>,
}

/// Errors of a single SAV run to `t_final` against the exact solution.
pub fn error_report(problem: &Problem, degree: usize, m: usize, n_steps: usize, t_final: f64, tol: f64) -> Result<ErrorReport> {
    let exact = problem.exact.as_ref().ok_or_else(|| {
        Error::Config(format!("problem '{}' has no exact solution", problem.name))
    })?;
    if n_steps == 0 {
        return Err(Error::Config("number of steps must be at least 1".into()));
    }
    let mesh = Arc::new(Mesh::uniform(problem.dim, m)?);
    let space = Arc::new(FeSpace::new(mesh.clone(), degree, problem.bc)?);
    let tau = t_final / n_steps as f64;
    let ctx = StepperContext::new(space.clone(), problem.clone(), tau, tol)?;
    let (state, _) = ctx.run(Scheme::Sav, n_steps, false)?;
    let u_t = exact.at(n_steps as f64 * tau);
    let ritz = ritz_projection(&space, &u_t, tol)?;
    Ok(ErrorReport {
        m,
        n_steps,
        h: mesh.mesh_size(),
        tau,
        l2_error: l2_error(&space, &state.u, &u_t)?,
        h1_superclose: h1_norm_diff_with(ctx.mass(), ctx.stiffness(), ritz.coeffs(), &state.u)?,
        h1_error: h1_error(&space, &state.u, &u_t)?,
        l2_order: None,
        h1_order: None,
        h1_error_order: None,
    })
}

/// Runs the SAV scheme for every `M` in `m_list` (in parallel) and fills the
/// order columns from consecutive rows.
pub fn convergence_study(
    problem: &Problem,
    degree: usize,
    m_list: &[usize],
    n_rule: NRule,
    t_final: f64,
    tol: f64,
) -> Result<Vec<ErrorReport>> {
    if m_list.is_empty() {
        return Err(Error::Config("m list is empty".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("m list must be strictly increasing".into()));
    }
    if problem.exact.is_none() {
        return Err(Error::Config(format!("problem '{}' has no exact solution", problem.name)));
    }
    let mut rows = m_list
        .par_iter()
        .map(|&m| error_report(problem, degree, m, n_rule.steps(m), t_final, tol))
        .collect::<Result<Vec<_>>>()?;
    fill_orders(&mut rows)?;
    Ok(rows)
}

/// Fills the order columns of rows `1..` from their predecessors.
pub fn fill_orders(rows: &mut [ErrorReport]) -> Result<()> {
    for i in 1..rows.len() {
        let ratio = rows[i - 1].h / rows[i].h;
        let (prev, cur) = (rows[i - 1].clone(), &mut rows[i]);
        cur.l2_order = Some(convergence_order(prev.l2_error, cur.l2_error, ratio)?);
        cur.h1_order = Some(convergence_order(prev.h1_superclose, cur.h1_superclose, ratio)?);
        cur.h1_error_order = Some(convergence_order(prev.h1_error, cur.h1_error, ratio)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dim: usize, m: usize, degree: usize, bc: BoundaryKind) -> Arc<FeSpace> {
        Arc::new(FeSpace::new(Arc::new(Mesh::uniform(dim, m).unwrap()), degree, bc).unwrap())
    }

    #[test]
    fn order_examples() {
        let o = convergence_order(4.54e-4, 1.11e-4, 2.0).unwrap();
        assert!((o - 2.03).abs() < 5e-3);
        assert_eq!(convergence_order(0.3, 0.3, 1.7).unwrap(), 0.0);
        assert!((convergence_order(8e-3, 1e-3, 2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(convergence_order(0.0, 1.0, 2.0).is_err());
        assert!(convergence_order(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn n_rule_rounds_up() {
        assert_eq!(NRule::EqM32.steps(8), 23);
        assert_eq!(NRule::EqM32.steps(16), 64);
        assert_eq!(NRule::EqM32.steps(24), 118);
        assert_eq!(NRule::EqM.steps(24), 24);
        assert_eq!("eq-m-3/2".parse::<NRule>().unwrap(), NRule::EqM32);
    }

    #[test]
    fn ritz_of_zero_is_zero() {
        let s = space(2, 4, 2, BoundaryKind::Dirichlet);
        let r = ritz_projection(&s, &Field::zero(), 1e-12).unwrap();
        assert!(r.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn ritz_rejects_nonvanishing_boundary() {
        let s = space(2, 4, 1, BoundaryKind::Dirichlet);
        let f = Field::new(|x| x[0] + 1.0);
        assert!(matches!(
            ritz_projection(&s, &f, 1e-12),
            Err(Error::NonvanishingBoundary { .. })
        ));
    }

    #[test]
    fn periodic_ritz_reproduces_space_member() {
        let s = space(2, 4, 1, BoundaryKind::Periodic);
        let coeffs: Vec<f64> = (0..s.n_dofs()).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let f = FeFunction::new(s.clone(), coeffs.clone()).unwrap();
        let target = Field::new(move |x| f.evaluate(x).unwrap());
        let r = ritz_projection(&s, &target, 1e-13).unwrap();
        // FD gradients of a piecewise-linear target are exact away from kinks.
        for (a, b) in r.coeffs().iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn l2_error_cases() {
        let s = space(2, 3, 2, BoundaryKind::Dirichlet);
        let target = Field::new(|x| x[0] * x[1] + x[1] * x[1]);
        let u = s.interpolate(|x| target.value(x));
        assert!(l2_error(&s, &u, &target).unwrap() < 1e-12);
        let zero = vec![0.0; s.n_dofs()];
        assert!((l2_error(&s, &zero, &Field::new(|_| 1.0)).unwrap() - 1.0).abs() < 1e-13);
        let s = space(2, 16, 1, BoundaryKind::Dirichlet);
        let zero = vec![0.0; s.n_dofs()];
        let sines = Field::new(|x| (2.0 * std::f64::consts::PI * x[0]).sin() * (2.0 * std::f64::consts::PI * x[1]).sin());
        assert!((l2_error(&s, &zero, &sines).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn h1_norm_diff_cases() {
        let s = space(2, 3, 1, BoundaryKind::Dirichlet);
        let a = FeFunction::new(s.clone(), vec![1.0; s.n_dofs()]).unwrap();
        let z = FeFunction::zero(s.clone());
        assert_eq!(h1_norm_diff(&a, &a).unwrap(), 0.0);
        assert!((h1_norm_diff(&a, &z).unwrap() - 1.0).abs() < 1e-13);
        let other = FeFunction::zero(space(2, 3, 1, BoundaryKind::Dirichlet));
        assert!(matches!(h1_norm_diff(&a, &other), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn study_rejects_bad_lists() {
        let p = crate::problems::klein_gordon_2d();
        assert!(convergence_study(&p, 1, &[8, 4], NRule::EqM, 1.0, 1e-12).is_err());
        assert!(convergence_study(&p, 1, &[], NRule::EqM, 1.0, 1e-12).is_err());
        let c = p.conservation_variant();
        assert!(matches!(
            convergence_study(&c, 1, &[4], NRule::EqM, 1.0, 1e-12),
            Err(Error::Config(_))
        ));
    }
}
