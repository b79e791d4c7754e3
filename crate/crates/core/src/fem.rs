//! Lagrange finite element spaces over a [`Mesh`] and global assembly.
//!
//! Dofs of a degree-`k` space sit on the lattice of spacing `1/(kM)`: every
//! lattice point is a vertex or (for P2) the midpoint of a Kuhn edge, so dofs
//! are numbered lexicographically on that lattice with `x` fastest. Periodic
//! spaces wrap lattice index `kM` onto 0 in each axis.

use std::sync::Arc;

use crate::element::{simplex_edges, QuadratureRule, ReferenceElement, Tabulation};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::{determinant, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Homogeneous Dirichlet data, enforced by symmetric elimination.
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone)]
struct ElementGeometry {
    origin: [f64; 3],
    jacobian: [[f64; 3]; 3],
    inv_jt: [[f64; 3]; 3],
    det: f64,
}

impl ElementGeometry {
    fn map(&self, xi: &[f64; 3], dim: usize) -> [f64; 3] {
        let mut x = self.origin;
        for r in 0..dim {
            for k in 0..dim {
                x[r] += self.jacobian[r][k] * xi[k];
            }
        }
        x
    }

    fn physical_gradient(&self, g: &[f64; 3], dim: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for r in 0..dim {
            for k in 0..dim {
                out[r] += self.inv_jt[r][k] * g[k];
            }
        }
        out
    }
}

fn inverse_transpose(a: &[[f64; 3]; 3], dim: usize) -> [[f64; 3]; 3] {
    let det = determinant(a, dim);
    let mut inv = [[0.0; 3]; 3];
    if dim == 2 {
        inv[0][0] = a[1][1] / det;
        inv[0][1] = -a[0][1] / det;
        inv[1][0] = -a[1][0] / det;
        inv[1][1] = a[0][0] / det;
    } else {
        for i in 0..3 {
            for j in 0..3 {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                // cofactor of a[j][i] gives inv[i][j]
                inv[i][j] = (a[j1][i1] * a[j2][i2] - a[j1][i2] * a[j2][i1]) / det;
            }
        }
    }
    let mut t = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            t[i][j] = inv[j][i];
        }
    }
    t
}

/// One quadrature point on one element, in physical coordinates.
pub(crate) struct QuadPoint<'a> {
    pub x: [f64; 3],
    /// Weight times the Jacobian determinant.
    pub weight: f64,
    pub values: &'a [f64],
    pub dofs: &'a [usize],
}

/// Continuous Lagrange space of degree 1 or 2.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    reference: ReferenceElement,
    bc: BoundaryKind,
    n_dofs: usize,
    elem_to_dof: Vec<usize>,
    dof_coords: Vec<f64>,
    boundary: Vec<bool>,
    boundary_dofs: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    bilinear_rule: QuadratureRule,
    bilinear_tab: Tabulation,
    nonlinear_rule: QuadratureRule,
    nonlinear_tab: Tabulation,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize, bc: BoundaryKind) -> Result<Self> {
        let dim = mesh.dim();
        let reference = ReferenceElement::new(dim, degree)?;
        let m = mesh.subdivisions();
        if bc == BoundaryKind::Periodic && m < 2 {
            return Err(Error::InvalidInput(
                "periodic spaces need at least 2 subdivisions per axis".into(),
            ));
        }
        let lattice = degree * m;
        let (per_axis, wrap) = match bc {
            BoundaryKind::Dirichlet => (lattice + 1, false),
            BoundaryKind::Periodic => (lattice, true),
        };
        let n_dofs = per_axis.pow(dim as u32);
        let index_of = |p: [usize; 3]| -> usize {
            (0..dim).rev().fold(0, |acc, a| {
                let c = if wrap { p[a] % lattice } else { p[a] };
                acc * per_axis + c
            })
        };

        let n_local = reference.local_dof_count();
        let mut elem_to_dof = Vec::with_capacity(mesh.n_elements() * n_local);
        let mut geometry = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let verts = mesh.element(e);
            let lat: Vec<[usize; 3]> = verts
                .iter()
                .map(|&v| {
                    let mut p = mesh.node_lattice(v);
                    p.iter_mut().for_each(|c| *c *= degree);
                    p
                })
                .collect();
            elem_to_dof.extend(lat.iter().map(|&p| index_of(p)));
            if degree == 2 {
                for &(i, j) in simplex_edges(dim) {
                    let mut p = [0; 3];
                    for a in 0..3 {
                        p[a] = (lat[i][a] + lat[j][a]) / 2;
                    }
                    elem_to_dof.push(index_of(p));
                }
            }
            let jacobian = mesh.jacobian(e);
            let mut origin = [0.0; 3];
            origin[..dim].copy_from_slice(mesh.node(verts[0]));
            geometry.push(ElementGeometry {
                origin,
                jacobian,
                inv_jt: inverse_transpose(&jacobian, dim),
                det: determinant(&jacobian, dim),
            });
        }

        let mut dof_coords = Vec::with_capacity(n_dofs * dim);
        let mut boundary = Vec::with_capacity(n_dofs);
        for idx in 0..n_dofs {
            let mut rest = idx;
            let mut on_boundary = false;
            for _ in 0..dim {
                let c = rest % per_axis;
                rest /= per_axis;
                dof_coords.push(c as f64 / lattice as f64);
                on_boundary |= !wrap && (c == 0 || c == lattice);
            }
            boundary.push(on_boundary);
        }
        let boundary_dofs = (0..n_dofs).filter(|&i| boundary[i]).collect();

        let bilinear_rule = QuadratureRule::new(dim, 2 * degree)?;
        let bilinear_tab = reference.tabulate(&bilinear_rule);
        let nonlinear_rule = QuadratureRule::new(dim, 2 * degree + 2)?;
        let nonlinear_tab = reference.tabulate(&nonlinear_rule);

        Ok(Self {
            mesh,
            reference,
            bc,
            n_dofs,
            elem_to_dof,
            dof_coords,
            boundary,
            boundary_dofs,
            geometry,
            bilinear_rule,
            bilinear_tab,
            nonlinear_rule,
            nonlinear_tab,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.reference.degree()
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn boundary_kind(&self) -> BoundaryKind {
        self.bc
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let k = self.reference.local_dof_count();
        &self.elem_to_dof[e * k..(e + 1) * k]
    }

    pub fn dof_coord(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.dof_coords[i * d..(i + 1) * d]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// Per-dof Dirichlet flag (all false for periodic spaces).
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Rule used for integrals of the nonlinearity, sources and errors
    /// (exact degree `2k + 2`).
    pub fn nonlinear_rule(&self) -> &QuadratureRule {
        &self.nonlinear_rule
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.n_dofs).map(|i| f(self.dof_coord(i))).collect()
    }

    /// Zeroes the Dirichlet entries of a load vector in place.
    pub fn zero_boundary(&self, v: &mut [f64]) {
        for &i in &self.boundary_dofs {
            v[i] = 0.0;
        }
    }

    /// Replaces Dirichlet rows/columns of `a` by the identity.
    pub fn apply_dirichlet(&self, a: &SparseMatrix) -> Result<SparseMatrix> {
        a.eliminate(&self.boundary)
    }

    fn pattern(&self) -> Vec<Vec<usize>> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); self.n_dofs];
        for e in 0..self.mesh.n_elements() {
            let dofs = self.element_dofs(e);
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        rows
    }

    fn assemble_bilinear(&self, stiffness: bool) -> SparseMatrix {
        let dim = self.dim();
        let n_local = self.reference.local_dof_count();
        let tab = &self.bilinear_tab;
        let mut mat = SparseMatrix::from_pattern(self.pattern());
        let mut local = vec![0.0; n_local * n_local];
        let mut grads = vec![[0.0; 3]; n_local];
        for (e, geo) in self.geometry.iter().enumerate() {
            local.iter_mut().for_each(|x| *x = 0.0);
            for q in 0..tab.n_points {
                let w = self.bilinear_rule.weights[q] * geo.det;
                if stiffness {
                    for (g, rg) in grads.iter_mut().zip(tab.grads_at(q)) {
                        *g = geo.physical_gradient(rg, dim);
                    }
                    for a in 0..n_local {
                        for b in 0..n_local {
                            let gg: f64 = (0..dim).map(|r| grads[a][r] * grads[b][r]).sum();
                            local[a * n_local + b] += w * gg;
                        }
                    }
                } else {
                    let vals = tab.values_at(q);
                    for a in 0..n_local {
                        for b in 0..n_local {
                            local[a * n_local + b] += w * vals[a] * vals[b];
                        }
                    }
                }
            }
            let dofs = self.element_dofs(e);
            for a in 0..n_local {
                for b in 0..n_local {
                    // upper triangle mirrored so the result is exactly symmetric
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    mat.add_to(dofs[a], dofs[b], local[lo * n_local + hi]);
                }
            }
        }
        mat
    }

    /// Unconstrained mass matrix `M_ij = ∫ φ_i φ_j`.
    pub fn assemble_mass(&self) -> SparseMatrix {
        self.assemble_bilinear(false)
    }

    /// Unconstrained stiffness matrix `S_ij = ∫ ∇φ_i · ∇φ_j`.
    pub fn assemble_stiffness(&self) -> SparseMatrix {
        self.assemble_bilinear(true)
    }

    /// Visits every point of the `2k + 2` rule on every element.
    pub(crate) fn for_each_point(&self, mut visit: impl FnMut(&QuadPoint<'_>)) {
        let dim = self.dim();
        let tab = &self.nonlinear_tab;
        for (e, geo) in self.geometry.iter().enumerate() {
            let dofs = self.element_dofs(e);
            for q in 0..tab.n_points {
                let xi = self.nonlinear_rule.reference_point(q);
                visit(&QuadPoint {
                    x: geo.map(&xi, dim),
                    weight: self.nonlinear_rule.weights[q] * geo.det,
                    values: tab.values_at(q),
                    dofs,
                });
            }
        }
    }

    /// Like [`FeSpace::for_each_point`], also passing physical basis
    /// gradients.
    pub(crate) fn for_each_point_with_gradients(
        &self,
        mut visit: impl FnMut(&QuadPoint<'_>, &[[f64; 3]]),
    ) {
        let dim = self.dim();
        let tab = &self.nonlinear_tab;
        let mut grads = vec![[0.0; 3]; tab.n_local];
        for (e, geo) in self.geometry.iter().enumerate() {
            let dofs = self.element_dofs(e);
            for q in 0..tab.n_points {
                let xi = self.nonlinear_rule.reference_point(q);
                for (g, rg) in grads.iter_mut().zip(tab.grads_at(q)) {
                    *g = geo.physical_gradient(rg, dim);
                }
                let qp = QuadPoint {
                    x: geo.map(&xi, dim),
                    weight: self.nonlinear_rule.weights[q] * geo.det,
                    values: tab.values_at(q),
                    dofs,
                };
                visit(&qp, &grads);
            }
        }
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_dofs {
            return Err(Error::DimensionMismatch {
                expected: self.n_dofs,
                found: coeffs.len(),
            });
        }
        Ok(())
    }

    /// `b_i = ∫ pointwise(u_h(x)) φ_i(x) dx` with Dirichlet entries zeroed.
    pub fn assemble_nonlinear_vector(
        &self,
        coeffs: &[f64],
        pointwise: impl Fn(f64) -> f64,
    ) -> Result<Vec<f64>> {
        self.check_len(coeffs)?;
        let mut out = vec![0.0; self.n_dofs];
        self.for_each_point(|qp| {
            let u = eval_at(qp, coeffs);
            let fw = pointwise(u) * qp.weight;
            for (&i, &phi) in qp.dofs.iter().zip(qp.values) {
                out[i] += fw * phi;
            }
        });
        self.zero_boundary(&mut out);
        Ok(out)
    }

    /// `∫ pointwise(u_h(x)) dx`.
    pub fn integrate_scalar(&self, coeffs: &[f64], pointwise: impl Fn(f64) -> f64) -> Result<f64> {
        self.check_len(coeffs)?;
        let mut acc = 0.0;
        self.for_each_point(|qp| acc += pointwise(eval_at(qp, coeffs)) * qp.weight);
        Ok(acc)
    }

    /// `ℓ_i = ∫ f(x) φ_i(x) dx` with Dirichlet entries zeroed.
    pub fn assemble_load(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; self.n_dofs];
        self.for_each_point(|qp| {
            let fw = f(&qp.x[..dim]) * qp.weight;
            for (&i, &phi) in qp.dofs.iter().zip(qp.values) {
                out[i] += fw * phi;
            }
        });
        self.zero_boundary(&mut out);
        out
    }

    /// `∫ f(x) dx` with the `2k + 2` rule.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let dim = self.dim();
        let mut acc = 0.0;
        self.for_each_point(|qp| acc += f(&qp.x[..dim]) * qp.weight);
        acc
    }
}

fn eval_at(qp: &QuadPoint<'_>, coeffs: &[f64]) -> f64 {
    qp.dofs.iter().zip(qp.values).map(|(&i, &phi)| coeffs[i] * phi).sum()
}

/// Coefficient vector attached to the space it lives in.
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        space.check_len(&coeffs)?;
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn(&[f64]) -> f64) -> Self {
        let coeffs = space.interpolate(f);
        Self { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Point value of the piecewise polynomial.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        let (e, bary) = self.space.mesh.locate(point)?;
        let n_local = self.space.reference.local_dof_count();
        let mut values = vec![0.0; n_local];
        let mut grads = vec![[0.0; 3]; n_local];
        self.space
            .reference
            .eval_unchecked(&bary[..=self.space.dim()], &mut values, &mut grads);
        Ok(self
            .space
            .element_dofs(e)
            .iter()
            .zip(&values)
            .map(|(&i, &v)| self.coeffs[i] * v)
            .sum())
    }

    /// Gradient inside the element containing `point` (one-sided on
    /// element interfaces).
    pub fn gradient(&self, point: &[f64]) -> Result<[f64; 3]> {
        let (e, bary) = self.space.mesh.locate(point)?;
        let dim = self.space.dim();
        let n_local = self.space.reference.local_dof_count();
        let mut values = vec![0.0; n_local];
        let mut grads = vec![[0.0; 3]; n_local];
        self.space
            .reference
            .eval_unchecked(&bary[..=dim], &mut values, &mut grads);
        let geo = &self.space.geometry[e];
        let mut out = [0.0; 3];
        for (&i, g) in self.space.element_dofs(e).iter().zip(&grads) {
            let pg = geo.physical_gradient(g, dim);
            for a in 0..dim {
                out[a] += self.coeffs[i] * pg[a];
            }
        }
        Ok(out)
    }
}
