//! Dense exact oracle shared by integration tests.
//!
//! Every basis function is written as a polynomial in barycentric
//! coordinates and integrated with `∫_T λ^α = |T| d! α! / (|α| + d)!`, so the
//! oracle shares no quadrature or tabulation code with the library.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use savwave::{BoundaryKind, FeSpace, Mesh};

type Poly = BTreeMap<[u32; 4], f64>;

fn mono(exp: [u32; 4], c: f64) -> Poly {
    let mut p = Poly::new();
    p.insert(exp, c);
    p
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(*e).or_insert(0.0) += c;
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let mut e = [0; 4];
            for k in 0..4 {
                e[k] = ea[k] + eb[k];
            }
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn diff(p: &Poly, k: usize) -> Poly {
    let mut out = Poly::new();
    for (e, c) in p {
        if e[k] > 0 {
            let mut f = *e;
            f[k] -= 1;
            *out.entry(f).or_insert(0.0) += c * e[k] as f64;
        }
    }
    out
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn integrate(p: &Poly, volume: f64, dim: usize) -> f64 {
    p.iter()
        .map(|(e, c)| {
            let num: f64 = e.iter().map(|&a| factorial(a)).product();
            let tot: u32 = e.iter().sum();
            c * volume * factorial(dim as u32) * num / factorial(tot + dim as u32)
        })
        .sum()
}

fn unit(k: usize) -> [u32; 4] {
    let mut e = [0; 4];
    e[k] = 1;
    e
}

/// Lagrange basis of the space's reference element, as barycentric
/// polynomials.
fn basis(space: &FeSpace) -> Vec<Poly> {
    let degree = space.degree();
    space
        .reference()
        .local_dof_coords()
        .iter()
        .map(|b| {
            let nz: Vec<usize> = (0..b.len()).filter(|&k| b[k] != 0.0).collect();
            match (degree, nz.len()) {
                (1, 1) => mono(unit(nz[0]), 1.0),
                (2, 1) => {
                    let i = nz[0];
                    let mut e2 = [0; 4];
                    e2[i] = 2;
                    add(&mono(e2, 2.0), &mono(unit(i), -1.0))
                }
                (2, 2) => {
                    let mut e = [0; 4];
                    e[nz[0]] = 1;
                    e[nz[1]] = 1;
                    mono(e, 4.0)
                }
                _ => unreachable!(),
            }
        })
        .collect()
}

/// Physical gradients of the barycentric coordinates and the volume.
fn bary_gradients(mesh: &Mesh, e: usize) -> (Vec<Vec<f64>>, f64) {
    let dim = mesh.dim();
    let verts = mesh.element(e);
    let mut a = DMatrix::zeros(dim + 1, dim + 1);
    for (k, &v) in verts.iter().enumerate() {
        a[(0, k)] = 1.0;
        for r in 0..dim {
            a[(r + 1, k)] = mesh.node(v)[r];
        }
    }
    let volume = a.determinant().abs() / factorial(dim as u32);
    // λ = A⁻¹ [1; x], so ∇λ_k is row k of A⁻¹ without its first column.
    let inv = a.try_inverse().unwrap();
    let grads = (0..=dim)
        .map(|k| (1..=dim).map(|c| inv[(k, c)]).collect())
        .collect();
    (grads, volume)
}

pub fn dense_oracle(space: &FeSpace) -> (DMatrix<f64>, DMatrix<f64>) {
    let mesh = space.mesh();
    let dim = mesh.dim();
    let n = space.n_dofs();
    let phis = basis(space);
    let dphis: Vec<Vec<Poly>> = phis.iter().map(|p| (0..=dim).map(|k| diff(p, k)).collect()).collect();
    let mut mass = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    for e in 0..mesh.n_elements() {
        let (gl, vol) = bary_gradients(mesh, e);
        let dofs = space.element_dofs(e);
        for a in 0..phis.len() {
            for b in 0..phis.len() {
                mass[(dofs[a], dofs[b])] += integrate(&mul(&phis[a], &phis[b]), vol, dim);
                let mut s = 0.0;
                for k in 0..=dim {
                    for l in 0..=dim {
                        let g: f64 = (0..dim).map(|r| gl[k][r] * gl[l][r]).sum();
                        s += g * integrate(&mul(&dphis[a][k], &dphis[b][l]), vol, dim);
                    }
                }
                stiff[(dofs[a], dofs[b])] += s;
            }
        }
    }
    (mass, stiff)
}

pub fn space(dim: usize, m: usize, degree: usize, bc: BoundaryKind) -> Arc<FeSpace> {
    Arc::new(FeSpace::new(Arc::new(Mesh::uniform(dim, m).unwrap()), degree, bc).unwrap())
}

/// Largest entrywise difference between a row-major matrix and a dense one.
pub fn max_diff(a: &[Vec<f64>], b: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - b[(i, j)]).abs());
        }
    }
    worst
}
