//! Lagrange reference elements and quadrature on the reference simplex.
//!
//! The reference simplex has vertices `0, e_1, …, e_d`; barycentric
//! coordinates are `λ_0 = 1 − Σ ξ_k` and `λ_k = ξ_k`.

use crate::error::{Error, Result};

pub const MAX_QUADRATURE_DEGREE: usize = 6;

const EDGES_2D: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const EDGES_3D: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Local edges of the reference simplex, in local P2 dof order.
pub fn simplex_edges(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &EDGES_2D
    } else {
        &EDGES_3D
    }
}

/// Lagrange element of degree 1 or 2 on the reference triangle or
/// tetrahedron. Local dofs are the vertices followed (for P2) by the edge
/// midpoints in [`simplex_edges`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    dim: usize,
    degree: usize,
    local_dof_coords: Vec<Vec<f64>>,
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        if degree != 1 && degree != 2 {
            return Err(Error::UnsupportedDegree(degree));
        }
        let mut local_dof_coords = Vec::new();
        for v in 0..=dim {
            let mut b = vec![0.0; dim + 1];
            b[v] = 1.0;
            local_dof_coords.push(b);
        }
        if degree == 2 {
            for &(i, j) in simplex_edges(dim) {
                let mut b = vec![0.0; dim + 1];
                b[i] = 0.5;
                b[j] = 0.5;
                local_dof_coords.push(b);
            }
        }
        Ok(Self {
            dim,
            degree,
            local_dof_coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn local_dof_count(&self) -> usize {
        self.local_dof_coords.len()
    }

    /// Barycentric coordinates of the local nodal points.
    pub fn local_dof_coords(&self) -> &[Vec<f64>] {
        &self.local_dof_coords
    }

    /// Values and reference-coordinate gradients of every local basis
    /// function at a barycentric point.
    pub fn shape_values(&self, bary: &[f64]) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
        validate_barycentric(bary, self.dim)?;
        let mut values = vec![0.0; self.local_dof_count()];
        let mut grads = vec![[0.0; 3]; self.local_dof_count()];
        self.eval_unchecked(bary, &mut values, &mut grads);
        Ok((values, grads))
    }

    pub(crate) fn eval_unchecked(&self, bary: &[f64], values: &mut [f64], grads: &mut [[f64; 3]]) {
        let d = self.dim;
        // ∂λ_i/∂ξ_k
        let dl = |i: usize| -> [f64; 3] {
            let mut g = [0.0; 3];
            if i == 0 {
                g[..d].iter_mut().for_each(|x| *x = -1.0);
            } else {
                g[i - 1] = 1.0;
            }
            g
        };
        match self.degree {
            1 => {
                for i in 0..=d {
                    values[i] = bary[i];
                    grads[i] = dl(i);
                }
            }
            _ => {
                for i in 0..=d {
                    let l = bary[i];
                    values[i] = l * (2.0 * l - 1.0);
                    let g = dl(i);
                    let s = 4.0 * l - 1.0;
                    grads[i] = [s * g[0], s * g[1], s * g[2]];
                }
                for (k, &(i, j)) in simplex_edges(d).iter().enumerate() {
                    let (li, lj) = (bary[i], bary[j]);
                    let (gi, gj) = (dl(i), dl(j));
                    values[d + 1 + k] = 4.0 * li * lj;
                    let mut g = [0.0; 3];
                    for a in 0..3 {
                        g[a] = 4.0 * (gi[a] * lj + li * gj[a]);
                    }
                    grads[d + 1 + k] = g;
                }
            }
        }
    }

    /// Values and reference gradients of all basis functions at every point
    /// of `rule`.
    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        let n_local = self.local_dof_count();
        let n_points = rule.weights.len();
        let mut values = vec![0.0; n_points * n_local];
        let mut grads = vec![[0.0; 3]; n_points * n_local];
        for (q, p) in rule.points.iter().enumerate() {
            let range = q * n_local..(q + 1) * n_local;
            self.eval_unchecked(p, &mut values[range.clone()], &mut grads[range]);
        }
        Tabulation {
            n_local,
            n_points,
            values,
            grads,
        }
    }
}

fn validate_barycentric(bary: &[f64], dim: usize) -> Result<()> {
    const TOL: f64 = 1e-12;
    let ok = bary.len() == dim + 1
        && bary.iter().all(|&b| b >= -TOL && b.is_finite())
        && (bary.iter().sum::<f64>() - 1.0).abs() <= TOL;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidBarycentric(bary.to_vec()))
    }
}

/// Basis values and reference gradients at the points of a quadrature rule,
/// stored point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub n_local: usize,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_local..(q + 1) * self.n_local]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 3]] {
        &self.grads[q * self.n_local..(q + 1) * self.n_local]
    }
}

/// Quadrature rule on the reference simplex. Weights sum to the reference
/// measure (1/2 or 1/6).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub exact_degree: usize,
    /// Barycentric coordinates of the points.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Collapsed (Duffy) tensor-product Gauss–Legendre rule, exact for all
    /// polynomials of total degree `≤ exact_degree`.
    pub fn new(dim: usize, exact_degree: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        if exact_degree > MAX_QUADRATURE_DEGREE {
            return Err(Error::UnsupportedQuadrature(exact_degree));
        }
        // The collapse adds one polynomial degree per collapsed direction.
        let points_for = |deg: usize| deg / 2 + 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        if dim == 2 {
            let (xu, wu) = gauss_legendre_unit(points_for(exact_degree + 1));
            let (xv, wv) = gauss_legendre_unit(points_for(exact_degree));
            for (&u, &a) in xu.iter().zip(&wu) {
                for (&v, &b) in xv.iter().zip(&wv) {
                    let xi = [u, v * (1.0 - u)];
                    points.push(vec![1.0 - xi[0] - xi[1], xi[0], xi[1]]);
                    weights.push(a * b * (1.0 - u));
                }
            }
        } else {
            let (xu, wu) = gauss_legendre_unit(points_for(exact_degree + 2));
            let (xv, wv) = gauss_legendre_unit(points_for(exact_degree + 1));
            let (xw, ww) = gauss_legendre_unit(points_for(exact_degree));
            for (&u, &a) in xu.iter().zip(&wu) {
                for (&v, &b) in xv.iter().zip(&wv) {
                    for (&w, &c) in xw.iter().zip(&ww) {
                        let xi = [u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)];
                        points.push(vec![1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]);
                        weights.push(a * b * c * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            exact_degree,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates `ξ` of point `q`.
    pub fn reference_point(&self, q: usize) -> [f64; 3] {
        let mut xi = [0.0; 3];
        xi[..self.dim].copy_from_slice(&self.points[q][1..]);
        xi
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
