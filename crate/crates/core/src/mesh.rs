//! Structured simplicial meshes of `[0,1]^d`.
//!
//! Every grid cell is split into `d!` simplices by the Kuhn (Freudenthal)
//! rule: one simplex per ordering of the axes, walking from the lower corner
//! to the upper corner one axis at a time. In 2D this is the usual split
//! along the lower-left to upper-right diagonal. Since every cell uses the
//! same split the result is conforming, and all edges connect lattice points
//! whose offset is a 0/1 vector, which the P2 layout in `fem` relies on.

use crate::error::{Error, Result};

const PERMS_2D: [[usize; 3]; 2] = [[0, 1, 2], [1, 0, 2]];
const PERMS_3D: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn permutations(dim: usize) -> &'static [[usize; 3]] {
    if dim == 2 {
        &PERMS_2D
    } else {
        &PERMS_3D
    }
}

fn is_odd(perm: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Uniform simplicial mesh of the unit square or cube.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    subdivisions: usize,
    coords: Vec<f64>,
    elements: Vec<usize>,
    boundary: Vec<bool>,
    /// Kuhn simplices with odd axis permutation store their last two
    /// vertices swapped to keep a positive orientation.
    swapped: Vec<bool>,
}

impl Mesh {
    /// Builds the uniform mesh with `m` subdivisions per axis.
    pub fn uniform(dim: usize, m: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        if m == 0 {
            return Err(Error::NonpositiveSubdivisions(m));
        }
        let np = m + 1;
        let n_nodes = np.pow(dim as u32);
        let mut coords = Vec::with_capacity(n_nodes * dim);
        let mut boundary = Vec::with_capacity(n_nodes);
        for idx in 0..n_nodes {
            let mut rest = idx;
            let mut on_boundary = false;
            for _ in 0..dim {
                let i = rest % np;
                rest /= np;
                coords.push(i as f64 / m as f64);
                on_boundary |= i == 0 || i == m;
            }
            boundary.push(on_boundary);
        }

        let perms = permutations(dim);
        let n_cells = m.pow(dim as u32);
        let mut elements = Vec::with_capacity(n_cells * perms.len() * (dim + 1));
        let mut swapped = Vec::with_capacity(n_cells * perms.len());
        let stride: Vec<usize> = (0..dim).map(|a| np.pow(a as u32)).collect();
        for cell in 0..n_cells {
            let mut rest = cell;
            let mut corner = 0;
            for s in &stride {
                corner += (rest % m) * s;
                rest /= m;
            }
            for perm in perms {
                let perm = &perm[..dim];
                let start = elements.len();
                let mut node = corner;
                elements.push(node);
                for &axis in perm {
                    node += stride[axis];
                    elements.push(node);
                }
                let odd = is_odd(perm);
                if odd {
                    elements.swap(start + dim - 1, start + dim);
                }
                swapped.push(odd);
            }
        }

        Ok(Self {
            dim,
            subdivisions: m,
            coords,
            elements,
            boundary,
            swapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn n_nodes(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_elements(&self) -> usize {
        self.swapped.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Vertex indices of element `e`, positively oriented.
    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn is_boundary_node(&self, i: usize) -> bool {
        self.boundary[i]
    }

    /// Integer lattice coordinates of node `i` (multiples of `1/M`).
    pub fn node_lattice(&self, i: usize) -> [usize; 3] {
        let np = self.subdivisions + 1;
        let mut out = [0; 3];
        let mut rest = i;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % np;
            rest /= np;
        }
        out
    }

    /// Signed volume of element `e`.
    pub fn signed_volume(&self, e: usize) -> f64 {
        let jac = self.jacobian(e);
        let det = determinant(&jac, self.dim);
        if self.dim == 2 {
            det / 2.0
        } else {
            det / 6.0
        }
    }

    /// Jacobian of the affine map from the reference simplex onto element
    /// `e`; column `k` is `x_{k+1} − x_0`.
    pub fn jacobian(&self, e: usize) -> [[f64; 3]; 3] {
        let verts = self.element(e);
        let x0 = self.node(verts[0]);
        let mut jac = [[0.0; 3]; 3];
        for k in 0..self.dim {
            let xk = self.node(verts[k + 1]);
            for r in 0..self.dim {
                jac[r][k] = xk[r] - x0[r];
            }
        }
        jac
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for e in 0..self.n_elements() {
            let verts = self.element(e);
            for (a, &va) in verts.iter().enumerate() {
                for &vb in &verts[a + 1..] {
                    let d2: f64 = self
                        .node(va)
                        .iter()
                        .zip(self.node(vb))
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum();
                    h = h.max(d2.sqrt());
                }
            }
        }
        h
    }

    /// Maps every node to its representative under periodic identification
    /// of opposite faces (coordinate 1 wraps to 0).
    pub fn periodic_map(&self) -> Vec<usize> {
        let m = self.subdivisions;
        let np = m + 1;
        (0..self.n_nodes())
            .map(|i| {
                let lat = self.node_lattice(i);
                (0..self.dim)
                    .rev()
                    .fold(0, |acc, a| acc * np + if lat[a] == m { 0 } else { lat[a] })
            })
            .collect()
    }

    /// Finds the element containing `point` and the point's barycentric
    /// coordinates there (ordered like [`Mesh::element`]).
    pub fn locate(&self, point: &[f64]) -> Result<(usize, [f64; 4])> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        const SLACK: f64 = 1e-12;
        if point.iter().any(|x| !(-SLACK..=1.0 + SLACK).contains(x)) {
            return Err(Error::PointOutsideDomain(point.to_vec()));
        }
        let m = self.subdivisions;
        let mut cell = 0;
        let mut local = [0.0; 3];
        for a in (0..self.dim).rev() {
            let scaled = point[a].clamp(0.0, 1.0) * m as f64;
            let c = (scaled.floor() as usize).min(m - 1);
            cell = cell * m + c;
            local[a] = scaled - c as f64;
        }
        // The Kuhn simplex containing the point walks the axes in order of
        // decreasing local coordinate.
        let mut order = [0usize, 1, 2];
        order[..self.dim].sort_by(|&a, &b| local[b].total_cmp(&local[a]).then(a.cmp(&b)));
        let perms = permutations(self.dim);
        let p = perms
            .iter()
            .position(|perm| perm[..self.dim] == order[..self.dim])
            .expect("every axis ordering is a Kuhn permutation");
        let e = cell * perms.len() + p;
        let mut bary = [0.0; 4];
        bary[0] = 1.0 - local[order[0]];
        for k in 1..self.dim {
            bary[k] = local[order[k - 1]] - local[order[k]];
        }
        bary[self.dim] = local[order[self.dim - 1]];
        if self.swapped[e] {
            bary.swap(self.dim - 1, self.dim);
        }
        Ok((e, bary))
    }
}

pub(crate) fn determinant(a: &[[f64; 3]; 3], dim: usize) -> f64 {
    if dim == 2 {
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    } else {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn counts() {
        let m = Mesh::uniform(2, 2).unwrap();
        assert_eq!((m.n_nodes(), m.n_elements()), (9, 8));
        let m = Mesh::uniform(3, 1).unwrap();
        assert_eq!((m.n_nodes(), m.n_elements()), (8, 6));
        let vol: f64 = (0..6).map(|e| m.signed_volume(e)).sum();
        assert!((vol - 1.0).abs() < 1e-12);
        let m = Mesh::uniform(2, 8).unwrap();
        assert_eq!((m.n_nodes(), m.n_elements()), (81, 128));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Mesh::uniform(1, 2), Err(Error::InvalidDimension(1))));
        assert!(matches!(Mesh::uniform(4, 2), Err(Error::InvalidDimension(4))));
        assert!(matches!(
            Mesh::uniform(2, 0),
            Err(Error::NonpositiveSubdivisions(0))
        ));
    }

    #[test]
    fn mesh_sizes() {
        let h = |d, m| Mesh::uniform(d, m).unwrap().mesh_size();
        assert!((h(2, 1) - 2f64.sqrt()).abs() < 1e-14);
        assert!((h(2, 8) - 2f64.sqrt() / 8.0).abs() < 1e-14);
        assert!((h(3, 2) - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn volumes_equal_and_positive() {
        for (dim, m) in [(2, 1), (2, 5), (3, 1), (3, 3)] {
            let mesh = Mesh::uniform(dim, m).unwrap();
            let vols: Vec<f64> = (0..mesh.n_elements()).map(|e| mesh.signed_volume(e)).collect();
            let expected = 1.0 / mesh.n_elements() as f64;
            assert!(vols.iter().all(|v| (v - expected).abs() < 1e-14));
            assert!((vols.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_flags() {
        for m in 1..6 {
            let mesh = Mesh::uniform(2, m).unwrap();
            let count = (0..mesh.n_nodes()).filter(|&i| mesh.is_boundary_node(i)).count();
            let expected = (m + 1) * (m + 1) - if m > 1 { (m - 1) * (m - 1) } else { 0 };
            assert_eq!(count, expected);
            for i in 0..mesh.n_nodes() {
                let x = mesh.node(i);
                let flag = x.iter().any(|&c| c == 0.0 || c == 1.0);
                assert_eq!(flag, mesh.is_boundary_node(i));
            }
        }
    }

    fn facet_counts(mesh: &Mesh) -> HashMap<Vec<usize>, usize> {
        let mut facets = HashMap::new();
        for e in 0..mesh.n_elements() {
            let verts = mesh.element(e);
            for skip in 0..verts.len() {
                let mut f: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                f.sort_unstable();
                *facets.entry(f).or_insert(0) += 1;
            }
        }
        facets
    }

    #[test]
    fn facets_are_conforming() {
        for (dim, m) in [(2, 3), (3, 2), (3, 3)] {
            let mesh = Mesh::uniform(dim, m).unwrap();
            for (facet, count) in facet_counts(&mesh) {
                let on_boundary = (0..dim).any(|a| {
                    facet.iter().all(|&v| mesh.node(v)[a] == 0.0)
                        || facet.iter().all(|&v| mesh.node(v)[a] == 1.0)
                });
                assert_eq!(count, if on_boundary { 1 } else { 2 }, "{facet:?}");
            }
        }
    }

    #[test]
    fn periodic_map_wraps() {
        let mesh = Mesh::uniform(2, 2).unwrap();
        let map = mesh.periodic_map();
        // node (2,1) -> (0,1); node (2,2) -> (0,0)
        assert_eq!(map[2 + 3], 3);
        assert_eq!(map[8], 0);
        assert_eq!(map[4], 4);
    }

    #[test]
    fn locate_recovers_point() {
        let mesh = Mesh::uniform(3, 3).unwrap();
        for p in [[0.1, 0.55, 0.9], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.34, 0.21, 0.77]] {
            let (e, bary) = mesh.locate(&p).unwrap();
            assert!(bary.iter().all(|&b| b >= -1e-14));
            let mut x = [0.0; 3];
            for (k, &v) in mesh.element(e).iter().enumerate() {
                for a in 0..3 {
                    x[a] += bary[k] * mesh.node(v)[a];
                }
            }
            for a in 0..3 {
                assert!((x[a] - p[a]).abs() < 1e-14);
            }
        }
        assert!(mesh.locate(&[1.5, 0.0, 0.0]).is_err());
    }
}
