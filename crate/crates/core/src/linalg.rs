//! Compressed-row sparse matrices and the linear solvers used by the stepper.

use crate::error::{Error, Result};

/// Square CSR matrix. Column indices are strictly increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets, summing
    /// duplicates in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) out of bounds for {n}x{n} matrix"
                )));
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Zero-valued matrix with the given sparsity pattern (row-wise sorted,
    /// deduplicated column lists).
    pub(crate) fn from_pattern(pattern: Vec<Vec<usize>>) -> Self {
        let n = pattern.len();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for row in pattern {
            col_indices.extend(row);
            row_offsets.push(col_indices.len());
        }
        let values = vec![0.0; col_indices.len()];
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &trip)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.row_offsets[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to an entry that is already part of the pattern.
    pub(crate) fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .expect("entry must be in the sparsity pattern");
        self.values[k] += v;
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        let a = self.max_asymmetry();
        if a > tol {
            Err(Error::NotSymmetric(a))
        } else {
            Ok(())
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: if x.len() != self.n { x.len() } else { y.len() },
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(dot(x, &self.matvec(y)?))
    }

    /// `Σ c_k A_k` over matrices of equal size; patterns are merged.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let n = terms.first().map_or(0, |(_, a)| a.n);
        let mut trip = Vec::new();
        for &(c, a) in terms {
            if a.n != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.n,
                });
            }
            for i in 0..n {
                let (cols, vals) = a.row(i);
                trip.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, c * v)));
            }
        }
        Self::from_triplets(n, &trip)
    }

    /// Symmetric elimination: rows and columns flagged in `fixed` are
    /// replaced by those of the identity. The pattern is kept.
    pub fn eliminate(&self, fixed: &[bool]) -> Result<Self> {
        if fixed.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: fixed.len(),
            });
        }
        let mut out = self.clone();
        for i in 0..self.n {
            let r = self.row_offsets[i]..self.row_offsets[i + 1];
            for k in r {
                let j = self.col_indices[k];
                if fixed[i] || fixed[j] {
                    out.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
            if fixed[i] && self.position(i, i).is_none() {
                return Err(Error::InvalidInput(format!("row {i} has no diagonal entry")));
            }
        }
        Ok(out)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = rhs` for SPD `A` with Jacobi-preconditioned conjugate
/// gradients, to relative residual `‖Ax − rhs‖₂ / ‖rhs‖₂ ≤ tol`.
///
/// At most `10 n` iterations are taken; failing that the achieved residual
/// is reported in [`Error::SolverFailure`].
pub fn solve_spd(a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = a.n();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let rhs_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n.max(1);
    let mut residual = 1.0;
    for _ in 0..max_iter {
        a.matvec_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = norm2(&r) / rhs_norm;
        if residual <= tol {
            // Confirm against the true residual; recurrence drift can make
            // the updated one optimistic.
            let true_res = true_residual(a, &x, rhs)? / rhs_norm;
            if true_res <= tol {
                return Ok(x);
            }
            residual = true_res;
            r = residual_vector(a, &x, rhs)?;
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            rz = dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        iterations: max_iter,
        residual,
    })
}

fn residual_vector(a: &SparseMatrix, x: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let ax = a.matvec(x)?;
    Ok(rhs.iter().zip(&ax).map(|(b, y)| b - y).collect())
}

fn true_residual(a: &SparseMatrix, x: &[f64], rhs: &[f64]) -> Result<f64> {
    Ok(norm2(&residual_vector(a, x, rhs)?))
}

/// Solves `(A + scale · b bᵀ) x = rhs` by Sherman–Morrison: two SPD solves
/// with `A`, then a scalar correction.
pub fn solve_rank1(a: &SparseMatrix, b: &[f64], scale: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if b.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.len(),
        });
    }
    if !(scale >= 0.0) {
        return Err(Error::InvalidInput(format!("rank-1 scale must be nonnegative, got {scale}")));
    }
    let y = solve_spd(a, rhs, tol)?;
    if scale == 0.0 {
        return Ok(y);
    }
    let z = solve_spd(a, b, tol)?;
    let denom = 1.0 + scale * dot(b, &z);
    if denom.abs() < 1e-14 {
        return Err(Error::SingularUpdate(denom));
    }
    let coef = scale * dot(b, &y) / denom;
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - coef * zi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 3.0), (1, 1, 5.0)]).unwrap();
        assert_eq!(a.col_indices(), &[0, 1, 1]);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert!(SparseMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn identity_and_zero_matvec() {
        let x = vec![1.5, -2.0, 3.0];
        assert_eq!(SparseMatrix::identity(3).matvec(&x).unwrap(), x);
        let z = SparseMatrix::from_triplets(3, &[]).unwrap();
        assert_eq!(z.matvec(&x).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            z.matvec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn small_spd_solves() {
        let x = solve_spd(&SparseMatrix::identity(2), &[3.0, -1.0], 1e-12).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
        let d = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let x = solve_spd(&d, &[2.0, 4.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert_eq!(solve_spd(&d, &[0.0, 0.0], 1e-12).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn solver_failure_on_indefinite() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0], 1e-12),
            Err(Error::SolverFailure { .. })
        ));
    }

    #[test]
    fn rank1_identity_case() {
        let x = solve_rank1(&SparseMatrix::identity(2), &[1.0, 0.0], 1.0, &[2.0, 0.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
    }

    #[test]
    fn rank1_zero_scale_matches_plain_solve() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let rhs = [1.0, 2.0];
        assert_eq!(
            solve_rank1(&a, &[0.3, 0.7], 0.0, &rhs, 1e-12).unwrap(),
            solve_spd(&a, &rhs, 1e-12).unwrap()
        );
    }

    #[test]
    fn elimination_keeps_symmetry() {
        let a = SparseMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ])
        .unwrap();
        let e = a.eliminate(&[true, false, false]).unwrap();
        assert_eq!(
            e.to_dense(),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]
        );
        assert_eq!(e.max_asymmetry(), 0.0);
    }

    #[test]
    fn linear_combination_merges_patterns() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let c = SparseMatrix::linear_combination(&[(2.0, &a), (3.0, &b)]).unwrap();
        assert_eq!(c.to_dense(), vec![vec![2.0, 3.0], vec![3.0, 2.0]]);
    }
}
