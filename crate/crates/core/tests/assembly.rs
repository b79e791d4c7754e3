//! Global assembly checked against the dense oracle in `common`.

mod common;

use nalgebra::{DMatrix, DVector};
use savwave::analysis::h1_norm_diff;
use savwave::{BoundaryKind, FeFunction};

use common::{dense_oracle, max_diff, space};

#[test]
fn assembly_matches_dense_oracle() {
    for dim in [2, 3] {
        for m in [1, 2] {
            for degree in [1, 2] {
                let s = space(dim, m, degree, BoundaryKind::Dirichlet);
                let (mo, so) = dense_oracle(&s);
                let dm = max_diff(&s.assemble_mass().to_dense(), &mo);
                let ds = max_diff(&s.assemble_stiffness().to_dense(), &so);
                assert!(dm < 1e-12 && ds < 1e-12, "dim {dim} M {m} k {degree}: {dm:e} {ds:e}");
            }
        }
    }
    for degree in [1, 2] {
        let s = space(2, 2, degree, BoundaryKind::Periodic);
        let (mo, so) = dense_oracle(&s);
        assert!(max_diff(&s.assemble_mass().to_dense(), &mo) < 1e-12);
        assert!(max_diff(&s.assemble_stiffness().to_dense(), &so) < 1e-12);
    }
}

#[test]
fn p1_single_element_closed_forms() {
    // On one simplex, P1 mass is |T|(1 + δ_ij)/((d+1)(d+2)).
    let s = space(2, 1, 1, BoundaryKind::Dirichlet);
    let m = s.assemble_mass();
    let (mo, _) = dense_oracle(&s);
    assert!((m.get(0, 3) - 1.0 / 12.0).abs() < 1e-15);
    assert!((mo[(0, 3)] - 1.0 / 12.0).abs() < 1e-15);
    // node (1,0) sits in one triangle of area 1/2: 2·(1/2)/12
    assert!((m.get(1, 1) - 1.0 / 12.0).abs() < 1e-15);
    let k = s.assemble_stiffness();
    assert!((k.get(1, 1) - 1.0).abs() < 1e-15);
}

#[test]
fn mass_is_positive_definite() {
    let s = space(2, 2, 2, BoundaryKind::Dirichlet);
    let dense = DMatrix::from_fn(s.n_dofs(), s.n_dofs(), |i, j| s.assemble_mass().get(i, j));
    let eig = dense.symmetric_eigenvalues();
    assert!(eig.min() > 0.0);
}

#[test]
fn nonlinear_vector_of_identity_matches_oracle() {
    // u_h = interpolant of x is exact, so b_i = ∫ x φ_i = Σ_j x_j M_ij.
    let s = space(2, 2, 1, BoundaryKind::Periodic);
    let s_dir = space(2, 2, 1, BoundaryKind::Dirichlet);
    let u = s_dir.interpolate(|x| x[0]);
    let b = s_dir.assemble_nonlinear_vector(&u, |v| v).unwrap();
    let (mo, _) = dense_oracle(&s_dir);
    let expect = &mo * DVector::from_vec(u.clone());
    for i in 0..s_dir.n_dofs() {
        let e = if s_dir.boundary_mask()[i] { 0.0 } else { expect[i] };
        assert!((b[i] - e).abs() < 1e-14, "{i}");
    }
    // pointwise ≡ 1 on an unconstrained space gives ∫φ_i summing to 1
    let ones = s.assemble_nonlinear_vector(&vec![0.0; s.n_dofs()], |_| 1.0).unwrap();
    assert!((ones.iter().sum::<f64>() - 1.0).abs() < 1e-14);
}

#[test]
fn h1_norm_diff_matches_oracle() {
    let s = space(2, 2, 1, BoundaryKind::Dirichlet);
    let (mo, so) = dense_oracle(&s);
    let a: Vec<f64> = (0..s.n_dofs()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
    let b: Vec<f64> = (0..s.n_dofs()).map(|i| ((i * 13 % 5) as f64) / 3.0).collect();
    let d = DVector::from_vec(a.iter().zip(&b).map(|(x, y)| x - y).collect());
    let expect = (d.transpose() * (&mo + &so) * &d)[(0, 0)].sqrt();
    let fa = FeFunction::new(s.clone(), a).unwrap();
    let fb = FeFunction::new(s.clone(), b).unwrap();
    assert!((h1_norm_diff(&fa, &fb).unwrap() - expect).abs() < 1e-12);
}
