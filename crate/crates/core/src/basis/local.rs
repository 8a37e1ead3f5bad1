use nalgebra::DMatrix;

use crate::cloud::Support;
use crate::error::{Error, Result};
use crate::fem::{assemble_triplets, Form};
use crate::geometry::FineMesh;
use crate::linalg::{eig_sym_generalized, eig_sym_sparse, SparseMatrix, SubspaceOptions};

/// Supports up to this many vertices use the dense eigensolver.
pub const DENSE_EIG_LIMIT: usize = 300;

/// Coefficients of the local spectral problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalCoefficients {
    /// Matrix weight.
    pub lambda1: f64,
    /// Fracture weight.
    pub lambda2: f64,
    /// Fracture aperture.
    pub alpha: f64,
}

/// Fracture edges with both endpoints in the (sorted) support vertex set.
pub fn support_fracture_edges(support: &Support, mesh: &FineMesh) -> Vec<[usize; 2]> {
    mesh.fracture_edges
        .iter()
        .copied()
        .filter(|e| e.iter().all(|v| support.vertices.binary_search(v).is_ok()))
        .collect()
}

fn sparse_local(support: &Support, mesh: &FineMesh, form: Form, c: &LocalCoefficients) -> Result<SparseMatrix> {
    let n = support.vertices.len();
    let frac_edges = support_fracture_edges(support, mesh);
    let local = |v: usize| support.vertices.binary_search(&v).expect("element vertex inside support");
    let triplets = assemble_triplets(
        mesh,
        support.elements.iter().copied(),
        frac_edges,
        form,
        c.lambda1,
        c.alpha * c.lambda2,
        local,
    )?;
    SparseMatrix::from_triplets(&triplets, n, n)
}

/// Local stiffness `A` and weighted mass `B` on one support, indexed by
/// position in `support.vertices`.
pub fn local_matrices(
    support: &Support,
    mesh: &FineMesh,
    coeffs: &LocalCoefficients,
) -> Result<(SparseMatrix, SparseMatrix)> {
    if support.elements.is_empty() {
        return Err(Error::Config("local problem on an empty support".into()));
    }
    Ok((sparse_local(support, mesh, Form::Stiffness, coeffs)?, sparse_local(support, mesh, Form::Mass, coeffs)?))
}

/// Ascending eigenpairs of one local problem; eigenvectors are columns over
/// the support vertices.
#[derive(Clone, Debug)]
pub struct LocalSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// The `m` smallest eigenpairs of `A ψ = λ B ψ`, `B`-orthonormal.
///
/// Signs: the first eigenvector has a positive `B`-weighted mean, the others
/// have their largest-magnitude entry positive. Fewer pairs are returned when
/// the support has fewer than `m` vertices.
pub fn spectral_basis(a: &SparseMatrix, b: &SparseMatrix, m: usize) -> Result<LocalSpectrum> {
    let n = a.n_rows();
    let m_eff = m.min(n);
    if m_eff < m {
        log::warn!("support has {n} vertices, keeping {m_eff} of {m} requested eigenpairs");
    }
    let eig = if n <= DENSE_EIG_LIMIT {
        eig_sym_generalized(&a.to_dense(), &b.to_dense(), m_eff)
    } else {
        eig_sym_sparse(a, b, m_eff, &SubspaceOptions::default())
    };
    let eig = eig.map_err(|e| match e {
        Error::NotPositiveDefinite { index, pivot } => {
            Error::Config(format!("local mass matrix is not positive definite (pivot {index} = {pivot:e})"))
        }
        other => other,
    })?;
    let mut vectors = eig.vectors;
    let b1 = nalgebra::DVector::from_vec(b.mul_vec(&vec![1.0; n]));
    for k in 0..m_eff {
        let mut col = vectors.column_mut(k);
        let mean = col.dot(&b1);
        let flip = if k == 0 && mean.abs() > 1e-12 * b1.norm() * col.norm() {
            mean < 0.0
        } else {
            let imax = col.iamax();
            col[imax] < 0.0
        };
        if flip {
            col.neg_mut();
        }
    }
    Ok(LocalSpectrum { values: eig.values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::extract_support;
    use crate::geometry::{build_structured_trimesh, DirichletSide};

    #[test]
    fn constant_mode_comes_first() {
        let mesh = build_structured_trimesh([4.0, 4.0], 6, 6, DirichletSide::Left).unwrap();
        let s = extract_support([2.0, 2.0], 1.8, &mesh).unwrap();
        let c = LocalCoefficients { lambda1: 1.0, lambda2: 1.0, alpha: 1.0 };
        let (a, b) = local_matrices(&s, &mesh, &c).unwrap();
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(b.asymmetry(), 0.0);
        assert!(a.mul_vec(&vec![1.0; a.n_rows()]).iter().all(|v| v.abs() < 1e-12));
        let spec = spectral_basis(&a, &b, 3).unwrap();
        assert!(spec.values[0].abs() <= 1e-8 * spec.values[2]);
        let v0 = spec.vectors.column(0);
        assert!(v0.iter().all(|&x| (x - v0[0]).abs() < 1e-8 && x > 0.0));
        assert!(spec.values.iter().all(|&l| l >= -1e-10));
        assert!(spec.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn small_support_truncates() {
        let mesh = build_structured_trimesh([1.0, 1.0], 1, 1, DirichletSide::Left).unwrap();
        let s = extract_support([0.5, 0.5], 2.0, &mesh).unwrap();
        let c = LocalCoefficients { lambda1: 1.0, lambda2: 1.0, alpha: 1.0 };
        let (a, b) = local_matrices(&s, &mesh, &c).unwrap();
        let spec = spectral_basis(&a, &b, 6).unwrap();
        assert_eq!(spec.values.len(), 4);
    }
}
