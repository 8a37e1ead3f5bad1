use nalgebra::DMatrix;

use super::eig::{eig_sym_generalized, DenseEigResult};
use super::solve::dot;
use super::{SparseLu, SparseMatrix};
use crate::error::{Error, Result};

/// Knobs of the shift-invert subspace iteration.
#[derive(Clone, Copy, Debug)]
pub struct SubspaceOptions {
    /// Relative residual `‖A x − λ B x‖ / ((‖A‖ + |λ| ‖B‖) ‖x‖)` to reach.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        SubspaceOptions { tol: 1e-10, max_iter: 500 }
    }
}

fn b_orthonormalize(cols: &mut [Vec<f64>], b: &SparseMatrix) -> Result<()> {
    for k in 0..cols.len() {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            let bk = b.mul_vec(&cols[k]);
            for j in 0..k {
                let c = dot(&cols[j], &bk);
                let (head, tail) = cols.split_at_mut(k);
                tail[0].iter_mut().zip(&head[j]).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nrm = b.quad_form(&cols[k]).sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        cols[k].iter_mut().for_each(|x| *x /= nrm);
    }
    Ok(())
}

/// The `m` smallest eigenpairs of `A x = λ B x` for sparse symmetric `A`
/// positive semidefinite and `B` positive definite, by block inverse
/// iteration on `(A − σB)⁻¹ B` with a small negative shift `σ` and
/// Rayleigh-Ritz on every sweep.
pub fn eig_sym_sparse(a: &SparseMatrix, b: &SparseMatrix, m: usize, opts: &SubspaceOptions) -> Result<DenseEigResult> {
    let n = a.n_rows();
    if !a.is_square() || !b.is_square() || b.n_rows() != n {
        return Err(Error::Dimension(format!(
            "generalized eigenproblem with A {}x{} and B {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    if m > n {
        return Err(Error::Dimension(format!("requested {m} eigenpairs of a {n}x{n} problem")));
    }
    if m == 0 {
        return Ok(DenseEigResult { values: Vec::new(), vectors: DMatrix::zeros(n, 0) });
    }
    let p = n.min((2 * m).max(m + 8));
    if p == n {
        return eig_sym_generalized(&a.to_dense(), &b.to_dense(), m);
    }
    let (na, nb) = (a.norm_inf(), b.norm_inf());
    let sigma = -1e-6 * na / nb;
    let k = a.add_scaled(1.0, b, -sigma)?;
    let lu = SparseLu::factor(&k)?;

    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|i| ((i * (j + 1)) as f64 * 0.618_033_988_75 + j as f64 * 0.414_213_562).fract() - 0.5).collect())
        .collect();
    b_orthonormalize(&mut v, b)?;
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut z: Vec<Vec<f64>> = v.iter().map(|x| lu.solve(&b.mul_vec(x))).collect();
        b_orthonormalize(&mut z, b)?;
        let az: Vec<Vec<f64>> = z.iter().map(|x| a.mul_vec(x)).collect();
        let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&z[i], &az[j]) + dot(&z[j], &az[i])));
        let rr = eig_sym_generalized(&h, &DMatrix::identity(p, p), p)?;
        v = (0..p)
            .map(|c| {
                let mut x = vec![0.0; n];
                for (zi, s) in z.iter().zip(rr.vectors.column(c).iter()) {
                    x.iter_mut().zip(zi).for_each(|(xv, zv)| *xv += s * zv);
                }
                x
            })
            .collect();
        worst = 0.0f64;
        for (x, &lam) in v.iter().zip(&rr.values).take(m) {
            let ax = a.mul_vec(x);
            let bx = b.mul_vec(x);
            let r: f64 = ax.iter().zip(&bx).map(|(p, q)| (p - lam * q).powi(2)).sum::<f64>().sqrt();
            let xn = dot(x, x).sqrt();
            worst = worst.max(r / ((na + lam.abs() * nb) * xn));
        }
        if worst <= opts.tol {
            let vectors = DMatrix::from_fn(n, m, |i, j| v[j][i]);
            return Ok(DenseEigResult { values: rr.values[..m].to_vec(), vectors });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        // Neumann ends so the constant is in the null space
        t.push((0, 0, -1.0));
        t.push((n - 1, n - 1, -1.0));
        SparseMatrix::from_triplets(&t, n, n).unwrap()
    }

    #[test]
    fn neumann_chain_spectrum() {
        let n = 60;
        let a = laplacian_1d(n);
        let b = SparseMatrix::identity(n);
        let r = eig_sym_sparse(&a, &b, 4, &SubspaceOptions::default()).unwrap();
        for (k, &lam) in r.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
            assert!((lam - exact).abs() < 1e-9, "{k}: {lam} vs {exact}");
        }
    }

    #[test]
    fn agrees_with_dense_solver() {
        let n = 40;
        let a = laplacian_1d(n);
        let b = SparseMatrix::from_diagonal(&(0..n).map(|i| 1.0 + (i % 3) as f64).collect::<Vec<_>>());
        let s = eig_sym_sparse(&a, &b, 5, &SubspaceOptions::default()).unwrap();
        let d = eig_sym_generalized(&a.to_dense(), &b.to_dense(), 5).unwrap();
        for k in 0..5 {
            assert!((s.values[k] - d.values[k]).abs() <= 1e-9 * d.values[4]);
            let dotb = (s.vectors.column(k).transpose() * b.to_dense() * d.vectors.column(k))[(0, 0)];
            assert!((dotb.abs() - 1.0).abs() < 1e-6);
        }
    }
}
