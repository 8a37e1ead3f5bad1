use nalgebra::DMatrix;

use super::tridiag::Tridiagonal;
use super::{solve::norm2, SparseLu, SparseMatrix};
use crate::error::{Error, Result};

/// Leading part of a generalized symmetric eigendecomposition.
#[derive(Clone, Debug)]
pub struct DenseEigResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// One `B`-orthonormal eigenvector per column.
    pub vectors: DMatrix<f64>,
}

/// Lower Cholesky factor of a dense SPD matrix.
pub fn cholesky(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = b.nrows();
    // symmetric, so the column-major buffer reads as row-major
    let l = cholesky_rows(b.as_slice(), n)?;
    Ok(DMatrix::from_row_slice(n, n, &l))
}

fn cholesky_rows(b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (li, lj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let s = b[i * n + j] - li.iter().zip(lj).map(|(x, y)| x * y).sum::<f64>();
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Overwrites the rows of `x` with `L⁻¹ x`.
fn forward_rows(l: &[f64], x: &mut [f64], n: usize) {
    for i in 0..n {
        let (done, rest) = x.split_at_mut(i * n);
        let row = &mut rest[..n];
        for k in 0..i {
            let lik = l[i * n + k];
            if lik != 0.0 {
                let xk = &done[k * n..k * n + n];
                row.iter_mut().zip(xk).for_each(|(a, b)| *a -= lik * b);
            }
        }
        let d = l[i * n + i];
        row.iter_mut().for_each(|a| *a /= d);
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// The `m` smallest eigenpairs of `A x = λ B x` via `B = L Lᵀ` and a
/// standard symmetric eigensolve on `L⁻¹ A L⁻ᵀ`.
pub fn eig_sym_generalized(a: &DMatrix<f64>, b: &DMatrix<f64>, m: usize) -> Result<DenseEigResult> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Dimension(format!(
            "generalized eigenproblem with A {}x{} and B {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if m > n {
        return Err(Error::Dimension(format!("requested {m} eigenpairs of a {n}x{n} problem")));
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let asym = max_abs(&(a - a.transpose()));
    if asym > 1e-12 * scale {
        return Err(Error::Structure(format!("A is not symmetric (‖A−Aᵀ‖ = {asym:e})")));
    }
    let bscale = max_abs(b).max(f64::MIN_POSITIVE);
    if max_abs(&(b - b.transpose())) > 1e-12 * bscale {
        return Err(Error::Structure("B is not symmetric".into()));
    }
    if m == 0 {
        return Ok(DenseEigResult { values: Vec::new(), vectors: DMatrix::zeros(n, 0) });
    }

    let l = cholesky_rows(b.as_slice(), n)?;
    let mut x = a.as_slice().to_vec();
    forward_rows(&l, &mut x, n);
    // C = L⁻¹ (L⁻¹ A)ᵀ
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            c[j * n + i] = x[i * n + j];
        }
    }
    forward_rows(&l, &mut c, n);
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = s;
        }
    }

    let tri = Tridiagonal::reduce(&mut c, n);
    let values = tri.smallest_eigenvalues(m);
    let zs = tri.eigenvectors(&values);
    let mut vectors = DMatrix::zeros(n, m);
    for (k, mut z) in zs.into_iter().enumerate() {
        tri.back_transform(&mut z);
        // x = L⁻ᵀ z
        for i in (0..n).rev() {
            z[i] /= l[i * n + i];
            let zi = z[i];
            for (zk, lik) in z[..i].iter_mut().zip(&l[i * n..i * n + i]) {
                *zk -= lik * zi;
            }
        }
        vectors.set_column(k, &nalgebra::DVector::from_vec(z));
    }
    Ok(DenseEigResult { values, vectors })
}

/// Power-iteration estimate of the largest eigenvalue of `M⁻¹ A`.
#[derive(Clone, Copy, Debug)]
pub struct GenMaxEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; `value` is then the best estimate.
    pub converged: bool,
}

pub const GENMAX_REL_TOL: f64 = 1e-6;
pub const GENMAX_MAX_ITER: usize = 20_000;

pub fn genmax_eigenvalue(a: &SparseMatrix, m: &SparseMatrix) -> Result<GenMaxEstimate> {
    let n = a.n_rows();
    if !a.is_square() || !m.is_square() || m.n_rows() != n {
        return Err(Error::Dimension(format!(
            "genmax with A {}x{} and M {}x{}",
            a.n_rows(),
            a.n_cols(),
            m.n_rows(),
            m.n_cols()
        )));
    }
    if n == 0 {
        return Ok(GenMaxEstimate { value: 0.0, iterations: 0, converged: true });
    }
    let lu = SparseLu::factor(m)?;
    Ok(power_iteration(n, |x| a.mul_vec(x), |x| m.mul_vec(x), |b| lu.solve(b)))
}

/// Dense counterpart of [`genmax_eigenvalue`].
pub fn genmax_eigenvalue_dense(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<GenMaxEstimate> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "genmax with A {}x{} and M {}x{}",
            a.nrows(),
            a.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 0 {
        return Ok(GenMaxEstimate { value: 0.0, iterations: 0, converged: true });
    }
    let lu = m.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular(0));
    }
    let mul = |mat: &DMatrix<f64>, x: &[f64]| (mat * nalgebra::DVector::from_column_slice(x)).data.into();
    Ok(power_iteration(
        n,
        |x| mul(a, x),
        |x| mul(m, x),
        |b| lu.solve(&nalgebra::DVector::from_column_slice(b)).expect("invertible").data.into(),
    ))
}

fn power_iteration(
    n: usize,
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    apply_m: impl Fn(&[f64]) -> Vec<f64>,
    solve_m: impl Fn(&[f64]) -> Vec<f64>,
) -> GenMaxEstimate {
    // deterministic, non-degenerate start vector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).fract()).collect();
    let mut prev = f64::NAN;
    for it in 1..=GENMAX_MAX_ITER {
        let ax = apply_a(&x);
        let y = solve_m(&ax);
        let mx = apply_m(&x);
        let rq = ax.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>()
            / mx.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>();
        if rq.is_finite() && prev.is_finite() && (rq - prev).abs() <= GENMAX_REL_TOL * rq.abs() {
            return GenMaxEstimate { value: rq, iterations: it, converged: true };
        }
        prev = rq;
        let ny = norm2(&y);
        if ny == 0.0 {
            return GenMaxEstimate { value: 0.0, iterations: it, converged: true };
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    log::warn!("genmax power iteration hit the cap of {GENMAX_MAX_ITER} iterations");
    GenMaxEstimate { value: prev, iterations: GENMAX_MAX_ITER, converged: false }
}
