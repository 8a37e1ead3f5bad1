use super::{SparseLu, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    /// Sparse LU with partial pivoting.
    Direct,
    /// Jacobi-preconditioned conjugate gradients (SPD systems only).
    Cg,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub method: SolverMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: SolverMethod::Direct, tol: 1e-10, max_iter: 10_000 }
    }
}

impl SolveOptions {
    pub fn cg(tol: f64, max_iter: usize) -> Self {
        SolveOptions { method: SolverMethod::Cg, tol, max_iter }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `‖b − A x‖₂ / ‖b‖₂` (absolute residual when `b = 0`).
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Solves `A x = b`; the direct path checks the backward error, CG the
/// relative residual, against `opts.tol`.
pub fn solve_linear(a: &SparseMatrix, b: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    if !a.is_square() || a.n_rows() != b.len() {
        return Err(Error::Dimension(format!(
            "solve {}x{} with rhs of length {}",
            a.n_rows(),
            a.n_cols(),
            b.len()
        )));
    }
    match opts.method {
        SolverMethod::Direct => {
            let lu = SparseLu::factor(a)?;
            solve_refined(a, &lu, b, opts.tol)
        }
        SolverMethod::Cg => conjugate_gradient(a, b, None, opts.tol, opts.max_iter),
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// LU solve followed by up to three steps of iterative refinement, stopping
/// once the normwise backward error `‖b − Ax‖ / (‖A‖‖x‖ + ‖b‖)` (∞-norms)
/// is below `tol`.
pub fn solve_refined(a: &SparseMatrix, lu: &SparseLu, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut x = lu.solve(b);
    let na = a.norm_inf();
    let nb = inf_norm(b);
    for step in 0..=3 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let scale = na * inf_norm(&x) + nb;
        let res = if scale > 0.0 { inf_norm(&r) / scale } else { 0.0 };
        if res <= tol {
            return Ok(x);
        }
        if step == 3 {
            return Err(Error::NoConvergence { iterations: step, residual: res });
        }
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    unreachable!()
}

/// Jacobi-preconditioned CG, optionally warm-started.
pub fn conjugate_gradient(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..=max_iter {
        let res = norm2(&r) / nb;
        if res <= tol {
            return Ok(x);
        }
        if it == max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: it, pivot: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}
