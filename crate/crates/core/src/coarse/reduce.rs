use nalgebra::DMatrix;

use crate::basis::DofKind;
use crate::error::{Error, Result};
use crate::linalg::{dot, SparseMatrix};

/// Coarse basis change `T` (original dofs × kept dofs) and the kind of
/// every kept dof.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    pub t: DMatrix<f64>,
    pub kinds: Vec<DofKind>,
    /// Original dofs discarded as numerically dependent.
    pub dropped: usize,
}

struct Builder<'a> {
    g: &'a SparseMatrix,
    q: Vec<Vec<f64>>,
    gq: Vec<Vec<f64>>,
}

impl Builder<'_> {
    /// Pivoted Gram-Schmidt in the `G` inner product: repeatedly takes the
    /// candidate with the largest relative component outside the span of
    /// `q[against..]` and the vectors added so far, until that component
    /// falls below `tol`. Returns the number of vectors added.
    fn add_group(&mut self, candidates: &[usize], against: usize, tol: f64) -> usize {
        let n = self.g.n_rows();
        let diag = self.g.diagonal();
        let mut resid: Vec<f64> = candidates
            .iter()
            .map(|&j| diag[j] - self.gq[against..].iter().map(|v| v[j] * v[j]).sum::<f64>())
            .collect();
        let mut used = vec![false; candidates.len()];
        let mut added = 0;
        loop {
            let mut best = None;
            let mut best_ratio = tol;
            for (c, &j) in candidates.iter().enumerate() {
                if used[c] || !(diag[j] > 0.0) {
                    continue;
                }
                let ratio = resid[c] / diag[j];
                if ratio > best_ratio {
                    best_ratio = ratio;
                    best = Some(c);
                }
            }
            let Some(c) = best else { break };
            used[c] = true;
            let j = candidates[c];
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            // two classical Gram-Schmidt passes
            for _ in 0..2 {
                let coeffs: Vec<f64> = self.gq[against..].iter().map(|gqk| dot(gqk, &v)).collect();
                for (qk, ck) in self.q[against..].iter().zip(coeffs) {
                    v.iter_mut().zip(qk).for_each(|(x, y)| *x -= ck * y);
                }
            }
            let gv = self.g.mul_vec(&v);
            let nrm = dot(&v, &gv).sqrt();
            if !(nrm > 0.0) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nrm);
            let gv: Vec<f64> = gv.into_iter().map(|x| x / nrm).collect();
            for (c2, &j2) in candidates.iter().enumerate() {
                resid[c2] -= gv[j2] * gv[j2];
            }
            self.q.push(v);
            self.gq.push(gv);
            added += 1;
        }
        added
    }
}

/// Removes near-linear dependence from a coarse space with Gram matrix `G`.
///
/// Boundary dofs are kept as they are. Explicit dofs are orthonormalized
/// among themselves, then implicit dofs against the explicit ones, so the
/// mass matrix in the new basis is block diagonal between the two groups
/// and explicit functions stay combinations of fracture-free functions. A
/// dof is dropped when the part of it outside the span already built has
/// relative squared `G`-norm below `tol`.
pub fn reduce_basis(g: &SparseMatrix, kinds: &[DofKind], tol: f64) -> Result<ReducedBasis> {
    let n = g.n_rows();
    if !g.is_square() || kinds.len() != n {
        return Err(Error::Dimension(format!("Gram matrix {}x{} with {} dof kinds", g.n_rows(), g.n_cols(), kinds.len())));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Config(format!("dependence tolerance must lie in (0, 1), got {tol}")));
    }
    let of_kind = |k: DofKind| (0..n).filter(|&i| kinds[i] == k).collect::<Vec<_>>();
    let boundary = of_kind(DofKind::Boundary);
    let explicit = of_kind(DofKind::Explicit);
    let implicit = of_kind(DofKind::Implicit);

    let mut b = Builder { g, q: Vec::new(), gq: Vec::new() };
    let n_e = b.add_group(&explicit, 0, tol);
    let n_i = b.add_group(&implicit, 0, tol);
    let k = boundary.len() + n_e + n_i;
    let mut t = DMatrix::zeros(n, k);
    let mut out_kinds = Vec::with_capacity(k);
    for (c, &j) in boundary.iter().enumerate() {
        t[(j, c)] = 1.0;
        out_kinds.push(DofKind::Boundary);
    }
    for (c, v) in b.q.iter().enumerate() {
        t.column_mut(boundary.len() + c).copy_from_slice(v);
        out_kinds.push(if c < n_e { DofKind::Explicit } else { DofKind::Implicit });
    }
    let dropped = n - k;
    if dropped > 0 {
        log::info!("coarse basis: dropped {dropped} of {n} dofs as numerically dependent");
    }
    Ok(ReducedBasis { t, kinds: out_kinds, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_function_is_dropped() {
        let g = SparseMatrix::from_dense(&nalgebra::dmatrix![2.0, 2.0, 0.5; 2.0, 2.0, 0.5; 0.5, 0.5, 1.0]);
        let r = reduce_basis(&g, &[DofKind::Explicit, DofKind::Explicit, DofKind::Implicit], 1e-10).unwrap();
        assert_eq!(r.dropped, 1);
        let gt = r.t.transpose() * g.to_dense() * &r.t;
        assert!((gt - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert_eq!(r.kinds, vec![DofKind::Explicit, DofKind::Implicit]);
    }

    #[test]
    fn explicit_columns_use_explicit_dofs_only() {
        let g = SparseMatrix::from_dense(&nalgebra::dmatrix![2.0, 0.3, 0.1; 0.3, 1.0, 0.2; 0.1, 0.2, 3.0]);
        let kinds = [DofKind::Implicit, DofKind::Explicit, DofKind::Explicit];
        let r = reduce_basis(&g, &kinds, 1e-12).unwrap();
        assert_eq!(r.dropped, 0);
        for (c, k) in r.kinds.iter().enumerate() {
            if *k == DofKind::Explicit {
                assert_eq!(r.t[(0, c)], 0.0);
            }
        }
        let gt = r.t.transpose() * g.to_dense() * &r.t;
        assert!((gt - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }
}
