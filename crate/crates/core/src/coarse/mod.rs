//! Coarse projection of the fine system, the three coarse time steppers and
//! fine-scale reconstruction.

mod reduce;
mod stepper;

use nalgebra::{DMatrix, DVector};

pub use reduce::{reduce_basis, ReducedBasis};
pub use stepper::{run_coarse, CoarseRun, CoarseStepper};

use crate::basis::{DofKind, MultiscaleSpace};
use crate::error::{Error, Result};
use crate::fem::FineSystem;
use crate::linalg::{genmax_eigenvalue_dense, triple_product, GenMaxEstimate, SparseMatrix};

/// Map between fine vectors and coarse coefficients: fine fields are
/// `Rᵀ T c`, with `T` the identity when no basis reduction was applied.
#[derive(Clone, Debug)]
pub struct CoarseProjection {
    pub r: SparseMatrix,
    pub t: Option<DMatrix<f64>>,
    pub kinds: Vec<DofKind>,
}

impl CoarseProjection {
    /// `R = I`: the coarse space is the fine space, every dof implicit.
    pub fn identity(n: usize) -> Self {
        CoarseProjection { r: SparseMatrix::identity(n), t: None, kinds: vec![DofKind::Implicit; n] }
    }

    pub fn new(r: SparseMatrix, kinds: Vec<DofKind>) -> Result<Self> {
        if kinds.len() != r.n_rows() {
            return Err(Error::Dimension(format!("{} dof kinds for {} projection rows", kinds.len(), r.n_rows())));
        }
        Ok(CoarseProjection { r, t: None, kinds })
    }

    /// Projection of a multiscale space, reduced against near-linear
    /// dependence in the fine mass inner product when `dependence_tol` is set.
    pub fn from_space(space: &MultiscaleSpace, m: &SparseMatrix, dependence_tol: Option<f64>) -> Result<Self> {
        let proj = Self::new(space.r.clone(), space.kinds.clone())?;
        match dependence_tol {
            Some(tol) => proj.reduced(m, tol).map(|(p, _)| p),
            None => Ok(proj),
        }
    }

    /// Applies [`reduce_basis`] with the Gram matrix `R M Rᵀ`.
    pub fn reduced(self, m: &SparseMatrix, tol: f64) -> Result<(Self, usize)> {
        let g = triple_product(&self.r, m)?;
        let red = reduce_basis(&g, &self.kinds, tol)?;
        let dropped = red.dropped;
        Ok((CoarseProjection { r: self.r, t: Some(red.t), kinds: red.kinds }, dropped))
    }

    pub fn dim(&self) -> usize {
        self.t.as_ref().map_or(self.r.n_rows(), |t| t.ncols())
    }

    pub fn n_fine(&self) -> usize {
        self.r.n_cols()
    }

    pub fn implicit_dofs(&self) -> Vec<bool> {
        self.kinds.iter().map(|k| k.is_implicit()).collect()
    }

    /// `Tᵀ R f`.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        let rf = self.r.mul_vec(f);
        match &self.t {
            Some(t) => (t.transpose() * DVector::from_vec(rf)).data.into(),
            None => rf,
        }
    }

    /// `Rᵀ T c`.
    pub fn prolong(&self, c: &[f64]) -> Vec<f64> {
        match &self.t {
            Some(t) => self.r.mul_transpose_vec((t * DVector::from_column_slice(c)).as_slice()),
            None => self.r.mul_transpose_vec(c),
        }
    }

    /// `Tᵀ R A Rᵀ T` as a dense matrix.
    pub fn galerkin(&self, a: &SparseMatrix) -> Result<DMatrix<f64>> {
        let rar = triple_product(&self.r, a)?;
        Ok(match &self.t {
            Some(t) => {
                let left = t.transpose() * rar.to_dense();
                let mut out = left * t;
                symmetrize(&mut out);
                out
            }
            None => rar.to_dense(),
        })
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
}

/// Coarse mass, stiffness and forcing.
///
/// The Dirichlet penalty is kept apart from the physical stiffness so the
/// partially explicit scheme can always treat it implicitly.
#[derive(Clone, Debug)]
pub struct CoarseSystem {
    pub m: DMatrix<f64>,
    /// Full stiffness, `a_phys + penalty`.
    pub a: DMatrix<f64>,
    pub a_phys: DMatrix<f64>,
    pub penalty: DMatrix<f64>,
    pub f: Vec<f64>,
    pub implicit: Vec<bool>,
    pub tau: f64,
}

impl CoarseSystem {
    /// System from already projected matrices; every dof starts implicit.
    pub fn from_matrices(
        m: DMatrix<f64>,
        a_phys: DMatrix<f64>,
        penalty: DMatrix<f64>,
        f: Vec<f64>,
        tau: f64,
    ) -> Result<Self> {
        let n = m.nrows();
        let square = |x: &DMatrix<f64>| x.nrows() == n && x.ncols() == n;
        if !square(&m) || !square(&a_phys) || !square(&penalty) || f.len() != n {
            return Err(Error::Dimension(format!("coarse system of size {n} with mismatched blocks")));
        }
        let a = &a_phys + &penalty;
        Ok(CoarseSystem { m, a, a_phys, penalty, f, implicit: vec![true; n], tau })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_implicit(&self) -> usize {
        self.implicit.iter().filter(|&&b| b).count()
    }

    pub fn with_implicit(mut self, implicit: Vec<bool>) -> Result<Self> {
        if implicit.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "implicit mask of length {} for {} coarse dofs",
                implicit.len(),
                self.dim()
            )));
        }
        self.implicit = implicit;
        Ok(self)
    }
}

/// Galerkin projection of the fine matrices and forcing. The implicit mask
/// follows the projection's dof kinds.
pub fn project_system(proj: &CoarseProjection, sys: &FineSystem, tau: f64) -> Result<CoarseSystem> {
    if proj.n_fine() != sys.dim() {
        return Err(Error::Dimension(format!(
            "projection onto {} fine vertices used with a system of size {}",
            proj.n_fine(),
            sys.dim()
        )));
    }
    CoarseSystem::from_matrices(
        proj.galerkin(&sys.m)?,
        proj.galerkin(&sys.a_phys)?,
        proj.galerkin(&sys.penalty)?,
        proj.restrict(&sys.f),
        tau,
    )?
    .with_implicit(proj.implicit_dofs())
}

/// Mass-weighted least-squares coarse representation of a fine field:
/// solves `M_c c = Tᵀ R M p_h0`.
pub fn project_initial(proj: &CoarseProjection, m: &SparseMatrix, p_h0: &[f64]) -> Result<Vec<f64>> {
    let m_c = proj.galerkin(m)?;
    let rhs = DVector::from_vec(proj.restrict(&m.mul_vec(p_h0)));
    let chol = m_c.cholesky().ok_or_else(|| Error::Config("coarse mass matrix is not positive definite".into()))?;
    Ok(chol.solve(&rhs).data.into())
}

/// Fine-grid field of coarse coefficients.
pub fn reconstruct_fine(proj: &CoarseProjection, p_c: &[f64]) -> Vec<f64> {
    proj.prolong(p_c)
}

/// Which coarse dofs the stable time step is estimated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauSubset {
    All,
    ExplicitBlock,
}

/// Forward Euler stability limit `2 / λ_max(M⁻¹ A)` from the physical
/// stiffness (the penalty is never stepped explicitly).
#[derive(Clone, Copy, Debug)]
pub struct StableTau {
    pub tau: f64,
    pub lambda_max: f64,
    pub estimate: GenMaxEstimate,
    pub n_dofs: usize,
}

pub fn estimate_stable_tau(sys: &CoarseSystem, subset: TauSubset) -> Result<StableTau> {
    let (a, m) = match subset {
        TauSubset::All => (sys.a_phys.clone(), sys.m.clone()),
        TauSubset::ExplicitBlock => {
            let idx: Vec<usize> = (0..sys.dim()).filter(|&i| !sys.implicit[i]).collect();
            (sys.a_phys.select_rows(&idx).select_columns(&idx), sys.m.select_rows(&idx).select_columns(&idx))
        }
    };
    let estimate = genmax_eigenvalue_dense(&a, &m)?;
    let tau = if estimate.value > 0.0 { 2.0 / estimate.value } else { f64::INFINITY };
    Ok(StableTau { tau, lambda_max: estimate.value, estimate, n_dofs: m.nrows() })
}
