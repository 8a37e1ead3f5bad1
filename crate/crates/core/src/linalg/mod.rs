//! Sparse and dense numerical kernels shared by every solver stage.

mod csr;
mod eig;
mod lu;
mod solve;
mod subspace;
mod tridiag;

pub use csr::{triple_product, SparseMatrix};
pub use eig::{cholesky, eig_sym_generalized, genmax_eigenvalue, genmax_eigenvalue_dense, DenseEigResult, GenMaxEstimate};
pub use lu::SparseLu;
pub use subspace::{eig_sym_sparse, SubspaceOptions};
pub use solve::{
    conjugate_gradient, dot, norm2, relative_residual, solve_linear, solve_refined, SolveOptions, SolverMethod,
};
