use crate::error::Result;
use crate::geometry::FineMesh;
use crate::linalg::{solve_linear, solve_refined, SolveOptions, SparseLu, SparseMatrix};
use crate::trajectory::{Scheme, Trajectory};

use super::{assemble_mass, assemble_stiffness, assemble_unit_forms, MaterialParams};

/// Penalty weight relative to the largest stiffness diagonal.
pub const PENALTY_FACTOR: f64 = 1e12;

/// Fine-grid matrices of the fully discrete problem.
#[derive(Clone, Debug)]
pub struct FineSystem {
    /// Mass matrix.
    pub m: SparseMatrix,
    /// Stiffness with the Dirichlet penalty on the diagonal.
    pub a: SparseMatrix,
    /// Stiffness without the penalty.
    pub a_phys: SparseMatrix,
    /// Diagonal penalty matrix, `a = a_phys + penalty`.
    pub penalty: SparseMatrix,
    /// Penalty forcing `κ g` on Dirichlet nodes.
    pub f: Vec<f64>,
    /// Unit-coefficient bulk mass, for L2 norms.
    pub m1: SparseMatrix,
    /// Unit-coefficient bulk stiffness, for the H1 seminorm.
    pub k1: SparseMatrix,
    pub dirichlet_nodes: Vec<usize>,
    pub kappa: f64,
}

impl FineSystem {
    pub fn assemble(mesh: &FineMesh, params: &MaterialParams) -> Result<Self> {
        params.validate()?;
        let m = assemble_mass(mesh, params)?;
        let a_phys = assemble_stiffness(mesh, params)?;
        let (m1, k1) = assemble_unit_forms(mesh)?;
        let dirichlet_nodes = mesh.dirichlet_nodes();
        let kappa = PENALTY_FACTOR * a_phys.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let (a, f) = apply_dirichlet_penalty(&a_phys, &vec![0.0; mesh.n_vertices()], &dirichlet_nodes, params.g, kappa);
        let mut pdiag = vec![0.0; mesh.n_vertices()];
        for &d in &dirichlet_nodes {
            pdiag[d] = kappa;
        }
        Ok(FineSystem { m, a, a_phys, penalty: SparseMatrix::from_diagonal(&pdiag), f, m1, k1, dirichlet_nodes, kappa })
    }

    pub fn dim(&self) -> usize {
        self.m.n_rows()
    }
}

/// Adds `κ` to each Dirichlet diagonal and `κ g` to the matching forcing entry.
pub fn apply_dirichlet_penalty(
    a: &SparseMatrix,
    f: &[f64],
    dirichlet_nodes: &[usize],
    g: f64,
    kappa: f64,
) -> (SparseMatrix, Vec<f64>) {
    let mut delta = vec![0.0; a.n_rows()];
    let mut f = f.to_vec();
    for &d in dirichlet_nodes {
        delta[d] += kappa;
        f[d] += kappa * g;
    }
    if dirichlet_nodes.is_empty() {
        return (a.clone(), f);
    }
    (a.add_diagonal(&delta), f)
}

/// One backward Euler step `(M + τA) p' = M p + τF`, factoring on every call.
pub fn step_implicit(m: &SparseMatrix, a: &SparseMatrix, f: &[f64], p: &[f64], tau: f64) -> Result<Vec<f64>> {
    let lhs = m.add_scaled(1.0, a, tau)?;
    let rhs = implicit_rhs(m, f, p, tau);
    solve_linear(&lhs, &rhs, &SolveOptions::default())
}

fn implicit_rhs(m: &SparseMatrix, f: &[f64], p: &[f64], tau: f64) -> Vec<f64> {
    let mut rhs = m.mul_vec(p);
    rhs.iter_mut().zip(f).for_each(|(r, fi)| *r += tau * fi);
    rhs
}

/// Backward Euler with the system matrix factored once.
pub struct ImplicitStepper<'a> {
    m: &'a SparseMatrix,
    f: &'a [f64],
    lhs: SparseMatrix,
    lu: SparseLu,
    tau: f64,
    tol: f64,
}

impl<'a> ImplicitStepper<'a> {
    pub fn new(m: &'a SparseMatrix, a: &SparseMatrix, f: &'a [f64], tau: f64) -> Result<Self> {
        let lhs = m.add_scaled(1.0, a, tau)?;
        let lu = SparseLu::factor(&lhs)?;
        Ok(ImplicitStepper { m, f, lhs, lu, tau, tol: SolveOptions::default().tol })
    }

    pub fn step(&self, p: &[f64]) -> Result<Vec<f64>> {
        let rhs = implicit_rhs(self.m, self.f, p, self.tau);
        solve_refined(&self.lhs, &self.lu, &rhs, self.tol)
    }
}

/// Fine-grid reference trajectory: `p0` everywhere at `t = 0`, then
/// `n_steps` implicit steps.
pub fn run_fine_reference(mesh: &FineMesh, params: &MaterialParams) -> Result<Trajectory> {
    let sys = FineSystem::assemble(mesh, params)?;
    run_fine_system(&sys, params)
}

pub fn run_fine_system(sys: &FineSystem, params: &MaterialParams) -> Result<Trajectory> {
    let mut traj = Trajectory::new(Scheme::Fine);
    let mut p = vec![params.p0; sys.dim()];
    traj.push(0.0, p.clone());
    if params.n_steps == 0 {
        return Ok(traj);
    }
    let stepper = ImplicitStepper::new(&sys.m, &sys.a, &sys.f, params.tau)?;
    for n in 1..=params.n_steps {
        p = stepper.step(&p)?;
        traj.push(n as f64 * params.tau, p.clone());
    }
    Ok(traj)
}
