use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::linalg::SolveOptions;
use crate::trajectory::{Scheme, Trajectory};

use super::{reconstruct_fine, CoarseProjection, CoarseSystem};

/// One-step map `L p' = E p + τ F` with `L` factored once.
pub struct CoarseStepper<'a> {
    sys: &'a CoarseSystem,
    lhs: DMatrix<f64>,
    rhs: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lhs_norm: f64,
    factorizations: usize,
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl<'a> CoarseStepper<'a> {
    /// Backward Euler: `(M + τ A) p' = M p + τ F`.
    pub fn implicit(sys: &'a CoarseSystem) -> Result<Self> {
        let lhs = &sys.m + &sys.a * sys.tau;
        Self::with(sys, lhs, sys.m.clone())
    }

    /// `(M + τ(A Π_I + P)) p' = (M − τ A Π_E) p + τ F` with `A` the physical
    /// stiffness, `P` the penalty and `Π_I`, `Π_E` keeping the implicit and
    /// explicit columns.
    pub fn partial(sys: &'a CoarseSystem) -> Result<Self> {
        let mut a_i = sys.a_phys.clone();
        let mut a_e = sys.a_phys.clone();
        for (j, &imp) in sys.implicit.iter().enumerate() {
            if imp {
                a_e.column_mut(j).fill(0.0);
            } else {
                a_i.column_mut(j).fill(0.0);
            }
        }
        let lhs = &sys.m + (a_i + &sys.penalty) * sys.tau;
        let rhs = &sys.m - a_e * sys.tau;
        Self::with(sys, lhs, rhs).map_err(|e| match e {
            Error::Singular(col) => Error::Config(format!(
                "partially explicit system singular at column {col} (tau = {}, {} implicit / {} explicit dofs)",
                sys.tau,
                sys.n_implicit(),
                sys.dim() - sys.n_implicit()
            )),
            other => other,
        })
    }

    /// Every physical dof explicit; diagnostic only.
    pub fn explicit_diagnostic(sys: &'a CoarseSystem) -> Result<Self> {
        let lhs = &sys.m + &sys.penalty * sys.tau;
        let rhs = &sys.m - &sys.a_phys * sys.tau;
        Self::with(sys, lhs, rhs)
    }

    fn with(sys: &'a CoarseSystem, lhs: DMatrix<f64>, rhs: DMatrix<f64>) -> Result<Self> {
        let lu = lhs.clone().lu();
        let u = lu.u();
        if let Some(col) = (0..u.nrows()).find(|&i| u[(i, i)] == 0.0 || !u[(i, i)].is_finite()) {
            return Err(Error::Singular(col));
        }
        let lhs_norm = lhs.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        Ok(CoarseStepper { sys, lhs, rhs, lu, lhs_norm, factorizations: 1 })
    }

    pub fn for_scheme(sys: &'a CoarseSystem, scheme: Scheme) -> Result<Self> {
        match scheme {
            Scheme::MsImplicit => Self::implicit(sys),
            Scheme::MsPartial => Self::partial(sys),
            Scheme::MsExplicitDiag => Self::explicit_diagnostic(sys),
            Scheme::Fine => Err(Error::Config("the fine scheme has no coarse stepper".into())),
        }
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn lhs(&self) -> &DMatrix<f64> {
        &self.lhs
    }

    pub fn step(&self, p: &[f64]) -> Result<Vec<f64>> {
        let b = &self.rhs * DVector::from_column_slice(p) + DVector::from_column_slice(&self.sys.f) * self.sys.tau;
        let mut x = self.lu.solve(&b).ok_or(Error::Singular(0))?;
        let tol = SolveOptions::default().tol;
        for refinement in 0..=3 {
            let r = &b - &self.lhs * &x;
            let scale = self.lhs_norm * inf_norm(x.as_slice()) + inf_norm(b.as_slice());
            let res = if scale > 0.0 { inf_norm(r.as_slice()) / scale } else { 0.0 };
            if res <= tol {
                return Ok(x.data.into());
            }
            if refinement == 3 {
                return Err(Error::NoConvergence { iterations: 3, residual: res });
            }
            x += self.lu.solve(&r).ok_or(Error::Singular(0))?;
        }
        unreachable!()
    }
}

/// Outcome of one coarse time integration.
#[derive(Clone, Debug)]
pub struct CoarseRun {
    /// Reconstructed fine fields `Rᵀ T p_c` at every time.
    pub trajectory: Trajectory,
    pub final_coarse: Vec<f64>,
    pub factorizations: usize,
}

/// Runs `n_steps` coarse steps from `p_c0`.
pub fn run_coarse(
    sys: &CoarseSystem,
    proj: &CoarseProjection,
    p_c0: &[f64],
    scheme: Scheme,
    n_steps: usize,
) -> Result<CoarseRun> {
    let stepper = CoarseStepper::for_scheme(sys, scheme)?;
    let mut trajectory = Trajectory::new(scheme);
    let mut p = p_c0.to_vec();
    trajectory.push(0.0, reconstruct_fine(proj, &p));
    for n in 1..=n_steps {
        p = stepper.step(&p)?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("{} solution is not finite at step {n}", scheme.label())));
        }
        trajectory.push(n as f64 * sys.tau, reconstruct_fine(proj, &p));
    }
    Ok(CoarseRun { trajectory, final_coarse: p, factorizations: stepper.factorizations() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn hand_system(implicit: Vec<bool>) -> CoarseSystem {
        let m = dmatrix![4.0, 1.0, 0.0; 1.0, 4.0, 1.0; 0.0, 1.0, 4.0];
        let a = dmatrix![2.0, -1.0, -1.0; -1.0, 2.0, -1.0; -1.0, -1.0, 2.0];
        CoarseSystem::from_matrices(m, a, DMatrix::zeros(3, 3), vec![0.5, 0.0, -0.25], 0.7)
            .unwrap()
            .with_implicit(implicit)
            .unwrap()
    }

    #[test]
    fn zero_stiffness_is_stationary() {
        let z = DMatrix::zeros(2, 2);
        let sys = CoarseSystem::from_matrices(DMatrix::identity(2, 2), z.clone(), z, vec![0.0; 2], 1.0).unwrap();
        let s = CoarseStepper::implicit(&sys).unwrap();
        assert_eq!(s.step(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn all_implicit_partial_matches_implicit() {
        let sys = hand_system(vec![true; 3]);
        let p = [1.0, -2.0, 0.5];
        let a = CoarseStepper::implicit(&sys).unwrap().step(&p).unwrap();
        let b = CoarseStepper::partial(&sys).unwrap().step(&p).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn no_implicit_dofs_is_forward_euler() {
        let sys = hand_system(vec![false; 3]);
        let p = [1.0, -2.0, 0.5];
        let got = CoarseStepper::partial(&sys).unwrap().step(&p).unwrap();
        let pv = DVector::from_column_slice(&p);
        let f = DVector::from_column_slice(&sys.f);
        let rhs = (&sys.m - &sys.a * sys.tau) * pv + f * sys.tau;
        let want = sys.m.clone().lu().solve(&rhs).unwrap();
        assert!(got.iter().zip(want.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn mixed_split_matches_block_oracle() {
        let sys = hand_system(vec![true, false, true]);
        let p = [1.0, -2.0, 0.5];
        let got = CoarseStepper::partial(&sys).unwrap().step(&p).unwrap();
        // Π_I p' + Π_E p with the middle column explicit, written out by hand
        let (m, a, t) = (&sys.m, &sys.a, sys.tau);
        let lhs = dmatrix![
            m[(0, 0)] + t * a[(0, 0)], m[(0, 1)], m[(0, 2)] + t * a[(0, 2)];
            m[(1, 0)] + t * a[(1, 0)], m[(1, 1)], m[(1, 2)] + t * a[(1, 2)];
            m[(2, 0)] + t * a[(2, 0)], m[(2, 1)], m[(2, 2)] + t * a[(2, 2)]
        ];
        let rhs: Vec<f64> = (0..3).map(|i| (0..3).map(|j| m[(i, j)] * p[j]).sum::<f64>() - t * a[(i, 1)] * p[1] + t * sys.f[i]).collect();
        let want = lhs.lu().solve(&DVector::from_vec(rhs)).unwrap();
        assert!(got.iter().zip(want.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn run_factors_once() {
        let sys = hand_system(vec![true, false, true]);
        let run = run_coarse(&sys, &CoarseProjection::identity(3), &[1.0; 3], Scheme::MsPartial, 5).unwrap();
        assert_eq!(run.factorizations, 1);
        assert_eq!(run.trajectory.len(), 6);
    }
}
