use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::trajectory::{Scheme, Trajectory};

/// Relative errors of `u_test` against `u_ref` in percent: the L2 norm and
/// the H1 seminorm, measured with the unit-coefficient mass `m1` and
/// stiffness `k1`.
pub fn relative_errors(u_ref: &[f64], u_test: &[f64], m1: &SparseMatrix, k1: &SparseMatrix) -> Result<(f64, f64)> {
    if u_ref.len() != u_test.len() || u_ref.len() != m1.n_rows() || u_ref.len() != k1.n_rows() {
        return Err(Error::Dimension(format!(
            "error between fields of length {} and {} with {}x{} norm matrices",
            u_ref.len(),
            u_test.len(),
            m1.n_rows(),
            k1.n_rows()
        )));
    }
    let e: Vec<f64> = u_ref.iter().zip(u_test).map(|(a, b)| a - b).collect();
    let rel = |k: &SparseMatrix| -> Result<f64> {
        let den = k.quad_form(u_ref);
        if !(den > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(100.0 * (k.quad_form(&e).max(0.0) / den).sqrt())
    };
    Ok((rel(m1)?, rel(k1)?))
}

/// Per-step relative errors of one scheme against another.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorSeries {
    pub reference: Scheme,
    pub test: Scheme,
    pub times: Vec<f64>,
    pub l2_percent: Vec<f64>,
    pub h1_percent: Vec<f64>,
}

impl ErrorSeries {
    /// Errors at every stored time after the initial one.
    pub fn between(reference: &Trajectory, test: &Trajectory, m1: &SparseMatrix, k1: &SparseMatrix) -> Result<Self> {
        if reference.times != test.times {
            return Err(Error::Dimension(format!(
                "{} and {} trajectories have different time grids",
                reference.scheme, test.scheme
            )));
        }
        let mut s = ErrorSeries {
            reference: reference.scheme,
            test: test.scheme,
            times: Vec::new(),
            l2_percent: Vec::new(),
            h1_percent: Vec::new(),
        };
        for n in 1..reference.len() {
            let (l2, h1) = relative_errors(&reference.snapshots[n], &test.snapshots[n], m1, k1)?;
            s.times.push(reference.times[n]);
            s.l2_percent.push(l2);
            s.h1_percent.push(h1);
        }
        Ok(s)
    }

    pub fn max_l2(&self) -> f64 {
        self.l2_percent.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_h1(&self) -> f64 {
        self.h1_percent.iter().copied().fold(0.0, f64::max)
    }

    pub fn file_stem(&self) -> String {
        format!("errors_{}_vs_{}", self.reference, self.test)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_fields_have_zero_error() {
        let m = SparseMatrix::identity(3);
        let (l2, h1) = relative_errors(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &m, &m).unwrap();
        assert_eq!((l2, h1), (0.0, 0.0));
    }

    #[test]
    fn doubled_field_is_one_hundred_percent() {
        let m = SparseMatrix::identity(2);
        let (l2, _) = relative_errors(&[1.0, -2.0], &[2.0, -4.0], &m, &m).unwrap();
        assert!((l2 - 100.0).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let m = SparseMatrix::identity(2);
        assert!(matches!(relative_errors(&[0.0, 0.0], &[1.0, 0.0], &m, &m), Err(Error::ZeroNorm)));
    }
}
