use crate::error::{Error, Result};
use crate::fem::assemble_unit_forms;
use crate::geometry::FineMesh;
use crate::linalg::{solve_linear, SolveOptions};

/// Nodal sampling density on the fine mesh, normalized to unit integral.
#[derive(Clone, Debug)]
pub struct DensityField {
    pub values: Vec<f64>,
    /// Factor the raw solution was divided by.
    pub normalization: f64,
}

impl DensityField {
    /// Uniform density `1 / |Ω|`.
    pub fn uniform(mesh: &FineMesh) -> Self {
        let area = mesh.area();
        DensityField { values: vec![1.0 / area; mesh.n_vertices()], normalization: area }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫_Ω ρ dx` of the piecewise-linear field.
    pub fn integral(&self, mesh: &FineMesh) -> f64 {
        (0..mesh.n_triangles())
            .map(|t| mesh.triangle_area(t) / 3.0 * mesh.triangles[t].iter().map(|&v| self.values[v]).sum::<f64>())
            .sum()
    }
}

/// Smoothed fracture indicator: solves `(β K + M) ρ = M f` with natural
/// boundary conditions, where `f = f_fracture` on fracture vertices and
/// `f_background` elsewhere, then normalizes.
pub fn compute_density(mesh: &FineMesh, beta: f64, f_fracture: f64, f_background: f64) -> Result<DensityField> {
    if !(beta > 0.0) {
        return Err(Error::Config(format!("density smoothing parameter must be positive, got {beta}")));
    }
    let (m1, k1) = assemble_unit_forms(mesh)?;
    let on_fracture = mesh.fracture_vertex_mask();
    let f: Vec<f64> = on_fracture.iter().map(|&on| if on { f_fracture } else { f_background }).collect();
    let lhs = m1.add_scaled(1.0, &k1, beta)?;
    let rhs = m1.mul_vec(&f);
    let rho = solve_linear(&lhs, &rhs, &SolveOptions::default())?;
    let mut field = DensityField { values: rho, normalization: 1.0 };
    let total = field.integral(mesh);
    if !(total > 0.0) {
        return Err(Error::Config(format!("density integrates to {total}")));
    }
    field.values.iter_mut().for_each(|v| *v /= total);
    field.normalization = total;
    if let Some(i) = field.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Config(format!("density is not positive at vertex {i}")));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_structured_trimesh, DirichletSide};

    #[test]
    fn constant_without_fractures() {
        let mesh = build_structured_trimesh([80.0, 80.0], 16, 16, DirichletSide::Left).unwrap();
        let rho = compute_density(&mesh, 5.0, 1e5, 1.0).unwrap();
        for v in &rho.values {
            assert!((v - 1.0 / 6400.0).abs() < 1e-12 / 6400.0 * 1e3);
        }
        assert!((rho.integral(&mesh) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_positive_beta() {
        let mesh = build_structured_trimesh([1.0, 1.0], 2, 2, DirichletSide::Left).unwrap();
        assert!(compute_density(&mesh, 0.0, 1e5, 1.0).is_err());
    }
}
