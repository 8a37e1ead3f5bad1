use crate::error::{Error, Result};
use crate::geometry::{FineMesh, Point};
use crate::linalg::SparseMatrix;

use super::MaterialParams;

/// Consistent P1 mass matrix of a triangle with the given area.
pub fn triangle_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// P1 stiffness matrix `∫ ∇φ_j · ∇φ_i` of a counter-clockwise triangle.
pub fn triangle_stiffness(p: [Point; 3]) -> [[f64; 3]; 3] {
    let area = crate::geometry::signed_area(p[0], p[1], p[2]);
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    k
}

pub fn edge_mass(len: f64) -> [[f64; 2]; 2] {
    [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]]
}

pub fn edge_stiffness(len: f64) -> [[f64; 2]; 2] {
    [[1.0 / len, -1.0 / len], [-1.0 / len, 1.0 / len]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Mass,
    Stiffness,
}

/// Triplets of `bulk ∫_T (form) + frac ∫_e (form)` over the given triangles
/// and fracture edges. `local` maps global vertices to output indices.
pub fn assemble_triplets<F>(
    mesh: &FineMesh,
    triangles: impl IntoIterator<Item = usize>,
    fracture_edges: impl IntoIterator<Item = [usize; 2]>,
    form: Form,
    bulk: f64,
    frac: f64,
    local: F,
) -> Result<Vec<(usize, usize, f64)>>
where
    F: Fn(usize) -> usize,
{
    let mut triplets = Vec::new();
    for t in triangles {
        let tri = mesh.triangles[t];
        let area = mesh.triangle_area(t);
        if !(area > 0.0) {
            return Err(Error::DegenerateElement { element: t, area });
        }
        let ke = match form {
            Form::Mass => triangle_mass(area),
            Form::Stiffness => triangle_stiffness(tri.map(|v| mesh.vertices[v])),
        };
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((local(tri[a]), local(tri[b]), bulk * ke[a][b]));
            }
        }
    }
    if frac != 0.0 {
        for e in fracture_edges {
            let len = mesh.edge_length(e);
            let ke = match form {
                Form::Mass => edge_mass(len),
                Form::Stiffness => edge_stiffness(len),
            };
            for a in 0..2 {
                for b in 0..2 {
                    triplets.push((local(e[a]), local(e[b]), frac * ke[a][b]));
                }
            }
        }
    }
    Ok(triplets)
}

fn assemble_global(mesh: &FineMesh, form: Form, bulk: f64, frac: f64) -> Result<SparseMatrix> {
    let n = mesh.n_vertices();
    let t = assemble_triplets(mesh, 0..mesh.n_triangles(), mesh.fracture_edges.iter().copied(), form, bulk, frac, |v| v)?;
    SparseMatrix::from_triplets(&t, n, n)
}

/// `∫_Ω c_m φ_j φ_i + α ∫_γ c_f φ̂_j φ̂_i`
pub fn assemble_mass(mesh: &FineMesh, params: &MaterialParams) -> Result<SparseMatrix> {
    assemble_global(mesh, Form::Mass, params.c_m, params.alpha * params.c_f)
}

/// `∫_Ω (k_m/μ) ∇φ_j·∇φ_i + α ∫_γ (k_f/μ) φ̂_j' φ̂_i'`
pub fn assemble_stiffness(mesh: &FineMesh, params: &MaterialParams) -> Result<SparseMatrix> {
    assemble_global(mesh, Form::Stiffness, params.k_m / params.mu, params.alpha * params.k_f / params.mu)
}

/// Unit-coefficient bulk mass and stiffness, used for error norms.
pub fn assemble_unit_forms(mesh: &FineMesh) -> Result<(SparseMatrix, SparseMatrix)> {
    Ok((assemble_global(mesh, Form::Mass, 1.0, 0.0)?, assemble_global(mesh, Form::Stiffness, 1.0, 0.0)?))
}
