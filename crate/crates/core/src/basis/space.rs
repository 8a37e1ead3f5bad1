use crate::cloud::{NodeClass, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::{distance, FineMesh};
use crate::linalg::SparseMatrix;

use super::{kernel_value, local_matrices, spectral_basis, LocalCoefficients, LocalSpectrum};

/// Shepard partition of unity `W[i, j] = φ_i(v_j) / Σ_l φ_l(v_j)`, with
/// `φ_i` restricted to the vertices of support `i`.
pub fn shepard_weights(cloud: &PointCloud, mesh: &FineMesh) -> Result<SparseMatrix> {
    let nf = mesh.n_vertices();
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    let mut denom = vec![0.0; nf];
    for (i, ((p, &r), s)) in cloud.points.iter().zip(&cloud.radii).zip(&cloud.supports).enumerate() {
        for &v in &s.vertices {
            let phi = kernel_value(distance(mesh.vertices[v], *p) / r);
            if phi > 0.0 {
                raw.push((i, v, phi));
                denom[v] += phi;
            }
        }
    }
    if let Some(v) = denom.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Uncovered(v));
    }
    for t in raw.iter_mut() {
        t.2 /= denom[t.1];
    }
    SparseMatrix::from_triplets(&raw, cloud.len(), nf)
}

/// Local eigenproblems of every support (`m` pairs each, fewer on tiny supports).
pub fn compute_local_spectra(
    cloud: &PointCloud,
    mesh: &FineMesh,
    coeffs: &LocalCoefficients,
    m: usize,
) -> Result<Vec<LocalSpectrum>> {
    cloud
        .supports
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (a, b) = local_matrices(s, mesh, coeffs)?;
            spectral_basis(&a, &b, m).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("coarse node {i}: {msg}")),
                other => other,
            })
        })
        .collect()
}

/// `R` with row `offset[i] + k` holding `W[i, j] ψ_{i,k}[j]` over support `i`.
pub fn assemble_projection(
    w: &SparseMatrix,
    cloud: &PointCloud,
    spectra: &[LocalSpectrum],
    m: usize,
) -> Result<(SparseMatrix, Vec<usize>)> {
    let mut offsets = Vec::with_capacity(cloud.len() + 1);
    offsets.push(0);
    let mut triplets = Vec::new();
    for (i, (support, spec)) in cloud.supports.iter().zip(spectra).enumerate() {
        let base = *offsets.last().unwrap();
        let mi = m.min(spec.vectors.ncols());
        let (cols, vals) = w.row(i);
        for (&j, &wij) in cols.iter().zip(vals) {
            let Ok(local) = support.vertices.binary_search(&j) else {
                return Err(Error::Structure(format!("weight of node {i} leaks outside its support at vertex {j}")));
            };
            for k in 0..mi {
                let v = wij * spec.vectors[(local, k)];
                if v != 0.0 {
                    triplets.push((base + k, j, v));
                }
            }
        }
        offsets.push(base + mi);
    }
    let rows = *offsets.last().unwrap();
    Ok((SparseMatrix::from_triplets(&triplets, rows, w.n_cols())?, offsets))
}

/// Role of a coarse dof in time stepping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    /// Eigenfunction of a node whose support touches a fracture.
    Implicit,
    /// Eigenfunction of a fracture-free node.
    Explicit,
    /// Fine hat function of a Dirichlet vertex.
    Boundary,
}

impl DofKind {
    /// Boundary dofs carry the penalty and are always stepped implicitly.
    pub fn is_implicit(self) -> bool {
        self != DofKind::Explicit
    }
}

/// Offline multiscale space: local spectra, partition of unity and the
/// projection `R` (coarse dofs × fine vertices).
///
/// With Dirichlet vertices given, node functions are cut to zero there and
/// one hat row per Dirichlet vertex is appended after the node rows.
#[derive(Clone, Debug)]
pub struct MultiscaleSpace {
    pub spectra: Vec<LocalSpectrum>,
    pub w: SparseMatrix,
    pub r: SparseMatrix,
    /// Coarse dofs of node `i` are `dof_offsets[i]..dof_offsets[i + 1]`.
    pub dof_offsets: Vec<usize>,
    pub m: usize,
    pub kinds: Vec<DofKind>,
    pub boundary_vertices: Vec<usize>,
}

impl MultiscaleSpace {
    pub fn build(
        cloud: &PointCloud,
        mesh: &FineMesh,
        coeffs: &LocalCoefficients,
        m: usize,
        boundary_vertices: &[usize],
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("need at least one eigenfunction per node".into()));
        }
        let spectra = compute_local_spectra(cloud, mesh, coeffs, m)?;
        let w = shepard_weights(cloud, mesh)?;
        Self::from_parts(spectra, w, cloud, m, boundary_vertices)
    }

    pub fn from_parts(
        spectra: Vec<LocalSpectrum>,
        w: SparseMatrix,
        cloud: &PointCloud,
        m: usize,
        boundary_vertices: &[usize],
    ) -> Result<Self> {
        let (mut r, dof_offsets) = assemble_projection(&w, cloud, &spectra, m)?;
        let n_nodes_dofs = r.n_rows();
        let mut kinds = vec![DofKind::Implicit; n_nodes_dofs];
        for (i, c) in cloud.classes.iter().enumerate() {
            if *c == NodeClass::Explicit {
                kinds[dof_offsets[i]..dof_offsets[i + 1]].iter_mut().for_each(|k| *k = DofKind::Explicit);
            }
        }
        if !boundary_vertices.is_empty() {
            let nf = r.n_cols();
            let mut keep = vec![true; nf];
            for &v in boundary_vertices {
                if v >= nf {
                    return Err(Error::Dimension(format!("boundary vertex {v} outside {nf} fine vertices")));
                }
                keep[v] = false;
            }
            let mut triplets = r.filter_columns(&keep).to_triplets();
            triplets.extend(boundary_vertices.iter().enumerate().map(|(k, &v)| (n_nodes_dofs + k, v, 1.0)));
            r = SparseMatrix::from_triplets(&triplets, n_nodes_dofs + boundary_vertices.len(), nf)?;
            kinds.extend(std::iter::repeat_n(DofKind::Boundary, boundary_vertices.len()));
        }
        Ok(MultiscaleSpace { spectra, w, r, dof_offsets, m, kinds, boundary_vertices: boundary_vertices.to_vec() })
    }

    /// Same cloud and spectra with only the first `m` eigenfunctions per node.
    pub fn truncated(&self, cloud: &PointCloud, m: usize) -> Result<Self> {
        Self::from_parts(self.spectra.clone(), self.w.clone(), cloud, m, &self.boundary_vertices)
    }

    pub fn n_coarse(&self) -> usize {
        self.r.n_rows()
    }

    pub fn implicit_rows(&self) -> Vec<bool> {
        self.kinds.iter().map(|k| k.is_implicit()).collect()
    }
}
