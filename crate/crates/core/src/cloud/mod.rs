//! Fracture-aware coarse point cloud: sampling density, centroidal Voronoi
//! generators, covering radii, supports and implicit/explicit split.

mod cvt;
mod density;
mod support;

use serde::{Deserialize, Serialize};

pub use cvt::{lloyd_cvt, sample_points, LloydOptions, LloydReport};
pub use density::{compute_density, DensityField};
pub use support::{
    classify_nodes, compute_radii, coverage_depth, extract_support, kernel_denominators, NodeClass, RadiiResult, RadiusOptions,
    Support,
};

use crate::error::{Error, Result};
use crate::geometry::{distance, FineMesh, Point};

/// Knobs of the cloud pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudParams {
    /// Number of coarse nodes.
    pub n_points: usize,
    pub seed: u64,
    /// Density smoothing parameter.
    pub beta: f64,
    pub f_fracture: f64,
    pub f_background: f64,
    pub zeta: f64,
    pub repair_factor: f64,
    pub max_repairs: usize,
    /// Fraction of a radius within which a vertex counts as covered.
    pub coverage_margin: f64,
    /// Radius floor in units of the longest fine-mesh edge.
    pub min_radius_cells: f64,
    pub lloyd_iters: usize,
    pub lloyd_tol: f64,
    /// Defaults to `max(200 N, 20000)`.
    pub samples_per_iter: Option<usize>,
}

impl Default for CloudParams {
    fn default() -> Self {
        CloudParams {
            n_points: 225,
            seed: 42,
            beta: 5.0,
            f_fracture: 1e5,
            f_background: 1.0,
            zeta: 1.25,
            repair_factor: 1.1,
            max_repairs: 20,
            coverage_margin: 0.75,
            min_radius_cells: 4.0,
            lloyd_iters: 40,
            lloyd_tol: 1e-3,
            samples_per_iter: None,
        }
    }
}

impl CloudParams {
    pub const MIN_SAMPLES_PER_ITER: usize = 20_000;

    pub fn resolved_samples_per_iter(&self) -> usize {
        self.samples_per_iter.unwrap_or((200 * self.n_points).max(Self::MIN_SAMPLES_PER_ITER))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::Config("cloud needs at least one point".into()));
        }
        if !(self.beta > 0.0 && self.zeta > 0.0 && self.repair_factor > 1.0 && self.lloyd_tol >= 0.0) {
            return Err(Error::Config("cloud parameters beta, zeta must be positive and repair_factor > 1".into()));
        }
        Ok(())
    }
}

/// Coarse nodes with their supports and time-integration class.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub supports: Vec<Support>,
    pub classes: Vec<NodeClass>,
}

impl PointCloud {
    /// Computes supports and classes for given points and radii, without repair.
    pub fn from_points(points: Vec<Point>, radii: Vec<f64>, mesh: &FineMesh) -> Result<Self> {
        let supports = points
            .iter()
            .zip(&radii)
            .enumerate()
            .map(|(i, (&p, &r))| {
                extract_support(p, r, mesh).map_err(|e| match e {
                    Error::EmptySupport { radius, .. } => Error::EmptySupport { node: i, radius },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let classes = classify_nodes(&supports, mesh);
        Ok(PointCloud { points, radii, supports, classes })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_implicit(&self) -> usize {
        self.classes.iter().filter(|&&c| c == NodeClass::Implicit).count()
    }

    pub fn n_explicit(&self) -> usize {
        self.len() - self.n_implicit()
    }

    /// Marks every node implicit (degenerate split).
    pub fn force_all_implicit(&mut self) {
        self.classes.iter_mut().for_each(|c| *c = NodeClass::Implicit);
    }

    /// Every fine vertex lies in some support and within that node's radius.
    pub fn check_coverage(&self, mesh: &FineMesh) -> Result<()> {
        let mut covered = vec![false; mesh.n_vertices()];
        for ((p, &r), s) in self.points.iter().zip(&self.radii).zip(&self.supports) {
            for &v in &s.vertices {
                if distance(mesh.vertices[v], *p) <= r {
                    covered[v] = true;
                }
            }
        }
        match covered.iter().position(|c| !c) {
            Some(v) => Err(Error::Uncovered(v)),
            None => Ok(()),
        }
    }
}

/// Density, sampling, Lloyd, radii and classification in one pass.
#[derive(Clone, Debug)]
pub struct CloudBuild {
    pub cloud: PointCloud,
    pub density: DensityField,
    pub lloyd: LloydReport,
    pub repairs: usize,
}

pub fn build_point_cloud(mesh: &FineMesh, params: &CloudParams) -> Result<CloudBuild> {
    params.validate()?;
    let density = compute_density(mesh, params.beta, params.f_fracture, params.f_background)?;
    let initial = sample_points(&density, mesh, params.n_points, params.seed);
    let lloyd = lloyd_cvt(
        &initial,
        &density,
        mesh,
        &LloydOptions {
            max_iters: params.lloyd_iters,
            tol: params.lloyd_tol,
            samples_per_iter: params.resolved_samples_per_iter(),
            seed: params.seed ^ 0x5eed,
        },
    );
    let radius_opts = RadiusOptions {
        zeta: params.zeta,
        repair_factor: params.repair_factor,
        max_repairs: params.max_repairs,
        coverage_margin: params.coverage_margin,
        min_radius: params.min_radius_cells * mesh.cell_diameter(),
    };
    let RadiiResult { radii, supports, repairs } = compute_radii(&lloyd.points, mesh, &radius_opts)?;
    let classes = classify_nodes(&supports, mesh);
    let cloud = PointCloud { points: lloyd.points.clone(), radii, supports, classes };
    log::info!(
        "point cloud: N = {}, N_I = {}, N_E = {}, lloyd iterations = {}, radius repairs = {}",
        cloud.len(),
        cloud.n_implicit(),
        cloud.n_explicit(),
        lloyd.iterations,
        repairs
    );
    Ok(CloudBuild { cloud, density, lloyd, repairs })
}
