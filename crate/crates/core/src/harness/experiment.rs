use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::basis::{LocalCoefficients, MultiscaleSpace};
use crate::cloud::{build_point_cloud, CloudBuild};
use crate::coarse::{
    estimate_stable_tau, project_initial, project_system, run_coarse, CoarseProjection, CoarseSystem, TauSubset,
};
use crate::error::{Error, Result};
use crate::fem::{run_fine_system, FineSystem};
use crate::geometry::{build_structured_trimesh, snap_fractures, FineMesh};
use crate::trajectory::{Scheme, Trajectory};

use super::config::ExperimentConfig;
use super::export::{export_cloud_csv, export_error_csv, export_vtk, fmt_f64};
use super::metrics::ErrorSeries;

/// Scheme pairs whose errors are reported, reference first.
pub const ERROR_PAIRS: [(Scheme, Scheme); 4] = [
    (Scheme::Fine, Scheme::MsImplicit),
    (Scheme::Fine, Scheme::MsPartial),
    (Scheme::MsImplicit, Scheme::MsPartial),
    (Scheme::Fine, Scheme::MsExplicitDiag),
];

/// Structured mesh with the configured fractures snapped onto its edges.
pub fn build_mesh(config: &ExperimentConfig) -> Result<FineMesh> {
    let d = &config.domain;
    let mesh = build_structured_trimesh(d.extent, d.nx, d.ny, d.dirichlet_side)?;
    let fractures = config.fractures()?;
    if fractures.is_empty() {
        Ok(mesh)
    } else {
        snap_fractures(&mesh, &fractures)
    }
}

/// Mesh, fine system, point cloud and multiscale space shared by all
/// schemes of one experiment.
pub struct Setup {
    pub config: ExperimentConfig,
    pub mesh: FineMesh,
    pub fine: FineSystem,
    pub cloud: CloudBuild,
    pub space: MultiscaleSpace,
}

impl Setup {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate().map_err(|e| e.in_stage("config"))?;
        let t = Instant::now();
        let mesh = build_mesh(config).map_err(|e| e.in_stage("mesh"))?;
        let fine = FineSystem::assemble(&mesh, &config.material).map_err(|e| e.in_stage("assembly"))?;
        log::info!("mesh and fine system: {} vertices in {:.2?}", mesh.n_vertices(), t.elapsed());
        let t = Instant::now();
        let mut cloud = build_point_cloud(&mesh, &config.cloud).map_err(|e| e.in_stage("cloud"))?;
        if config.run.all_implicit {
            cloud.cloud.force_all_implicit();
        }
        log::info!("point cloud in {:.2?}", t.elapsed());
        let t = Instant::now();
        let p = &config.material;
        let coeffs = LocalCoefficients { lambda1: p.k_m / p.mu, lambda2: p.k_f / p.mu, alpha: p.alpha };
        let hats = if config.basis.boundary_hats { mesh.dirichlet_nodes() } else { Vec::new() };
        let space = MultiscaleSpace::build(&cloud.cloud, &mesh, &coeffs, config.basis.m, &hats)
            .map_err(|e| e.in_stage("basis"))?;
        log::info!("multiscale space: {} functions in {:.2?}", space.n_coarse(), t.elapsed());
        Ok(Setup { config: config.clone(), mesh, fine, cloud, space })
    }

    /// Coarse model with the first `m` eigenfunctions per node (`m` at most
    /// the configured count).
    pub fn coarse(&self, m: usize) -> Result<CoarseModel> {
        let stage = |e: Error| e.in_stage("coarse");
        let t = Instant::now();
        let truncated;
        let space = if m == self.space.m {
            &self.space
        } else {
            truncated = self.space.truncated(&self.cloud.cloud, m).map_err(stage)?;
            &truncated
        };
        let proj = CoarseProjection::new(space.r.clone(), space.kinds.clone()).map_err(stage)?;
        let (proj, dropped) = match self.config.basis.dependence_tol {
            tol if tol > 0.0 => proj.reduced(&self.fine.m, tol).map_err(stage)?,
            _ => (proj, 0),
        };
        let system = project_system(&proj, &self.fine, self.config.material.tau).map_err(stage)?;
        let p_h0 = vec![self.config.material.p0; self.mesh.n_vertices()];
        let p_c0 = project_initial(&proj, &self.fine.m, &p_h0).map_err(stage)?;
        log::info!("coarse system: {} dofs ({dropped} dropped) in {:.2?}", proj.dim(), t.elapsed());
        Ok(CoarseModel { proj, system, p_c0, dropped })
    }
}

pub struct CoarseModel {
    pub proj: CoarseProjection,
    pub system: CoarseSystem,
    pub p_c0: Vec<f64>,
    /// Functions removed as linearly dependent.
    pub dropped: usize,
}

impl CoarseModel {
    pub fn run(&self, scheme: Scheme, n_steps: usize) -> Result<Trajectory> {
        run_coarse(&self.system, &self.proj, &self.p_c0, scheme, n_steps).map(|r| r.trajectory)
    }
}

/// Forward Euler stability limits of the coarse system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CflReport {
    pub tau: f64,
    pub tau_stable_all: f64,
    /// `None` when no dof is explicit.
    pub tau_stable_explicit: Option<f64>,
    pub coarse_dofs: usize,
    pub explicit_dofs: usize,
}

pub fn cfl_report(system: &CoarseSystem) -> Result<CflReport> {
    let all = estimate_stable_tau(system, TauSubset::All)?;
    let explicit_dofs = system.dim() - system.n_implicit();
    let tau_stable_explicit = if explicit_dofs > 0 {
        Some(estimate_stable_tau(system, TauSubset::ExplicitBlock)?.tau)
    } else {
        None
    };
    Ok(CflReport {
        tau: system.tau,
        tau_stable_all: all.tau,
        tau_stable_explicit,
        coarse_dofs: system.dim(),
        explicit_dofs,
    })
}

/// In-memory result of an experiment.
pub struct Outcome {
    pub trajectories: BTreeMap<Scheme, Trajectory>,
    pub errors: Vec<ErrorSeries>,
    pub cfl: Option<CflReport>,
    pub coarse_dofs: Option<usize>,
    pub dropped: usize,
}

/// Runs every configured scheme and the pairwise errors.
pub fn run_schemes(setup: &Setup) -> Result<Outcome> {
    let cfg = &setup.config;
    let n_steps = cfg.material.n_steps;
    let mut trajectories = BTreeMap::new();
    let mut cfl = None;
    let mut coarse_dofs = None;
    let mut dropped = 0;
    if cfg.run.schemes.contains(&Scheme::Fine) {
        let t = Instant::now();
        let traj = run_fine_system(&setup.fine, &cfg.material).map_err(|e| e.in_stage("fine"))?;
        log::info!("fine: {n_steps} steps in {:.2?}", t.elapsed());
        trajectories.insert(Scheme::Fine, traj);
    }
    let coarse: Vec<Scheme> = cfg.run.schemes.iter().copied().filter(|&s| s != Scheme::Fine).collect();
    if !coarse.is_empty() {
        let model = setup.coarse(cfg.basis.m)?;
        coarse_dofs = Some(model.proj.dim());
        dropped = model.dropped;
        cfl = Some(cfl_report(&model.system).map_err(|e| e.in_stage("cfl"))?);
        for scheme in coarse {
            let t = Instant::now();
            let traj = model.run(scheme, n_steps).map_err(|e| e.in_stage(scheme.label()))?;
            log::info!("{scheme}: {n_steps} steps in {:.2?}", t.elapsed());
            trajectories.insert(scheme, traj);
        }
    }
    let mut errors = Vec::new();
    for (a, b) in ERROR_PAIRS {
        if let (Some(ta), Some(tb)) = (trajectories.get(&a), trajectories.get(&b)) {
            errors.push(ErrorSeries::between(ta, tb, &setup.fine.m1, &setup.fine.k1).map_err(|e| e.in_stage("errors"))?);
        }
    }
    Ok(Outcome { trajectories, errors, cfl, coarse_dofs, dropped })
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    results: ManifestResults,
}

#[derive(Serialize)]
struct ManifestResults {
    t_max: f64,
    snapshot_times: Vec<f64>,
    fine_vertices: usize,
    fine_triangles: usize,
    fracture_edges: usize,
    n_points: usize,
    n_implicit: usize,
    n_explicit: usize,
    lloyd_iterations: usize,
    radius_repairs: usize,
    coarse_dofs: Option<usize>,
    dropped_dofs: usize,
    cfl: Option<CflReport>,
    max_errors: BTreeMap<String, [f64; 2]>,
    files: Vec<String>,
}

/// Writes error series, field snapshots, the cloud dump and `manifest.toml`
/// into `dir`. Returns the written paths.
pub fn write_outputs(setup: &Setup, outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for s in &outcome.errors {
        let path = dir.join(format!("{}.csv", s.file_stem()));
        export_error_csv(s, &path)?;
        files.push(path);
    }
    let tau = setup.config.material.tau;
    for t in setup.config.resolved_snapshot_times() {
        let n = (t / tau).round();
        if !(n >= 0.0 && (n * tau - t).abs() <= 1e-9 * t.abs().max(1.0)) {
            return Err(Error::Config(format!("snapshot time {t} is not a multiple of tau = {tau}")));
        }
        for (scheme, traj) in &outcome.trajectories {
            let field = traj
                .snapshots
                .get(n as usize)
                .ok_or_else(|| Error::Config(format!("snapshot time {t} is past the last step")))?;
            let path = dir.join(format!("pressure_{scheme}_t{}.vtk", fmt_f64(t)));
            export_vtk(&setup.mesh, field, &path)?;
            files.push(path);
        }
    }
    let cloud_path = dir.join("cloud.csv");
    export_cloud_csv(&setup.cloud.cloud, &cloud_path)?;
    files.push(cloud_path);

    let cloud = &setup.cloud.cloud;
    let manifest = Manifest {
        config: &setup.config,
        results: ManifestResults {
            t_max: setup.config.material.t_max(),
            snapshot_times: setup.config.resolved_snapshot_times(),
            fine_vertices: setup.mesh.n_vertices(),
            fine_triangles: setup.mesh.n_triangles(),
            fracture_edges: setup.mesh.fracture_edges.len(),
            n_points: cloud.len(),
            n_implicit: cloud.n_implicit(),
            n_explicit: cloud.n_explicit(),
            lloyd_iterations: setup.cloud.lloyd.iterations,
            radius_repairs: setup.cloud.repairs,
            coarse_dofs: outcome.coarse_dofs,
            dropped_dofs: outcome.dropped,
            cfl: outcome.cfl,
            max_errors: outcome.errors.iter().map(|s| (s.file_stem(), [s.max_l2(), s.max_h1()])).collect(),
            files: files
                .iter()
                .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
                .collect(),
        },
    };
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(files)
}

/// Outputs of [`run_experiment`].
pub struct Report {
    pub n_implicit: usize,
    pub n_explicit: usize,
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
}

/// Full pipeline: setup, all schemes, errors and files under
/// `config.run.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::build(config)?;
    let outcome = run_schemes(&setup)?;
    let files = write_outputs(&setup, &outcome, &config.run.out_dir).map_err(|e| e.in_stage("export"))?;
    Ok(Report { n_implicit: setup.cloud.cloud.n_implicit(), n_explicit: setup.cloud.cloud.n_explicit(), outcome, files })
}

/// Parameters a sweep can vary.
pub const SWEEP_PARAMS: [&str; 5] = ["kf", "km", "tau", "m", "n"];

/// Sets one named parameter on a config.
pub fn set_param(config: &mut ExperimentConfig, name: &str, value: f64) -> Result<()> {
    let count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("`{name}` needs a positive integer, got {v}")))
        }
    };
    match name {
        "kf" => config.material.k_f = value,
        "km" => config.material.k_m = value,
        "tau" => config.material.tau = value,
        "m" => config.basis.m = count(value)?,
        "n" => config.cloud.n_points = count(value)?,
        _ => {
            return Err(Error::Config(format!("cannot sweep `{name}`; choose one of {}", SWEEP_PARAMS.join(", "))))
        }
    }
    Ok(())
}

/// One experiment per value, run concurrently, each writing into
/// `<out_dir>/<param>_<value>`.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64]) -> Result<Vec<(f64, Report)>> {
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = config.clone();
            set_param(&mut c, param, v).map_err(|e| e.in_stage("config"))?;
            c.run.out_dir = config.run.out_dir.join(format!("{param}_{}", fmt_f64(v)));
            Ok((v, c))
        })
        .collect::<Result<Vec<_>>>()?;
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|(v, c)| (*v, s.spawn(move || run_experiment(c)))).collect();
        handles
            .into_iter()
            .map(|(v, h)| {
                let report = h.join().map_err(|_| Error::Config(format!("sweep run {param} = {v} panicked")))??;
                Ok((v, report))
            })
            .collect()
    })
}
