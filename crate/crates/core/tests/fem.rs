use fracms::fem::{
    assemble_mass, assemble_stiffness, run_fine_reference, run_fine_system, FineSystem, MaterialParams,
};
use fracms::geometry::{build_structured_trimesh, parse_fractures, snap_fractures, DirichletSide, FineMesh};
use fracms::harness::assets;
use fracms::linalg::{solve_linear, SolveOptions};
use std::path::Path;

fn bundled_mesh(name: &str, n: usize) -> FineMesh {
    let mesh = build_structured_trimesh([80.0, 80.0], n, n, DirichletSide::Left).unwrap();
    let f = parse_fractures(assets::bundled_fractures(name).unwrap(), Path::new(name)).unwrap();
    snap_fractures(&mesh, &f).unwrap()
}

/// Single right triangle with unit legs: vertices (0,0), (1,0), (0,1).
fn unit_triangle() -> FineMesh {
    FineMesh {
        vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles: vec![[0, 1, 2]],
        boundary_edges: Vec::new(),
        fracture_edges: Vec::new(),
    }
}

fn unit_params() -> MaterialParams {
    MaterialParams { c_m: 1.0, c_f: 1.0, k_m: 1.0, k_f: 1.0, mu: 1.0, alpha: 1.0, ..Default::default() }
}

#[test]
fn triangle_mass_matches_midpoint_quadrature() {
    // edge-midpoint rule is exact for quadratics; at the midpoints each hat
    // function is 0 or 1/2
    let area = 0.5;
    let mid = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
    let m = assemble_mass(&unit_triangle(), &unit_params()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let q: f64 = mid.iter().map(|phi| phi[i] * phi[j]).sum::<f64>() * area / 3.0;
            assert!((m.get(i, j) - q).abs() < 1e-15);
        }
    }
    // closed form (A/12)[[2,1,1],[1,2,1],[1,1,2]]
    assert!((m.get(0, 0) - 2.0 * area / 12.0).abs() < 1e-15);
    assert!((m.get(0, 1) - area / 12.0).abs() < 1e-15);
}

#[test]
fn triangle_stiffness_matches_gradients() {
    let a = assemble_stiffness(&unit_triangle(), &unit_params()).unwrap();
    // hat gradients on the unit right triangle
    let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    for i in 0..3 {
        for j in 0..3 {
            let oracle = 0.5 * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            assert!((a.get(i, j) - oracle).abs() < 1e-15);
        }
    }
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((a.get(i, j) - expected[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn fracture_edge_blocks() {
    let mut mesh = unit_triangle();
    mesh.vertices[1] = [3.0, 0.0];
    mesh.fracture_edges = vec![[0, 1]];
    let l = 3.0;
    let with = MaterialParams { c_f: 2.0, k_f: 7.0, ..unit_params() };
    let without = MaterialParams { alpha: 1e-300, ..with };
    let dm = assemble_mass(&mesh, &with).unwrap().add_scaled(1.0, &assemble_mass(&mesh, &without).unwrap(), -1.0).unwrap();
    // Simpson's rule is exact for the quadratic products of 1D hats
    let simpson = |f: &dyn Fn(f64) -> f64| l / 6.0 * (f(0.0) + 4.0 * f(0.5) + f(1.0));
    let phi = [|s: f64| 1.0 - s, |s: f64| s];
    for i in 0..2 {
        for j in 0..2 {
            let oracle = 2.0 * simpson(&|s| phi[i](s) * phi[j](s));
            assert!((dm.get(i, j) - oracle).abs() < 1e-12, "{i}{j}");
        }
    }
    let da = assemble_stiffness(&mesh, &with)
        .unwrap()
        .add_scaled(1.0, &assemble_stiffness(&mesh, &without).unwrap(), -1.0)
        .unwrap();
    let c = 7.0;
    assert!((da.get(0, 0) - c / l).abs() < 1e-12 && (da.get(0, 1) + c / l).abs() < 1e-12);
}

#[test]
fn assembly_identities_on_bundled_geometries() {
    let p = MaterialParams::default();
    for name in assets::BUNDLED_NAMES {
        let mesh = bundled_mesh(name, 80);
        let m = assemble_mass(&mesh, &p).unwrap();
        let a = assemble_stiffness(&mesh, &p).unwrap();
        assert_eq!(m.asymmetry(), 0.0);
        assert_eq!(a.asymmetry(), 0.0);
        let total: f64 = m.values().iter().sum();
        let expected = p.c_m * mesh.area() + p.alpha * p.c_f * mesh.fracture_length();
        assert!((total - expected).abs() <= 1e-9 * expected);
        let a1 = a.mul_vec(&vec![1.0; mesh.n_vertices()]);
        assert!(a1.iter().all(|v| v.abs() <= 1e-12 * a.norm_inf()));
    }
}

#[test]
fn steady_penalty_solve_pins_boundary() {
    let mesh = build_structured_trimesh([80.0, 80.0], 10, 10, DirichletSide::Left).unwrap();
    let p = MaterialParams::default();
    let sys = FineSystem::assemble(&mesh, &p).unwrap();
    let x = solve_linear(&sys.a, &sys.f, &SolveOptions::default()).unwrap();
    for &d in &sys.dirichlet_nodes {
        assert!((x[d] - p.g).abs() <= p.g.abs() * 1e-9);
    }
}

/// erfc by composite Simpson integration of the Gaussian.
fn erfc(x: f64) -> f64 {
    let n = 2000;
    let h = x / n as f64;
    let f = |s: f64| (-s * s).exp();
    let mut s = f(0.0) + f(x);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    1.0 - 2.0 / std::f64::consts::PI.sqrt() * s * h / 3.0
}

#[test]
fn fracture_free_strip_follows_half_space_solution() {
    // p = g + (p0 - g) erf(x / (2 sqrt(D t))) with D = k_m / (μ c_m)
    let mesh = build_structured_trimesh([40.0, 2.0], 160, 2, DirichletSide::Left).unwrap();
    let p = MaterialParams::default();
    let traj = run_fine_reference(&mesh, &p).unwrap();
    let t = p.t_max();
    let d = p.k_m / (p.mu * p.c_m);
    let last = traj.last().unwrap();
    let mut worst = 0.0f64;
    for (v, x) in mesh.vertices.iter().zip(last) {
        let exact = p.g + (p.p0 - p.g) * (1.0 - erfc(v[0] / (2.0 * (d * t).sqrt())));
        worst = worst.max((x - exact).abs());
    }
    assert!(worst <= 0.02 * (p.g - p.p0), "max deviation {worst}");
}

#[test]
fn vanishing_aperture_matches_fracture_free_run() {
    let p = MaterialParams { k_f: 1e-2, c_f: 0.4, alpha: 1e-12, n_steps: 20, ..Default::default() };
    let fractured = bundled_mesh("test1", 40);
    let plain = build_structured_trimesh([80.0, 80.0], 40, 40, DirichletSide::Left).unwrap();
    let a = run_fine_reference(&fractured, &p).unwrap();
    let b = run_fine_reference(&plain, &p).unwrap();
    for (x, y) in a.snapshots.iter().flatten().zip(b.snapshots.iter().flatten()) {
        assert!((x - y).abs() <= 1e-6);
    }
}

#[test]
fn bundled_reference_run_is_bounded_and_monotone() {
    let p = MaterialParams::default();
    let mesh = bundled_mesh("test1", 160);
    let sys = FineSystem::assemble(&mesh, &p).unwrap();
    let traj = run_fine_system(&sys, &p).unwrap();
    assert_eq!(traj.len(), p.n_steps + 1);
    assert!(traj.snapshots[0].iter().all(|&v| v == p.p0));
    let delta = 0.01 * (p.g - p.p0).abs();
    let (lo, hi) = traj.range();
    assert!(lo >= p.p0.min(p.g) - delta && hi <= p.p0.max(p.g) + delta, "range ({lo}, {hi})");
    let maxima: Vec<f64> = traj.snapshots.iter().map(|s| s.iter().copied().fold(f64::MIN, f64::max)).collect();
    assert!(maxima.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}
