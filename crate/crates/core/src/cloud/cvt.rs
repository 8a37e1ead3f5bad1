use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DensityField;
use crate::geometry::{FineMesh, Point, TriangleLocator};

/// Draws `n` points i.i.d. from `ρ` by rejection against a uniform proposal
/// over the mesh bounding box.
pub fn sample_points(rho: &DensityField, mesh: &FineMesh, n: usize, seed: u64) -> Vec<Point> {
    let locator = TriangleLocator::new(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rejection_samples(rho, mesh, &locator, n, &mut rng)
}

fn rejection_samples(
    rho: &DensityField,
    mesh: &FineMesh,
    locator: &TriangleLocator<'_>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let (lo, hi) = mesh.bounds();
    let rho_max = rho.max();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
        let u: f64 = rng.gen();
        if let Some(v) = locator.interpolate(&rho.values, p) {
            if u * rho_max <= v {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct LloydOptions {
    pub max_iters: usize,
    /// Stop once the largest generator move is below `tol · diam(Ω)`.
    pub tol: f64,
    pub samples_per_iter: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct LloydReport {
    pub points: Vec<Point>,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted mean squared sample-to-generator distance per iteration.
    pub energy: Vec<f64>,
    pub reseeded: usize,
}

fn nearest(points: &[Point], p: Point) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, g) in points.iter().enumerate() {
        let d = (g[0] - p[0]).powi(2) + (g[1] - p[1]).powi(2);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Monte Carlo Lloyd iteration toward a centroidal Voronoi tessellation of
/// `ρ`. Each iteration draws uniform samples over the domain weighted by
/// `ρ`, assigns them to the nearest generator and moves every generator to
/// the weighted mean of its samples.
pub fn lloyd_cvt(points: &[Point], rho: &DensityField, mesh: &FineMesh, opts: &LloydOptions) -> LloydReport {
    let locator = TriangleLocator::new(mesh);
    let (lo, hi) = mesh.bounds();
    let diam = mesh.diameter();
    let mut gens = points.to_vec();
    let n = gens.len();
    let mut energy = Vec::new();
    let mut reseeded = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut samples: Vec<(Point, f64)> = Vec::with_capacity(opts.samples_per_iter);

    for it in 0..opts.max_iters {
        iterations = it + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(it as u64 + 1)));
        samples.clear();
        while samples.len() < opts.samples_per_iter {
            let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
            if let Some(w) = locator.interpolate(&rho.values, p) {
                samples.push((p, w.max(0.0)));
            }
        }
        let mut sum = vec![[0.0f64; 2]; n];
        let mut weight = vec![0.0f64; n];
        let mut e = 0.0;
        let mut wtot = 0.0;
        for &(p, w) in &samples {
            let (i, d2) = nearest(&gens, p);
            sum[i][0] += w * p[0];
            sum[i][1] += w * p[1];
            weight[i] += w;
            e += w * d2;
            wtot += w;
        }
        energy.push(if wtot > 0.0 { e / wtot } else { 0.0 });

        let mut max_move = 0.0f64;
        for i in 0..n {
            let new = if weight[i] > 0.0 {
                [sum[i][0] / weight[i], sum[i][1] / weight[i]]
            } else {
                reseeded += 1;
                let p = rejection_samples(rho, mesh, &locator, 1, &mut rng)[0];
                log::debug!("lloyd: empty cell for generator {i}, reseeded at ({:.3}, {:.3})", p[0], p[1]);
                p
            };
            max_move = max_move.max(crate::geometry::distance(gens[i], new));
            gens[i] = new;
        }
        if max_move < opts.tol * diam {
            converged = true;
            break;
        }
    }
    LloydReport { points: gens, iterations, converged, energy, reseeded }
}
