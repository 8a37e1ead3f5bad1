use std::collections::VecDeque;

use crate::basis::kernel_value;
use crate::error::{Error, Result};
use crate::geometry::{distance, FineMesh, Point};

/// Fine vertices and triangles making up one coarse support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Support {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Sorted triangle indices.
    pub elements: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Implicit,
    Explicit,
}

impl NodeClass {
    pub fn code(self) -> char {
        match self {
            NodeClass::Implicit => 'I',
            NodeClass::Explicit => 'E',
        }
    }
}

/// Extracted support plus the number of edge-connected pieces the raw
/// in-ball element set had.
pub(crate) struct Extraction {
    pub support: Support,
    pub components: usize,
}

pub(crate) fn extract(point: Point, radius: f64, mesh: &FineMesh, tri_adj: &[Vec<usize>]) -> Option<Extraction> {
    let inside_v: Vec<bool> = mesh.vertices.iter().map(|&v| distance(v, point) <= radius).collect();
    let mut inside_t = vec![false; mesh.n_triangles()];
    let mut any = false;
    let mut seed = None;
    let mut seed_d = f64::INFINITY;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().all(|&v| inside_v[v]) {
            inside_t[t] = true;
            any = true;
            let d = distance(mesh.centroid(t), point);
            if d < seed_d {
                seed_d = d;
                seed = Some(t);
            }
        }
    }
    if !any {
        return None;
    }
    let mut label = vec![usize::MAX; mesh.n_triangles()];
    let mut components = 0;
    let flood = |start: usize, id: usize, label: &mut Vec<usize>| {
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(t) = queue.pop_front() {
            for &s in &tri_adj[t] {
                if inside_t[s] && label[s] == usize::MAX {
                    label[s] = id;
                    queue.push_back(s);
                }
            }
        }
    };
    let seed = seed.expect("non-empty element set");
    flood(seed, 0, &mut label);
    components += 1;
    for t in 0..mesh.n_triangles() {
        if inside_t[t] && label[t] == usize::MAX {
            flood(t, components, &mut label);
            components += 1;
        }
    }
    let elements: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| label[t] == 0).collect();
    let mut vertices: Vec<usize> = elements.iter().flat_map(|&t| mesh.triangles[t]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Some(Extraction { support: Support { vertices, elements }, components })
}

/// Triangles whose vertices all lie within `radius` of `point`, restricted to
/// the edge-connected component containing the one nearest the point.
pub fn extract_support(point: Point, radius: f64, mesh: &FineMesh) -> Result<Support> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("support radius must be positive, got {radius}")));
    }
    let adj = mesh.triangle_adjacency();
    extract(point, radius, mesh, &adj)
        .map(|e| e.support)
        .ok_or(Error::EmptySupport { node: 0, radius })
}

/// `Σ_i φ(‖v − x_i‖ / r_i)` over the supports containing each vertex.
pub fn kernel_denominators(points: &[Point], radii: &[f64], supports: &[Support], mesh: &FineMesh) -> Vec<f64> {
    let mut denom = vec![0.0; mesh.n_vertices()];
    for ((p, &r), s) in points.iter().zip(radii).zip(supports) {
        for &v in &s.vertices {
            denom[v] += kernel_value(distance(mesh.vertices[v], *p) / r);
        }
    }
    denom
}

/// Per vertex, the smallest `‖v − x_i‖ / r_i` over the supports holding it
/// (infinite when none does).
pub fn coverage_depth(points: &[Point], radii: &[f64], supports: &[Support], mesh: &FineMesh) -> Vec<f64> {
    let mut depth = vec![f64::INFINITY; mesh.n_vertices()];
    for ((p, &r), s) in points.iter().zip(radii).zip(supports) {
        for &v in &s.vertices {
            depth[v] = depth[v].min(distance(mesh.vertices[v], *p) / r);
        }
    }
    depth
}

#[derive(Clone, Copy, Debug)]
pub struct RadiusOptions {
    /// Initial radius as a multiple of the nearest-neighbour distance.
    pub zeta: f64,
    pub repair_factor: f64,
    pub max_repairs: usize,
    /// A vertex counts as covered when it lies within this fraction of the
    /// radius of some support containing it.
    pub coverage_margin: f64,
    /// Lower bound on the initial radius.
    pub min_radius: f64,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions { zeta: 1.25, repair_factor: 1.1, max_repairs: 20, coverage_margin: 0.75, min_radius: 0.0 }
    }
}

/// Radii, supports and the number of repair rounds that were needed.
#[derive(Clone, Debug)]
pub struct RadiiResult {
    pub radii: Vec<f64>,
    pub supports: Vec<Support>,
    pub repairs: usize,
}

/// Initial radii `max(ζ · d_i, min_radius)` with `d_i` the distance to the
/// nearest other generator (the domain diameter for a single node). Each repair round scales the radius of
/// every node with an empty support, and of the generator nearest to each
/// vertex not covered within `coverage_margin` of a radius. Pieces of a ball
/// detached from the centre component are dropped.
pub fn compute_radii(points: &[Point], mesh: &FineMesh, opts: &RadiusOptions) -> Result<RadiiResult> {
    if points.is_empty() {
        return Err(Error::Config("point cloud is empty".into()));
    }
    if !(opts.coverage_margin > 0.0 && opts.coverage_margin <= 1.0) {
        return Err(Error::Config(format!("coverage margin must lie in (0, 1], got {}", opts.coverage_margin)));
    }
    let diam = mesh.diameter();
    let mut radii: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let d = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| distance(p, q))
                .fold(f64::INFINITY, f64::min);
            let d = if d.is_finite() { d } else { diam };
            (opts.zeta * d).max(opts.min_radius)
        })
        .collect();
    let adj = mesh.triangle_adjacency();
    for repairs in 0..=opts.max_repairs {
        let mut grow = vec![false; points.len()];
        let mut supports = Vec::with_capacity(points.len());
        for (i, (&p, &r)) in points.iter().zip(&radii).enumerate() {
            match extract(p, r, mesh, &adj) {
                Some(e) => {
                    if e.components > 1 {
                        log::debug!("support {i} drops {} detached pieces", e.components - 1);
                    }
                    supports.push(e.support);
                }
                None => {
                    grow[i] = true;
                    supports.push(Support::default());
                }
            }
        }
        let depth = coverage_depth(points, &radii, &supports, mesh);
        for (v, _) in depth.iter().enumerate().filter(|(_, &d)| !(d < 1.0 && d <= opts.coverage_margin)) {
            grow[nearest(points, mesh.vertices[v])] = true;
        }
        if !grow.contains(&true) {
            return Ok(RadiiResult { radii, supports, repairs });
        }
        log::debug!("radius repair {}: growing {} supports", repairs + 1, grow.iter().filter(|&&g| g).count());
        radii.iter_mut().zip(&grow).filter(|(_, &g)| g).for_each(|(r, _)| *r *= opts.repair_factor);
    }
    Err(Error::Config(format!(
        "point cloud still leaves vertices uncovered after {} radius repairs",
        opts.max_repairs
    )))
}

fn nearest(points: &[Point], x: Point) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, &p) in points.iter().enumerate() {
        let d = distance(p, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// A node is implicit when its support touches a fracture vertex.
pub fn classify_nodes(supports: &[Support], mesh: &FineMesh) -> Vec<NodeClass> {
    let on_fracture = mesh.fracture_vertex_mask();
    supports
        .iter()
        .map(|s| {
            if s.vertices.iter().any(|&v| on_fracture[v]) {
                NodeClass::Implicit
            } else {
                NodeClass::Explicit
            }
        })
        .collect()
}
