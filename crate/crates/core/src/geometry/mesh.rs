use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirichletSide {
    Left,
    Right,
    Bottom,
    Top,
}

impl std::str::FromStr for DirichletSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(DirichletSide::Left),
            "right" => Ok(DirichletSide::Right),
            "bottom" => Ok(DirichletSide::Bottom),
            "top" => Ok(DirichletSide::Top),
            other => Err(Error::Config(format!("unknown dirichlet side `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

pub type Point = [f64; 2];

/// Fine triangulation with tagged boundary and embedded fracture edges.
#[derive(Clone, Debug)]
pub struct FineMesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Edges `[a, b]` with `a < b` lying on a fracture.
    pub fracture_edges: Vec<[usize; 2]>,
}

pub fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Signed area of the triangle `abc` (positive when counter-clockwise).
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform `nx × ny` grid of `[0, lx] × [0, ly]`, each cell split along its
/// lower-left to upper-right diagonal.
pub fn build_structured_trimesh(extent: [f64; 2], nx: usize, ny: usize, dirichlet_side: DirichletSide) -> Result<FineMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Geometry(format!("grid needs at least one cell per direction, got {nx}x{ny}")));
    }
    if !(extent[0] > 0.0 && extent[1] > 0.0) {
        return Err(Error::Geometry(format!("domain extent must be positive, got {extent:?}")));
    }
    let (dx, dy) = (extent[0] / nx as f64, extent[1] / ny as f64);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // pin the far edges exactly to the extent
            let x = if i == nx { extent[0] } else { i as f64 * dx };
            let y = if j == ny { extent[1] } else { j as f64 * dy };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let tag = |side: DirichletSide| {
        if side == dirichlet_side {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    };
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge { vertices: [id(i, 0), id(i + 1, 0)], tag: tag(DirichletSide::Bottom) });
        boundary_edges.push(BoundaryEdge { vertices: [id(i, ny), id(i + 1, ny)], tag: tag(DirichletSide::Top) });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge { vertices: [id(0, j), id(0, j + 1)], tag: tag(DirichletSide::Left) });
        boundary_edges.push(BoundaryEdge { vertices: [id(nx, j), id(nx, j + 1)], tag: tag(DirichletSide::Right) });
    }
    Ok(FineMesh { vertices, triangles, boundary_edges, fracture_edges: Vec::new() })
}

impl FineMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: [usize; 2]) -> f64 {
        distance(self.vertices[e[0]], self.vertices[e[1]])
    }

    /// Total length of the embedded fracture edges.
    pub fn fracture_length(&self) -> f64 {
        self.fracture_edges.iter().map(|&e| self.edge_length(e)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        distance(lo, hi)
    }

    /// Longest triangle edge.
    pub fn cell_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Unique undirected edges `[a, b]`, `a < b`, sorted.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|[a, b]| [a.min(b), a.max(b)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Vertex neighbours through triangle edges, sorted.
    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for [a, b] in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for nb in adj.iter_mut() {
            nb.sort_unstable();
        }
        adj
    }

    /// Triangles sharing an edge with each triangle.
    pub fn triangle_adjacency(&self) -> Vec<Vec<usize>> {
        let mut by_edge: std::collections::HashMap<[usize; 2], Vec<usize>> = std::collections::HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for [a, b] in [[tri[0], tri[1]], [tri[1], tri[2]], [tri[2], tri[0]]] {
                by_edge.entry([a.min(b), a.max(b)]).or_default().push(t);
            }
        }
        let mut adj = vec![Vec::new(); self.n_triangles()];
        for owners in by_edge.values() {
            for &s in owners {
                for &t in owners {
                    if s != t {
                        adj[s].push(t);
                    }
                }
            }
        }
        for nb in adj.iter_mut() {
            nb.sort_unstable();
            nb.dedup();
        }
        adj
    }

    /// Sorted vertices touched by boundary edges with the given tag.
    pub fn boundary_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut nodes: Vec<usize> =
            self.boundary_edges.iter().filter(|e| e.tag == tag).flat_map(|e| e.vertices).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        self.boundary_nodes(BoundaryTag::Dirichlet)
    }

    /// Per-vertex flag: endpoint of at least one fracture edge.
    pub fn fracture_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for &[a, b] in &self.fracture_edges {
            mask[a] = true;
            mask[b] = true;
        }
        mask
    }

    /// Checks orientation, fracture conformity and boundary tagging.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: t, area });
            }
        }
        let edges = self.edges();
        for e in &self.fracture_edges {
            if edges.binary_search(e).is_err() {
                return Err(Error::Geometry(format!("fracture edge {e:?} is not a mesh edge")));
            }
        }
        let mut counts = std::collections::HashMap::new();
        for tri in &self.triangles {
            for [a, b] in [[tri[0], tri[1]], [tri[1], tri[2]], [tri[2], tri[0]]] {
                *counts.entry([a.min(b), a.max(b)]).or_insert(0usize) += 1;
            }
        }
        let mut boundary: Vec<[usize; 2]> =
            counts.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
        boundary.sort_unstable();
        let mut tagged: Vec<[usize; 2]> = self
            .boundary_edges
            .iter()
            .map(|e| [e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])])
            .collect();
        tagged.sort_unstable();
        if boundary != tagged {
            return Err(Error::Geometry("tagged boundary edges do not match the mesh boundary".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_single_cell() {
        let m = build_structured_trimesh([1.0, 1.0], 1, 1, DirichletSide::Left).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
        m.validate().unwrap();
    }

    #[test]
    fn area_is_conserved() {
        let m = build_structured_trimesh([80.0, 80.0], 2, 2, DirichletSide::Left).unwrap();
        assert_eq!((m.n_vertices(), m.n_triangles()), (9, 8));
        assert!((m.area() - 6400.0).abs() < 1e-12);
        let m = build_structured_trimesh([80.0, 80.0], 100, 100, DirichletSide::Left).unwrap();
        assert!((m.area() - 6400.0).abs() <= 1e-9 * 6400.0);
        m.validate().unwrap();
    }

    #[test]
    fn boundary_tags_partition_the_boundary() {
        let m = build_structured_trimesh([80.0, 40.0], 8, 4, DirichletSide::Top).unwrap();
        let n_d = m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Dirichlet).count();
        let n_n = m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Neumann).count();
        assert_eq!(n_d, 8);
        assert_eq!(n_d + n_n, 2 * (8 + 4));
        assert!(m.dirichlet_nodes().iter().all(|&v| m.vertices[v][1] == 40.0));
    }

    #[test]
    fn rejects_empty_grid() {
        assert!(build_structured_trimesh([1.0, 1.0], 0, 3, DirichletSide::Left).is_err());
    }

    #[test]
    fn side_parsing() {
        assert_eq!("Right".parse::<DirichletSide>().unwrap(), DirichletSide::Right);
        assert!("middle".parse::<DirichletSide>().is_err());
    }
}
