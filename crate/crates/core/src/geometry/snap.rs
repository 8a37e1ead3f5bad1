use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{distance, FineMesh, FracturePolylines, Point};
use crate::error::Result;

/// Tie-break weight per unit edge length; keeps chains short along
/// zero-distance edges.
const LENGTH_WEIGHT: f64 = 1e-3;

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    distance(p, [a[0] + t * dx, a[1] + t * dy])
}

fn nearest_vertex(mesh: &FineMesh, p: Point) -> usize {
    mesh.vertices
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| distance(**a, p).total_cmp(&distance(**b, p)))
        .map(|(i, _)| i)
        .expect("mesh has vertices")
}

#[derive(PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest vertex path from `s` to `t` where an edge costs the distance of
/// its midpoint to the segment `ab`.
fn shortest_chain(mesh: &FineMesh, adj: &[Vec<usize>], s: usize, t: usize, a: Point, b: Point) -> Vec<usize> {
    let n = mesh.n_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Candidate(0.0, s));
    while let Some(Candidate(d, v)) = heap.pop() {
        if v == t {
            break;
        }
        if d > dist[v] {
            continue;
        }
        for &w in &adj[v] {
            let (pv, pw) = (mesh.vertices[v], mesh.vertices[w]);
            let mid = [0.5 * (pv[0] + pw[0]), 0.5 * (pv[1] + pw[1])];
            let cost = point_segment_distance(mid, a, b) + LENGTH_WEIGHT * distance(pv, pw);
            if d + cost < dist[w] {
                dist[w] = d + cost;
                prev[w] = v;
                heap.push(Candidate(d + cost, w));
            }
        }
    }
    let mut path = vec![t];
    let mut v = t;
    while v != s {
        v = prev[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Snapped vertex chain of each polyline (empty for degenerate polylines).
pub fn snap_chains(mesh: &FineMesh, polylines: &FracturePolylines) -> Vec<Vec<usize>> {
    let adj = mesh.vertex_adjacency();
    polylines
        .polylines
        .iter()
        .enumerate()
        .map(|(k, poly)| {
            let snapped: Vec<usize> = poly.iter().map(|&p| nearest_vertex(mesh, p)).collect();
            let mut chain = vec![snapped[0]];
            for (w, seg) in snapped.windows(2).zip(poly.windows(2)) {
                if w[0] == w[1] {
                    continue;
                }
                let path = shortest_chain(mesh, &adj, w[0], w[1], seg[0], seg[1]);
                chain.extend_from_slice(&path[1..]);
            }
            if chain.len() < 2 {
                log::warn!("fracture polyline {k} collapses to a single vertex after snapping; skipped");
                Vec::new()
            } else {
                chain
            }
        })
        .collect()
}

/// Embeds fracture polylines as chains of existing fine edges.
pub fn snap_fractures(mesh: &FineMesh, polylines: &FracturePolylines) -> Result<FineMesh> {
    let mut edges: Vec<[usize; 2]> = snap_chains(mesh, polylines)
        .iter()
        .flat_map(|chain| chain.windows(2).map(|w| [w[0].min(w[1]), w[0].max(w[1])]).collect::<Vec<_>>())
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut out = mesh.clone();
    out.fracture_edges = edges;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_structured_trimesh, DirichletSide};

    fn polys(p: Vec<Vec<Point>>) -> FracturePolylines {
        FracturePolylines { polylines: p }
    }

    #[test]
    fn horizontal_fracture_follows_grid_line() {
        let mesh = build_structured_trimesh([80.0, 80.0], 20, 20, DirichletSide::Left).unwrap();
        let snapped = snap_fractures(&mesh, &polys(vec![vec![[0.0, 40.0], [80.0, 40.0]]])).unwrap();
        assert_eq!(snapped.fracture_edges.len(), 20);
        assert!((snapped.fracture_length() - 80.0).abs() < 1e-9);
        assert!(snapped.fracture_edges.iter().all(|e| e.iter().all(|&v| snapped.vertices[v][1] == 40.0)));
        snapped.validate().unwrap();
    }

    #[test]
    fn no_polylines_no_edges() {
        let mesh = build_structured_trimesh([1.0, 1.0], 4, 4, DirichletSide::Left).unwrap();
        assert!(snap_fractures(&mesh, &FracturePolylines::default()).unwrap().fracture_edges.is_empty());
    }

    #[test]
    fn degenerate_polyline_is_skipped() {
        let mesh = build_structured_trimesh([10.0, 10.0], 2, 2, DirichletSide::Left).unwrap();
        let snapped = snap_fractures(&mesh, &polys(vec![vec![[4.9, 5.0], [5.1, 5.1]]])).unwrap();
        assert!(snapped.fracture_edges.is_empty());
    }
}
