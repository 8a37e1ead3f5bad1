use super::{FineMesh, Point};

/// Bucket grid over triangle bounding boxes for point location.
pub struct TriangleLocator<'a> {
    mesh: &'a FineMesh,
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> TriangleLocator<'a> {
    pub fn new(mesh: &'a FineMesh) -> Self {
        let (lo, hi) = mesh.bounds();
        let nb = ((mesh.n_triangles() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let dims = [nb, nb];
        let cell = [((hi[0] - lo[0]) / nb as f64).max(f64::MIN_POSITIVE), ((hi[1] - lo[1]) / nb as f64).max(f64::MIN_POSITIVE)];
        let mut loc = TriangleLocator { mesh, origin: lo, cell, dims, buckets: vec![Vec::new(); nb * nb] };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let pts = tri.map(|v| mesh.vertices[v]);
            let xmin = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let xmax = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let ymin = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let ymax = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let (i0, j0) = loc.bucket_of([xmin, ymin]);
            let (i1, j1) = loc.bucket_of([xmax, ymax]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * dims[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let i = ((p[0] - self.origin[0]) / self.cell[0]).floor().max(0.0) as usize;
        let j = ((p[1] - self.origin[1]) / self.cell[1]).floor().max(0.0) as usize;
        (i.min(self.dims[0] - 1), j.min(self.dims[1] - 1))
    }

    /// Containing triangle and barycentric coordinates of `p`.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.bucket_of(p);
        const EPS: f64 = 1e-12;
        for &t in &self.buckets[j * self.dims[0] + i] {
            let [a, b, c] = self.mesh.triangles[t].map(|v| self.mesh.vertices[v]);
            let area = super::signed_area(a, b, c);
            let l0 = super::signed_area(p, b, c) / area;
            let l1 = super::signed_area(a, p, c) / area;
            let l2 = 1.0 - l0 - l1;
            if l0 >= -EPS && l1 >= -EPS && l2 >= -EPS {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    /// Piecewise-linear interpolation of nodal values at `p`.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Option<f64> {
        self.locate(p).map(|(t, l)| {
            let tri = self.mesh.triangles[t];
            l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]
        })
    }
}
