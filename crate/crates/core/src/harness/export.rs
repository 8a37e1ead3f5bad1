//! CSV and legacy VTK writers. Floats are written in their shortest
//! round-trip form so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::FineMesh;

use super::metrics::ErrorSeries;

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// `time,value` rows.
pub fn export_csv(series: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "time,value")?;
        for &(t, v) in series {
            writeln!(w, "{},{}", fmt_f64(t), fmt_f64(v))?;
        }
        Ok(())
    })
}

/// `time,l2_percent,h1_percent` rows.
pub fn export_error_csv(series: &ErrorSeries, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "time,l2_percent,h1_percent")?;
        for ((t, l2), h1) in series.times.iter().zip(&series.l2_percent).zip(&series.h1_percent) {
            writeln!(w, "{},{},{}", fmt_f64(*t), fmt_f64(*l2), fmt_f64(*h1))?;
        }
        Ok(())
    })
}

/// Legacy ASCII VTK unstructured grid of triangles with a point scalar
/// named `pressure`.
pub fn export_vtk(mesh: &FineMesh, field: &[f64], path: impl AsRef<Path>) -> Result<()> {
    if field.len() != mesh.n_vertices() {
        return Err(Error::Dimension(format!(
            "field of length {} on a mesh with {} vertices",
            field.len(),
            mesh.n_vertices()
        )));
    }
    write_file(path.as_ref(), |w| {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "pressure field")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", mesh.n_vertices())?;
        for p in &mesh.vertices {
            writeln!(w, "{} {} 0", fmt_f64(p[0]), fmt_f64(p[1]))?;
        }
        let nt = mesh.n_triangles();
        writeln!(w, "CELLS {nt} {}", 4 * nt)?;
        for t in &mesh.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {nt}")?;
        for _ in 0..nt {
            writeln!(w, "5")?;
        }
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        writeln!(w, "SCALARS pressure double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in field {
            writeln!(w, "{}", fmt_f64(*v))?;
        }
        Ok(())
    })
}

/// `index,x,y,radius,class` rows with class `I` or `E`.
pub fn export_cloud_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "index,x,y,radius,class")?;
        for (i, ((p, r), c)) in cloud.points.iter().zip(&cloud.radii).zip(&cloud.classes).enumerate() {
            writeln!(w, "{i},{},{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*r), c.code())?;
        }
        Ok(())
    })
}
