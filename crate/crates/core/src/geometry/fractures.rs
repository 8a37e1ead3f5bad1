use std::path::Path;

use super::Point;
use crate::error::{Error, Result};

/// Fracture traces as polylines in domain coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FracturePolylines {
    pub polylines: Vec<Vec<Point>>,
}

impl FracturePolylines {
    pub fn len(&self) -> usize {
        self.polylines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    /// Sum of polyline arclengths.
    pub fn total_length(&self) -> f64 {
        self.polylines
            .iter()
            .flat_map(|p| p.windows(2))
            .map(|w| super::distance(w[0], w[1]))
            .sum()
    }

    /// Every point must lie in `[0, lx] × [0, ly]`.
    pub fn validate(&self, extent: [f64; 2]) -> Result<()> {
        for (k, poly) in self.polylines.iter().enumerate() {
            if poly.len() < 2 {
                return Err(Error::Geometry(format!("polyline {k} has fewer than two points")));
            }
            for p in poly {
                if !(0.0..=extent[0]).contains(&p[0]) || !(0.0..=extent[1]).contains(&p[1]) {
                    return Err(Error::Geometry(format!(
                        "polyline {k}: point ({}, {}) lies outside [0, {}] x [0, {}]",
                        p[0], p[1], extent[0], extent[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses the fracture text format: one polyline per line as
/// `x1,y1,x2,y2[,x3,y3...]`, with `#` comment lines and blank lines ignored.
pub fn parse_fractures(text: &str, source: &Path) -> Result<FracturePolylines> {
    let mut polylines = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { path: source.to_path_buf(), line: lineno + 1, message };
        let coords = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{tok}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if coords.len() < 4 || coords.len() % 2 != 0 {
            return Err(err(format!("expected an even number (>= 4) of coordinates, found {}", coords.len())));
        }
        polylines.push(coords.chunks(2).map(|c| [c[0], c[1]]).collect());
    }
    Ok(FracturePolylines { polylines })
}

/// Reads a fracture file and checks that every point lies inside the domain.
pub fn load_fractures(path: impl AsRef<Path>, extent: [f64; 2]) -> Result<FracturePolylines> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let polylines = parse_fractures(&text, path)?;
    polylines.validate(extent)?;
    Ok(polylines)
}
