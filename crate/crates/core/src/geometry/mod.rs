//! Fine triangulation of the rectangular domain and fracture embedding.

mod fractures;
mod locate;
mod mesh;
mod snap;

pub use fractures::{load_fractures, parse_fractures, FracturePolylines};
pub use mesh::{
    build_structured_trimesh, distance, signed_area, BoundaryEdge, BoundaryTag, DirichletSide, FineMesh, Point,
};
pub use locate::TriangleLocator;
pub use snap::{snap_chains, snap_fractures};
