//! Fine-scale P1 assembly with lower-dimensional fracture terms and the
//! implicit Euler reference solver.

mod assembly;
mod params;
mod system;

pub use assembly::{
    assemble_mass, assemble_stiffness, assemble_triplets, assemble_unit_forms, edge_mass, edge_stiffness,
    triangle_mass, triangle_stiffness, Form,
};
pub use params::MaterialParams;
pub use system::{
    apply_dirichlet_penalty, run_fine_reference, run_fine_system, step_implicit, FineSystem, ImplicitStepper,
    PENALTY_FACTOR,
};
