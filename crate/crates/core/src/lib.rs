//! Single-phase flow in fractured porous media: a fine-grid discrete fracture
//! model and a meshfree generalized multiscale solver with implicit and
//! partially explicit coarse time stepping.

pub mod basis;
pub mod cloud;
pub mod coarse;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod trajectory;

pub use error::{Error, Result};
pub use trajectory::{Scheme, Trajectory};
