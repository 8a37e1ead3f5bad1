//! Local spectral problems, cubic-spline partition of unity and the
//! multiscale projection matrix.

mod kernel;
mod local;
mod space;

pub use kernel::kernel_value;
pub use local::{local_matrices, spectral_basis, support_fracture_edges, LocalCoefficients, LocalSpectrum};
pub use space::{assemble_projection, compute_local_spectra, shepard_weights, DofKind, MultiscaleSpace};
