//! Coherent-state geometry of the complex Grassmannian `G_n(C^{n+m})`.
//!
//! The crate realizes the Grassmannian through its defining matrix model:
//! a point is an `n`-plane in `C^{n+m}` represented by an orthonormal frame,
//! the dense chart around the base plane `O = span(e_1..e_n)` is
//! parametrized by `Z ∈ C^{n×m}`, and normal coordinates by `B ∈ C^{n×m}`.
//!
//! Modules:
//! - [`matfun`]: SVD-driven matrix functions, principal angles, numeric Jacobian ranks.
//! - [`grassmann`]: chart, exponential/logarithm maps, geodesics and distance.
//! - [`coherent`]: overlap kernel, Calabi diastasis, Plücker embedding, noncompact dual.
//! - [`loci`]: conjugate times and multiplicities, stratum predicates, cut locus.
//! - [`topology`]: the seven equal invariants, each from its own route.
//! - [`sampling`]: counter-based deterministic sampling of test inputs.

pub mod coherent;
pub mod error;
pub mod grassmann;
pub mod loci;
pub mod matfun;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
pub mod sampling;
pub mod topology;

pub use error::{GeoError, Result};
pub use grassmann::{ChartZ, Plane, Shape, TangentB};

/// Dense complex matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;
pub use num_complex::Complex64;
