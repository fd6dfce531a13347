//! Isometries of the complex hyperbolic plane.
//!
//! The crate works in `C^3` with the Hermitian form `diag(1, 1, -1)` and
//! provides:
//!
//! - [`hermitian`]: projective points, tance, complex lines, Gram data.
//! - [`isometry`]: `SU(2,1)` elements, classification, conjugators.
//! - [`trace_geometry`]: tangent lines to the deltoid and product traces.
//! - [`unfolded`]: the angle-pair triangle, the unfolded trace and walls.
//! - [`atlas`]: length-2 segment sets and the chamber atlas for a parameter.
//! - [`decomposer`]: explicit products of complex reflections.
//! - [`cli`]: the command-line front end.
//!
//! Runnable entry points live in `examples/`.

pub mod atlas;
pub mod cli;
pub mod decomposer;
mod error;
pub mod hermitian;
pub mod isometry;
mod linalg;
pub mod trace_geometry;
pub mod unfolded;

pub use error::{Error, Result};

/// Complex scalar type used throughout.
pub type C64 = num_complex::Complex64;
/// Column vector in `C^3`.
pub type Vec3 = nalgebra::Vector3<C64>;
/// 3x3 complex matrix.
pub type Mat3 = nalgebra::Matrix3<C64>;

/// `exp(2 pi i / 3)`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// The cube roots of unity `[1, w, w^2]`.
pub fn omega_powers() -> [C64; 3] {
    let w = omega();
    [C64::new(1.0, 0.0), w, w * w]
}
