//! Reconstruction of time-consistent triangle meshes from sequences of
//! oriented 3D Gaussian point sets.
//!
//! The library is organized around a small geometric core:
//!
//! * [`gauss`] — Gaussian primitives (position, rotation quaternion, scale,
//!   opacity), canonical sets and oriented point clouds.
//! * [`grid`] — axis-aligned scalar/vector grids and trilinear interpolation.
//! * [`psr`] — differentiable Poisson surface reconstruction: splat oriented
//!   points to a grid, solve for the indicator spectrally, backpropagate.
//! * [`mc`] — marching cubes over the indicator grid with gradients through
//!   vertex interpolation parameters.
//! * [`mesh`] — indexed triangle meshes, validation (manifoldness, genus),
//!   Laplacian energy and surface sampling.
//! * [`deform`] — parametric forward/backward deformation models with
//!   Fourier-feature time conditioning and the cycle-consistency loss.
//! * [`anchor`] — Gaussian-mesh anchoring: merge Gaussians crowding a face,
//!   create Gaussians on uncovered faces, map changes back to canonical space.
//! * [`metrics`] — Chamfer distance and exact/entropic Earth Mover's distance.
//! * [`optim`] — gradient-based fitting of Gaussians and deformation
//!   parameters against geometric objectives.
//! * [`pipeline`] — synthetic scenes, frame-sequence reconstruction with
//!   correspondence tracking, PLY/OBJ I/O, configuration.

pub mod anchor;
pub mod deform;
pub mod gauss;
pub mod grid;
pub mod mc;
pub mod mesh;
pub mod metrics;
pub mod optim;
pub mod pipeline;
pub mod psr;
pub mod spatial;

mod fft;

use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Quaternion too close to zero to define a rotation.
    #[error("zero quaternion cannot represent a rotation")]
    InvalidRotation,
    /// Gaussian scale must be strictly positive on every axis.
    #[error("non-positive scale component: {0}")]
    InvalidScale(f64),
    /// A point lies outside the grid domain (with the required margin).
    #[error("point {0} lies outside the grid domain")]
    OutOfDomain(usize),
    /// Interpolation query outside the grid node box.
    #[error("query point lies outside the grid")]
    OutsideGrid,
    /// The spectral solver requires power-of-two resolutions.
    #[error("unsupported grid resolution {0} (power of two required)")]
    UnsupportedResolution(usize),
    /// An operation received an empty input collection.
    #[error("empty input")]
    EmptyInput,
    /// Adjoint cache does not match the inputs it was built from.
    #[error("adjoint cache does not match the supplied inputs")]
    AdjointMismatch,
    /// Mesh lacks the grid provenance needed for backpropagation.
    #[error("mesh carries no grid provenance; gradients unavailable")]
    NotDifferentiable,
    /// Mesh has zero total surface area.
    #[error("mesh has zero total area")]
    DegenerateMesh,
    /// Point sets must have equal cardinality.
    #[error("point set sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    /// Exact assignment is limited to small instances.
    #[error("point set of size {0} exceeds the exact solver limit {1}")]
    TooLarge(usize, usize),
    /// Grids passed to one operation describe different domains.
    #[error("grid specifications do not match")]
    GridMismatch,
    /// Optimization produced a non-finite loss.
    #[error("non-finite loss encountered at iteration {0}")]
    DivergenceDetected(usize),
    /// Structured parse failure with the byte offset of the defect.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Configuration file rejected.
    #[error("invalid config: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
