//! conelab: a numerical laboratory for bilinear L2 Fourier restriction
//! estimates on thickened null cones in 2+1 dimensions.
//!
//! The library is organized around five subsystems:
//!
//! - [`geometry`]: frequency-space points, the region grammar, membership
//!   predicates, angles and hyperbolic weights;
//! - [`volume`]: Monte Carlo and slice-exact volumes of region
//!   intersections, thickened-circle areas, and the sup-of-volume route to
//!   bilinear constants;
//! - [`decomposition`]: maximal gamma-separated direction sets, Whitney
//!   angular decomposition, overlap and null-plane counting;
//! - [`spectral`]: discrete frequency lattices, packet synthesis, L2 norms,
//!   lattice convolution and null forms, anisotropic norms;
//! - [`estimates`]: predicted constants for every estimate, empirical
//!   constant searches, pointwise lemma checks, and dyadic sweeps.

pub mod decomposition;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod tolerances;
pub mod verify;
pub mod volume;

pub use error::{Error, Result};
pub use estimates::{EstimateId, RatioReport, Strategy, SweepSpec};
pub use geometry::{
    angle, classify_output, hyperbolic_weight, theta12, Box3, DyadicParams, FreqPoint, Interval,
    OutputClass, Region, Sign, Vec2,
};
pub use spectral::{GridFunction, Lattice, PacketKind, PacketSpec};
pub use volume::{CircleConfig, SupSelector, VolumeEstimate, VolumeMethod};
