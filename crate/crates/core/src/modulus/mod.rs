//! Moduli of path families: explicit densities, a grid minimiser and the
//! winding lower bound.

pub mod bounds;
pub mod density;
pub mod family;
pub mod geometry;
pub mod qp;
pub mod report;

pub use bounds::{
    ball_chain_scaling, check_modulus_inequality, weighted_energy, winding_lower_bound, ModulusInequality,
    ScalingFit,
};
pub use density::{ball_chain_density, tube_density, ExplicitDensity, GridDensity, GridGeometry};
pub use family::{
    half_circle_modulus, ring_modulus, ring_radial, segment_to_ray, FamilyDescriptor, Path, PathFamily, Polyline,
};
pub use qp::{discrete_modulus, discrete_modulus_with, DiscreteModulus, SolverOptions, SolverStats};
pub use report::{Constants, Inputs, ModulusKind, ModulusReport};
