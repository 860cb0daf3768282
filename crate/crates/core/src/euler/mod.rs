//! Galerkin truncation of the damped, forced 2D Euler equation, split into
//! damping, forcing and triad-interaction fields.

pub mod lattice;
pub mod system;
pub mod triad;

pub use lattice::{build_index_set, enumerate_triads, theta, Family, LatticeIndex, Part, TriadKey};
pub use system::{nonresonance_deltas, zeta0, Assumption, EulerField, EulerSystem, GalerkinState};
pub use triad::{conserved_pair, triad_params, flow_canonical, Branch, TriadFlow, TriadGeometry, TriadOrbit, TriadParams};
