//! Ground-state energies of N points interacting pairwise on the sphere, an
//! embedded torus, or free 3-space.
//!
//! Two halves:
//!
//! * [`audit`] checks tables of putative ground-state energies against the
//!   fact that the true energy per ordered pair is non-decreasing in N, flags
//!   entries that cannot be minimal and derives sharper upper bounds for them.
//! * [`optimizer`] produces candidate energies by multistart Riemannian
//!   gradient descent, and [`asymptotics`] evaluates the large-N expansions
//!   those candidates are compared against.

pub mod asymptotics;
pub mod audit;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod potentials;
pub mod sum;
pub mod table;

pub use error::{Error, Result};
pub use geometry::{Configuration, DomainSpec, Point, Vec3};
pub use potentials::PotentialSpec;
pub use table::EnergyTable;
