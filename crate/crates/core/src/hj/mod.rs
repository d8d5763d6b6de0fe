//! Spatial discretization of the G-equation Hamiltonians.

pub mod curvature;
pub mod hamiltonian;
pub mod weno;

pub use curvature::{curvature_term, infinity_laplacian, GRADIENT_FLOOR};
pub use hamiltonian::{
    godunov_sq, hamiltonian_inviscid, hamiltonian_strain, numerical_hamiltonian, HamiltonianValue,
};
pub use weno::{weno_derivatives, OneSidedGradients, WenoOrder, WENO_EPS};
