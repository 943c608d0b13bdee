//! Optical-length distances, Hopf-Lax solutions and Monge-solution checks for
//! Hamilton-Jacobi equations with discontinuous Hamiltonians on Carnot groups.

pub mod domain;
pub mod error;
pub mod export;
pub mod expr;
pub mod field;
pub mod group;
pub mod hamiltonian;
pub mod hopf_lax;
pub mod lattice;
pub mod metric;
pub mod verify;

pub use domain::DomainSpec;
pub use error::{Error, Result};
pub use expr::{Formula, Predicate};
pub use field::{horizontal_gradient_fd, Field, FnField, ScalarField};
pub use group::{GroupDescriptor, GroupKind, GroupSpec, HorizontalVector, Point};
pub use hamiltonian::{validate, Hamiltonian, HamiltonianDescriptor, Piece, ValidationReport, ZMap, ZSet};
pub use lattice::Lattice;
pub use metric::{Direction, DistanceField, HorizontalGraph, Metric, Stencil};
