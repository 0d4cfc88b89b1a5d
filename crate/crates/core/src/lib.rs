//! Perfect state transfer of continuous-time quantum walks on graphs with
//! on-site potentials, `H = A + diag(Q)`.
//!
//! - [`graph`]: graphs, potentials, Hamiltonians, twins and Cartesian products
//! - [`spectral`]: Jacobi eigensolver, eigenvalue derivatives, path polynomials
//! - [`evolution`]: propagators and fidelity search
//! - [`certifier`]: exact decision of transfer from a spectrum
//! - [`paths`]: the `P3` family and randomized scans on longer paths
//! - [`synthesis`]: Newton construction of transfer between twins
//! - [`products`]: composing instances over Cartesian products

pub mod certifier;
pub mod error;
pub mod evolution;
pub mod format;
pub mod graph;
pub mod io;
pub mod paths;
pub mod products;
pub mod spectral;
pub mod synthesis;

pub use error::{PstError, Result};
pub use graph::{build_hamiltonian, path_graph, Graph, Hamiltonian, Potential};
pub use spectral::{decompose, SpectralDecomposition};
