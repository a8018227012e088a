//! Higher-order boundary integral solver for the linearized
//! Poisson-Boltzmann equation on closed molecular surfaces.
//!
//! The surface is read as a flat triangulation with vertex normals
//! ([`mesh_io`]), promoted to cubic curved elements ([`geometry`]) and
//! integrated with a regular four-point rule plus a Duffy-regularized rule
//! on the elements touching each target vertex ([`quadrature`]). The
//! resulting second-kind integral equations ([`kernels`]) are solved
//! matrix-free with GMRES ([`solver`]). A flat centroid-collocation scheme
//! is included as the low-order reference, and Kirkwood's sphere solution
//! ([`oracle`]) provides ground truth.
//!
//! ```no_run
//! use hobi_pb::{icosahedral_sphere, solve, ChargeSystem, PhysicalParams, SolverConfig, Vec3};
//!
//! let mesh = icosahedral_sphere(3, 2.0, Vec3::zeros()).unwrap();
//! let charges = ChargeSystem::single(Vec3::zeros(), 1.0);
//! let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
//! let run = solve(&mesh, &params, &charges, &SolverConfig::default()).unwrap();
//! println!("E_sol = {:.2} kcal/mol", run.energy);
//! ```

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mesh_io;
pub mod oracle;
pub mod quadrature;
pub mod solver;

/// Points and vectors in Å.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{Error, Result};
pub use geometry::{build_curved_element, element_frame, CurvedElement, SurfaceFrame};
pub use kernels::{kernel_block, source_terms, KernelBlock, PhysicalParams};
pub use mesh_io::{icosahedral_sphere, parse_charges, parse_msms, radial_project, write_msms, ChargeSystem, FlatMesh};
pub use oracle::{kirkwood_centered, kirkwood_series, SphereProblem};
pub use quadrature::{collapsed_gauss_rule, duffy_rule, gauss_radau_rule, TriangleRule};
pub use solver::{
    convergence_order, discretize, gmres_solve, partition_targets, solve, surface_potential_error, RegularRule,
    Scheme, SolveOutcome, SolverConfig, SurfaceSolution,
};
