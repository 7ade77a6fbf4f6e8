//! Mixed virtual element method for the Darcy problem on polyhedral meshes
//! whose faces may be curved.
//!
//! The crate is organised bottom-up:
//!
//! * [`face_maps`]: parametric charts `γ: [0,1]² → F` with derivatives, normals and inversion.
//! * [`mesh`]: the polyhedral mesh model, generators for the test families, and JSON I/O.
//! * [`poly`]: scaled monomial bases in 2D and 3D and the vector decomposition
//!   `[P_k]³ = ∇P_{k+1} ⊕ x ∧ [P_{k-1}]³`.
//! * [`quadrature`]: surface rules with paired parameter/physical point lists, the
//!   divergence-theorem volume rule and NNLS compression.
//! * [`vem`]: degrees of freedom, the L² projector, local forms and stabilization.
//! * [`darcy`]: global saddle-point assembly, boundary conditions, solve and error indicators.
//! * [`experiments`]: reproducible studies (quadrature check, convergence, corner-point runs).

pub mod error;
pub mod face_maps;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod darcy;
pub mod experiments;
pub mod vem;

pub use error::{Error, Result};

/// Points and vectors in physical space.
pub type Vec3 = nalgebra::Vector3<f64>;
