//! Non-conforming harmonic virtual element method (VEM) for the 2D
//! Dirichlet-Laplace problem on polygonal meshes.
//!
//! The discrete space on each polygon consists of harmonic functions with
//! piecewise-polynomial normal traces; the only degrees of freedom are scaled
//! Legendre moments on the edges. Basis functions are never evaluated
//! pointwise: the method runs entirely on degrees of freedom and two
//! computable projectors (an edge L2 projector and a bulk H1 projector onto
//! harmonic polynomials). The crate provides
//!
//! * mesh generation and validation for Cartesian, Voronoi-Lloyd and
//!   geometrically graded L-shaped families ([`mesh`]),
//! * edge Legendre and bulk harmonic polynomial bases plus quadrature
//!   ([`basis`], [`quadrature`]),
//! * the per-element projector and stiffness matrices ([`local`]),
//! * global assembly, Dirichlet imposition via edge moments, a sparse SPD
//!   solver and condition estimates ([`assembly`]),
//! * reference solutions, computable error norms and h/p/hp convergence
//!   studies ([`analysis`]).

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod local;
pub mod mesh;
pub mod quadrature;

pub use error::{Error, Result};
