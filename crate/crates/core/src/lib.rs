//! Exact Euclidean projection onto non-cylindrical central quadrics.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use quadproj::{project, Quadric};
//!
//! let circle = Quadric::new(DMatrix::identity(2, 2), DVector::zeros(2), -1.0).unwrap();
//! let res = project(&circle, &DVector::from_vec(vec![3.0, 4.0])).unwrap();
//! assert!((res.distance - 4.0).abs() < 1e-12);
//! assert!((res.point[0] - 0.6).abs() < 1e-12);
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod projection;
pub mod quadric;
pub mod sample;
pub mod spectral;

pub use nalgebra;

pub use error::{Error, Result};
pub use projection::{
    project, project_hyperplane, Candidate, CandidateKind, ProjectionOptions, ProjectionResult,
    Projector, RootInterval, SecularProblem,
};
pub use quadric::{Quadric, QuadricClass, QuadricKind, StandardForm};
pub use spectral::{eig_sym, group_eigenvalues, EigenDecomposition, EigenGroups};
