//! Exact computation of singular points of tropical surfaces in R^3.
//!
//! A surface is given by lattice points `m_1..m_s` and rational heights
//! `u`; it is the corner locus of `max_m (u_m + m . x)`. The crate builds
//! the dual regular subdivision and the tropical surface, locates the
//! singular points via flags of flats of the Gale dual matroid, and labels
//! each point by the shape of the cell that contains it.

pub mod dual_complex;
pub mod lattice;
pub mod linalg;
pub mod matroid;
pub mod oracle;
pub mod polyhedron;
pub mod singular;
pub mod subdivision;

use num_rational::BigRational;

/// Exact rational scalar used throughout the pipeline.
pub type Rational = BigRational;
/// Dense rational matrix.
pub type RatMatrix = linalg::Matrix<Rational>;

pub use lattice::{CircuitType, LatticePoint, LatticePoint2, Polytope, UnimodularMap};
pub use linalg::{AffineSolution, Matrix};
pub use matroid::{ChainsCase, ChainsTag, Flag, GaleDual};
pub use singular::{classify, classify_with, CaseLabel, ClassifyOptions, SingularPoint, SingularityReport};
pub use subdivision::{HeightVector, MarkedSubdivision, PointConfig};
