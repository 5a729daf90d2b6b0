//! Torsion points of abelian varieties over non-Archimedean fields, computed
//! exactly from uniformization data, and their equidistribution toward the
//! Haar measure on the skeleton.
//!
//! The exact layers are generic over a coefficient field ([`Coeff`]) and the
//! real-valued layers over a float type ([`Real`]); the aliases below fix the
//! usual choices (arbitrary-precision rationals and `f64`).

pub mod equidist;
pub mod error;
pub mod exact;
pub mod good_reduction;
pub mod lattice;
pub mod scalar;
pub mod syntax;
pub mod tropical;
pub mod uniformization;

pub mod config;
pub mod runner;

pub use error::{Error, Result};
pub use scalar::{Coeff, Real};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
/// Element of Q(zeta_N).
pub type Cyc = exact::CycElement<Rational>;
/// Element of the model field K.
pub type Element = exact::FieldElement<Rational>;
/// Laurent polynomial over K.
pub type Laurent = tropical::LaurentPoly<Rational>;
/// Test function with exact coefficients.
pub type TestFn = equidist::TestFunction<Rational>;
/// Convergence table row in double precision.
pub type Row = equidist::ConvergenceRow<f64>;
