//! Computable pieces of the Deligne–Hitchin twistor construction for
//! logarithmic λ-connections on punctured curves.
//!
//! The math is generic over [`Scalar`]: exact rationals ([`Rational`]) or
//! floats. Concrete aliases for both modes are re-exported here.

pub mod betti;
pub mod error;
pub mod kms;
pub mod linalg;
pub mod preferred_section;
pub mod rank1_dh;
pub mod residual_groupoid;
pub mod scalar;
pub mod twistor_bundle;

pub use error::{Error, Result};
pub use kms::{Chart, KmsElement, KmsPair, LambdaPoint};
pub use residual_groupoid::{Domain, GeneratorWord, GroupoidElement, MultiElement, NormalForm, ResidualPoint};
pub use scalar::Scalar;

pub use num_complex::Complex;
pub use num_rational::BigRational as Rational;

pub type Complex64 = Complex<f64>;
pub type GaussianRational = Complex<Rational>;

pub type KmsElementF64 = KmsElement<f64>;
pub type KmsElementExact = KmsElement<Rational>;
pub type KmsPairF64 = KmsPair<f64>;
pub type KmsPairExact = KmsPair<Rational>;
pub type ResidualPointF64 = ResidualPoint<f64>;
pub type ResidualPointExact = ResidualPoint<Rational>;
pub type LaurentMatrixF64 = twistor_bundle::LaurentMatrix<f64>;
pub type LaurentMatrixExact = twistor_bundle::LaurentMatrix<Rational>;
pub type InvariantSectionF64 = rank1_dh::InvariantSection<f64>;
pub type InvariantSectionExact = rank1_dh::InvariantSection<Rational>;
pub type SurfaceDataF64 = preferred_section::SurfaceData<f64>;
pub type SurfaceDataExact = preferred_section::SurfaceData<Rational>;
