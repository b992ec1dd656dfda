//! Exact computation of the coordinate-free coefficients of Laplace
//! expansions `∫ exp(-n f) b dx ~ n^{-d/2} Σ Λ_i(f, b) n^{-i/2}`, and a decision
//! procedure for equivalence of pairs `(f, b)` under formal diffeomorphisms
//! fixing the origin.

pub mod error;
pub mod fixtures;
pub mod gaussian;
pub mod invariants;
pub mod json;
pub mod matrix;
pub mod normalization;
pub mod one_dim;
pub mod phylon;
pub mod quadrature;
pub mod rational;
pub mod series;
pub mod tensor;

pub use error::{Error, Result};
pub use invariants::{
    invariant_equal, invariant_sequence, lambda_general, lambda_reduced, ContractionRoute, InvariantSequence,
    ScaledInvariant,
};
pub use matrix::Matrix;
pub use normalization::{decide_equivalence, morse_normalize, EquivalenceVerdict, EquivalenceWitness};
pub use one_dim::{decide_equivalence_1d, lambda_1d, sqrt_series, LambdaSequence, QuadExtScalar};
pub use phylon::{PairInstance, PhylonMap};
pub use quadrature::{compare_expansion, laplace_integral_numeric, QuadratureConfig, QuadratureReport};
pub use rational::Rational;
pub use series::{MultiIndex, TruncatedSeries};
pub use tensor::{KTensor, SymTensor};
