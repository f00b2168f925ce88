//! Relaxed Kaczmarz iteration for online regression, and the Kaczmarz
//! coefficient machinery for exponential systems over spectral measures.
//!
//! Modules, bottom up: [`linalg`] (dense complex operators, SVD, pseudoinverse),
//! [`measures`] (spectral measures and finite `L²(μ)` embeddings), [`coeffs`]
//! (the `α_n` and `h_n`), [`kaczmarz`] (the online iteration), [`verifier`]
//! (projection products), [`hardy`] (disk functions) and [`expansion`].

pub mod coeffs;
pub mod error;
pub mod expansion;
pub mod hardy;
pub mod kaczmarz;
pub mod linalg;
pub mod measures;
pub mod report;
pub mod verifier;

pub use coeffs::{AuxVectors, CoeffTable};
pub use error::{Error, Result};
pub use expansion::ExpansionReport;
pub use hardy::{DiskFunction, MobiusData};
pub use kaczmarz::{NoiseModel, RegretLedger, TaskSequence};
pub use linalg::{ComplexOperator, ComplexVector, SvdFactors};
pub use measures::{AtomicMeasure, L2muEmbedding, Location, SpectralMeasure};
pub use num_complex::Complex64;
pub use report::Check;
pub use verifier::{ProductChain, ProjectionSequence};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Accept `λ ∈ (0, 2)` only.
pub fn validate_lambda(lambda: f64) -> Result<f64> {
    if lambda.is_finite() && lambda > 0.0 && lambda < 2.0 {
        Ok(lambda)
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_range() {
        for bad in [0.0, 2.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(validate_lambda(bad).is_err());
        }
        assert_eq!(validate_lambda(1.999).unwrap(), 1.999);
    }
}
