//! Kaczmarz–Fourier reconstruction `f = Σ e_n ⟨h_n, f⟩` in an atomic `L²(μ)`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{expansion_coeffs, AuxVectors};
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::measures::L2muEmbedding;
use crate::report::{fmt_f64, write_csv};

/// Default residual threshold.
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 1e-6;
/// Default number of terms.
pub const DEFAULT_TERMS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub lambda: f64,
    /// `d_0, …, d_{N−1}`.
    pub coefficients: Vec<Complex64>,
    /// Entry `N − 1` is `‖f − Σ_{n<N} e_n d_n‖`.
    pub partial_residuals: Vec<f64>,
    /// Entry `N − 1` is `Σ_{n<N} |d_n|²`.
    pub parseval_partial: Vec<f64>,
    /// `(λ/(2−λ))‖f‖²`.
    pub parseval_target: f64,
    pub f_norm: f64,
}

impl ExpansionReport {
    pub fn terms(&self) -> usize {
        self.coefficients.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.partial_residuals.last().copied().unwrap_or(self.f_norm)
    }

    pub fn final_parseval_gap(&self) -> f64 {
        (self.parseval_target - self.parseval_partial.last().copied().unwrap_or(0.0)).abs()
    }

    /// Residuals never grow by more than `tol`.
    pub fn residuals_nonincreasing(&self, tol: f64) -> bool {
        self.partial_residuals.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// Partial sums nondecreasing and at most `target + tol`.
    pub fn parseval_monotone_bounded(&self, tol: f64) -> bool {
        self.parseval_partial.windows(2).all(|w| w[1] >= w[0])
            && self.parseval_partial.iter().all(|&s| s <= self.parseval_target + tol)
    }

    /// Columns `N, residual, parseval_partial, parseval_target`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let target = fmt_f64(self.parseval_target);
        write_csv(
            out,
            &["N", "residual", "parseval_partial", "parseval_target"],
            self.partial_residuals
                .iter()
                .zip(&self.parseval_partial)
                .enumerate()
                .map(|(i, (r, p))| vec![(i + 1).to_string(), fmt_f64(*r), fmt_f64(*p), target.clone()]),
        )
    }
}

/// Expands `f` with the first `n` auxiliary vectors.
pub fn expand(emb: &L2muEmbedding, aux: &AuxVectors, f: &ComplexVector, n: usize) -> Result<ExpansionReport> {
    if f.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            context: "function in L²(μ)",
            expected: emb.dim(),
            found: f.len(),
        });
    }
    let available = aux.len().min(emb.count());
    if n > available {
        return Err(Error::OrderTooLarge {
            context: "expansion terms",
            order: n,
            max: available,
        });
    }
    let lambda = aux.lambda();
    let mut coefficients = expansion_coeffs(emb, aux, f)?;
    coefficients.truncate(n);

    let mut remainder = f.clone();
    let mut partial_residuals = Vec::with_capacity(n);
    let mut parseval_partial = Vec::with_capacity(n);
    let mut energy = 0.0;
    for (k, d) in coefficients.iter().enumerate() {
        remainder.axpy(-d, emb.exponential(k)?)?;
        partial_residuals.push(emb.norm(&remainder)?);
        energy += d.norm_sqr();
        parseval_partial.push(energy);
    }
    let f_norm = emb.norm(f)?;
    Ok(ExpansionReport {
        lambda,
        coefficients,
        partial_residuals,
        parseval_partial,
        parseval_target: lambda / (2.0 - lambda) * f_norm * f_norm,
        f_norm,
    })
}

/// `f̂(j) = ⟨e_j, f⟩_{L²(μ)}` for `j < n`.
pub fn standard_fourier_coeffs(emb: &L2muEmbedding, f: &ComplexVector, n: usize) -> Result<Vec<Complex64>> {
    if f.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            context: "function in L²(μ)",
            expected: emb.dim(),
            found: f.len(),
        });
    }
    (0..n).map(|j| emb.inner_product(emb.exponential(j)?, f)).collect()
}
