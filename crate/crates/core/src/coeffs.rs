//! Kaczmarz coefficients for exponential systems over a spectral measure.
//!
//! For `λ ∈ (0, 2)` the coefficients satisfy `α_0 = λ` and
//! `α_n = −λ Σ_{k<n} μ̂(n−k) α_k`; equivalently `α_n` is a signed sum over the
//! compositions of `n`. The auxiliary vectors `h_n` (with `Q̃_n f = e_n ⟨h_n, f⟩`)
//! expand as `h_n = Σ_{j≤n} conj(α_{n−j}) e_j`. Everything is indexed from 0.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::measures::{L2muEmbedding, SpectralMeasure};
use crate::report::{fmt_f64, write_csv};
use crate::validate_lambda;

/// Largest `n` for which the composition sum is enumerated (2¹⁹ terms).
pub const MAX_COMPOSITION_ORDER: usize = 20;

/// Default truncation order for coefficient sums.
pub const DEFAULT_ORDER: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSource {
    Recursive,
    Combinatorial,
}

/// `α_0, …, α_{N−1}` for one relaxation parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    lambda: f64,
    alpha: Vec<Complex64>,
    source: CoeffSource,
}

impl CoeffTable {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn source(&self) -> CoeffSource {
        self.source
    }

    /// Largest entrywise deviation from another table.
    pub fn max_deviation(&self, other: &CoeffTable) -> f64 {
        self.alpha
            .iter()
            .zip(&other.alpha)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_{k=1}^{n} |α_k|²` for every `n < N` (entry 0 is 0).
    pub fn running_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.alpha
            .iter()
            .enumerate()
            .map(|(n, a)| {
                if n > 0 {
                    acc += a.norm_sqr();
                }
                acc
            })
            .collect()
    }

    /// Columns `n, re_alpha, im_alpha, abs2_alpha, running_sum, target`; the
    /// target is `λ³/(2−λ)`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let target = effectiveness_target(self.lambda);
        let sums = self.running_sums();
        write_csv(
            out,
            &["n", "re_alpha", "im_alpha", "abs2_alpha", "running_sum", "target"],
            self.alpha.iter().zip(sums).enumerate().map(|(n, (a, s))| {
                vec![
                    n.to_string(),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                    fmt_f64(a.norm_sqr()),
                    fmt_f64(s),
                    fmt_f64(target),
                ]
            }),
        )
    }
}

/// `λ³/(2−λ)`.
pub fn effectiveness_target(lambda: f64) -> f64 {
    lambda.powi(3) / (2.0 - lambda)
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::OrderTooSmall {
            context: "coefficient table",
            order,
            min: 1,
        });
    }
    Ok(())
}

/// `α_n` by the triangular recursion.
pub fn alpha_recursive(mu: &SpectralMeasure, lambda: f64, order: usize) -> Result<CoeffTable> {
    validate_lambda(lambda)?;
    check_order(order)?;
    let moments = mu.moments(order);
    let mut alpha = Vec::with_capacity(order);
    alpha.push(Complex64::new(lambda, 0.0));
    for n in 1..order {
        let s: Complex64 = (0..n).map(|k| moments[n - k] * alpha[k]).sum();
        alpha.push(-lambda * s);
    }
    Ok(CoeffTable {
        lambda,
        alpha,
        source: CoeffSource::Recursive,
    })
}

/// Compositions of `n` in lexicographic order; `n = 0` yields the empty one.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn walk(remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for first in 1..=remaining {
            prefix.push(first);
            walk(remaining - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(n, &mut Vec::new(), &mut out);
    out
}

/// `α_n = Σ_{p ∈ P_n} (−1)^{ℓ(p)} λ^{ℓ(p)+1} ∏ μ̂(p_j)`, summed over every
/// composition of `n`. Exponential cost; for cross-checking only.
pub fn alpha_combinatorial(mu: &SpectralMeasure, lambda: f64, order: usize) -> Result<CoeffTable> {
    validate_lambda(lambda)?;
    check_order(order)?;
    if order - 1 > MAX_COMPOSITION_ORDER {
        return Err(Error::OrderTooLarge {
            context: "composition enumeration",
            order: order - 1,
            max: MAX_COMPOSITION_ORDER,
        });
    }
    let moments = mu.moments(order);

    // Depth-first over compositions in lexicographic order, carrying the
    // running product so each term costs O(1).
    fn walk(
        remaining: usize,
        len: i32,
        product: Complex64,
        moments: &[Complex64],
        lambda: f64,
        acc: &mut Complex64,
    ) {
        if remaining == 0 {
            let sign = if len % 2 == 0 { 1.0 } else { -1.0 };
            *acc += sign * lambda.powi(len + 1) * product;
            return;
        }
        for first in 1..=remaining {
            walk(remaining - first, len + 1, product * moments[first], moments, lambda, acc);
        }
    }

    let alpha = (0..order)
        .map(|n| {
            if n == 0 {
                return Complex64::new(lambda, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            walk(n, 0, Complex64::new(1.0, 0.0), &moments, lambda, &mut acc);
            acc
        })
        .collect();
    Ok(CoeffTable {
        lambda,
        alpha,
        source: CoeffSource::Combinatorial,
    })
}

/// The auxiliary vectors `h_0, …, h_{N−1}` in an atomic `L²(μ)` model.
#[derive(Clone, Debug)]
pub struct AuxVectors {
    h: Vec<ComplexVector>,
    lambda: f64,
}

impl AuxVectors {
    pub fn h(&self) -> &[ComplexVector] {
        &self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Largest `L²(μ)` distance to `Σ_{j≤n} conj(α_{n−j}) e_j`.
    pub fn deviation_from_closed_form(&self, emb: &L2muEmbedding, table: &CoeffTable) -> Result<f64> {
        let closed = aux_vectors_closed_form(emb, table)?;
        let mut worst: f64 = 0.0;
        for (a, b) in self.h.iter().zip(&closed.h) {
            worst = worst.max(emb.norm(&a.sub(b)?)?);
        }
        Ok(worst)
    }
}

fn check_table_fits(emb: &L2muEmbedding, order: usize) -> Result<()> {
    if order > emb.count() {
        return Err(Error::OrderTooLarge {
            context: "embedding column count",
            order,
            max: emb.count(),
        });
    }
    Ok(())
}

/// `h_0 = λe_0`, `h_n = λ(e_n − Σ_{k<n} conj(⟨e_n, e_k⟩) h_k)`.
pub fn aux_vectors(emb: &L2muEmbedding, table: &CoeffTable) -> Result<AuxVectors> {
    check_table_fits(emb, table.order())?;
    let lambda = table.lambda();
    let mut h: Vec<ComplexVector> = Vec::with_capacity(table.order());
    for n in 0..table.order() {
        let e_n = emb.exponential(n)?;
        let mut acc = e_n.clone();
        for (k, h_k) in h.iter().enumerate() {
            let g = emb.inner_product(e_n, emb.exponential(k)?)?;
            acc.axpy(-g.conj(), h_k)?;
        }
        h.push(acc.scale(Complex64::new(lambda, 0.0)));
    }
    Ok(AuxVectors { h, lambda })
}

/// `h_n = Σ_{j≤n} conj(α_{n−j}) e_j`, built from the coefficient table.
pub fn aux_vectors_closed_form(emb: &L2muEmbedding, table: &CoeffTable) -> Result<AuxVectors> {
    check_table_fits(emb, table.order())?;
    let alpha = table.alpha();
    let h = (0..table.order())
        .map(|n| {
            let mut acc = ComplexVector::zeros(emb.dim());
            for j in 0..=n {
                acc.axpy(alpha[n - j].conj(), emb.exponential(j)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuxVectors {
        h,
        lambda: table.lambda(),
    })
}

/// `d_n = ⟨h_n, f⟩_{L²(μ)}`.
pub fn expansion_coeffs(emb: &L2muEmbedding, aux: &AuxVectors, f: &ComplexVector) -> Result<Vec<Complex64>> {
    aux.h.iter().map(|h| emb.inner_product(h, f)).collect()
}

/// `Σ_{j≤n} α_{n−j} f̂(j)` for `n < min(N, len f̂)`.
pub fn convolution_coeffs(table: &CoeffTable, fhat: &[Complex64]) -> Vec<Complex64> {
    let alpha = table.alpha();
    let n_max = alpha.len().min(fhat.len());
    (0..n_max)
        .map(|n| (0..=n).map(|j| alpha[n - j] * fhat[j]).sum())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectivenessReport {
    pub lambda: f64,
    pub order: usize,
    /// `Σ_{n=1}^{N−1} |α_n|²`.
    pub sum: f64,
    /// `λ³/(2−λ)`.
    pub target: f64,
    /// `target − sum`.
    pub gap: f64,
}

pub fn effectiveness_sum(table: &CoeffTable) -> Result<EffectivenessReport> {
    if table.order() < 2 {
        return Err(Error::OrderTooSmall {
            context: "effectiveness sum",
            order: table.order(),
            min: 2,
        });
    }
    let sum: f64 = table.alpha()[1..].iter().map(|a| a.norm_sqr()).sum();
    let target = effectiveness_target(table.lambda());
    Ok(EffectivenessReport {
        lambda: table.lambda(),
        order: table.order(),
        sum,
        target,
        gap: target - sum,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UNormReport {
    /// `‖u_n‖²` with `u_n = Σ_{l≤n} α_l e_l`, computed in `L²(μ)`.
    pub direct: Vec<f64>,
    /// `r_0² = λ²`, `r_n² = r_{n−1}² + (1 − 2/λ)|α_n|²`.
    pub recursion: Vec<f64>,
}

impl UNormReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.direct
            .iter()
            .zip(&self.recursion)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `u_n = Σ_{l≤n} α_l e_l`.
fn u_vector(emb: &L2muEmbedding, alpha: &[Complex64], n: usize) -> Result<ComplexVector> {
    shifted_u_vector(emb, alpha, n, 0)
}

/// `v_{n,i} = Σ_{l=0}^{n−i} α_l e_{l+i}`.
fn shifted_u_vector(emb: &L2muEmbedding, alpha: &[Complex64], n: usize, i: usize) -> Result<ComplexVector> {
    let mut acc = ComplexVector::zeros(emb.dim());
    for l in 0..=(n - i) {
        acc.axpy(alpha[l], emb.exponential(l + i)?)?;
    }
    Ok(acc)
}

pub fn u_norm_recursion(emb: &L2muEmbedding, table: &CoeffTable) -> Result<UNormReport> {
    check_table_fits(emb, table.order())?;
    let alpha = table.alpha();
    let lambda = table.lambda();
    let mut direct = Vec::with_capacity(alpha.len());
    let mut u = ComplexVector::zeros(emb.dim());
    for (l, a) in alpha.iter().enumerate() {
        u.axpy(*a, emb.exponential(l)?)?;
        direct.push(emb.inner_product(&u, &u)?.re);
    }
    let mut recursion = Vec::with_capacity(alpha.len());
    let mut r2 = lambda * lambda;
    recursion.push(r2);
    for a in &alpha[1..] {
        r2 += (1.0 - 2.0 / lambda) * a.norm_sqr();
        recursion.push(r2);
    }
    Ok(UNormReport { direct, recursion })
}

/// `‖v_{n,i}‖ = ‖u_{n−i}‖` in `L²(μ)`; returns `(‖v_{n,i}‖, ‖u_{n−i}‖)`.
pub fn shift_norms(emb: &L2muEmbedding, table: &CoeffTable, i: usize, n: usize) -> Result<(f64, f64)> {
    check_shift_indices(emb, table, i, n)?;
    let v = shifted_u_vector(emb, table.alpha(), n, i)?;
    let u = u_vector(emb, table.alpha(), n - i)?;
    Ok((emb.norm(&v)?, emb.norm(&u)?))
}

fn check_shift_indices(emb: &L2muEmbedding, table: &CoeffTable, i: usize, n: usize) -> Result<()> {
    if i > n {
        return Err(Error::IndexOutOfRange {
            context: "shift index (requires i <= n)",
            index: i,
            limit: n,
        });
    }
    let limit = table.order().min(emb.count());
    if n >= limit {
        return Err(Error::IndexOutOfRange {
            context: "truncation index",
            index: n,
            limit,
        });
    }
    Ok(())
}

/// Residual of the partial-sum identities
/// `K_n(e_0) − e_0 = ((λ−1)/λ) u_n` and, for `i ≥ 1`,
/// `K_n(e_i) − e_i = ((λ−1)/λ) v_{n,i} + Σ_{j=1}^{i} μ̂(−j) v_{n,i−j}`,
/// where `K_n(f) = Σ_{k≤n} e_k ⟨h_k, f⟩`. The left side is assembled from the
/// auxiliary vectors, the right side from `α` and `μ̂` only; the result is the
/// `L²(μ)` norm of their difference.
pub fn verify_partial_sum_identities(emb: &L2muEmbedding, table: &CoeffTable, i: usize, n: usize) -> Result<f64> {
    check_shift_indices(emb, table, i, n)?;
    let lambda = table.lambda();
    let alpha = table.alpha();
    let aux = aux_vectors_closed_form(emb, table)?;
    let e_i = emb.exponential(i)?;

    let mut lhs = ComplexVector::zeros(emb.dim());
    for k in 0..=n {
        lhs.axpy(emb.inner_product(&aux.h()[k], e_i)?, emb.exponential(k)?)?;
    }
    let lhs = lhs.sub(e_i)?;

    let ratio = Complex64::new((lambda - 1.0) / lambda, 0.0);
    let mut rhs = shifted_u_vector(emb, alpha, n, i)?.scale(ratio);
    for j in 1..=i {
        let m = emb.measure().moment(-(j as i64));
        rhs.axpy(m, &shifted_u_vector(emb, alpha, n, i - j)?)?;
    }
    emb.norm(&lhs.sub(&rhs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::AtomicMeasure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn half_half() -> SpectralMeasure {
        AtomicMeasure::half_half().into()
    }

    /// Closed form for `½(δ_0 + δ_{1/2})`: `A(z) = λ(1−z²)/(1−(1−λ)z²)`,
    /// so `α_{2k} = −λ²(1−λ)^{k−1}` for `k ≥ 1` and odd entries vanish.
    fn half_half_alpha(lambda: f64, n: usize) -> Complex64 {
        if n == 0 {
            c(lambda)
        } else if n % 2 == 1 {
            c(0.0)
        } else {
            c(-lambda * lambda * (1.0 - lambda).powi(n as i32 / 2 - 1))
        }
    }

    #[test]
    fn first_recursion_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu: SpectralMeasure = AtomicMeasure::random_stratified(4, &mut rng).unwrap().into();
        let t = alpha_recursive(&mu, 0.7, 3).unwrap();
        assert_eq!(t.alpha()[0], c(0.7));
        assert!((t.alpha()[1] - (-0.49 * mu.moment(1))).norm() < 1e-15);
    }

    #[test]
    fn half_half_closed_form() {
        for lambda in [0.3, 0.8, 1.0, 1.5, 1.9] {
            let t = alpha_recursive(&half_half(), lambda, 40).unwrap();
            for (n, a) in t.alpha().iter().enumerate() {
                assert!((a - half_half_alpha(lambda, n)).norm() < 1e-12, "λ={lambda} n={n}");
            }
        }
        let t = alpha_recursive(&half_half(), 1.0, 6).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0, 0.0, 0.0];
        for (a, e) in t.alpha().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn lambda_is_validated() {
        assert_eq!(alpha_recursive(&half_half(), 2.0, 4).unwrap_err(), Error::InvalidLambda(2.0));
        assert!(alpha_recursive(&half_half(), 0.0, 4).is_err());
        assert!(alpha_combinatorial(&half_half(), -0.1, 4).is_err());
    }

    #[test]
    fn composition_enumeration() {
        assert_eq!(compositions(3), vec![vec![1, 1, 1], vec![1, 2], vec![2, 1], vec![3]]);
        for n in 1..=10 {
            assert_eq!(compositions(n).len(), 1 << (n - 1));
        }
        assert!(matches!(
            alpha_combinatorial(&half_half(), 0.5, 22),
            Err(Error::OrderTooLarge { .. })
        ));
        assert!(alpha_combinatorial(&half_half(), 0.5, 21).is_ok());
    }

    #[test]
    fn combinatorial_hand_expansions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mu: SpectralMeasure = AtomicMeasure::random_stratified(3, &mut rng).unwrap().into();
        let l = 1.3f64;
        let t = alpha_combinatorial(&mu, l, 4).unwrap();
        let (m1, m2, m3) = (mu.moment(1), mu.moment(2), mu.moment(3));
        assert_eq!(t.alpha()[0], c(l));
        let a2 = -l.powi(2) * m2 + l.powi(3) * m1 * m1;
        let a3 = -l.powi(2) * m3 + 2.0 * l.powi(3) * m1 * m2 - l.powi(4) * m1 * m1 * m1;
        assert!((t.alpha()[2] - a2).norm() < 1e-14);
        assert!((t.alpha()[3] - a3).norm() < 1e-14);
    }

    #[test]
    fn recursive_and_combinatorial_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = rng.random_range(2..7);
            let mu: SpectralMeasure = AtomicMeasure::random_stratified(m, &mut rng).unwrap().into();
            let lambda = rng.random_range(0.05..1.95);
            let r = alpha_recursive(&mu, lambda, 15).unwrap();
            let k = alpha_combinatorial(&mu, lambda, 15).unwrap();
            assert!(r.max_deviation(&k) < 1e-10);
        }
    }

    #[test]
    fn orthogonal_system_gives_scaled_exponentials() {
        // Equal weights on the 6th roots of unity: e_0..e_5 orthonormal.
        let emb = L2muEmbedding::new(AtomicMeasure::uniform_rational(&[0, 1, 2, 3, 4, 5], 6).unwrap(), 6).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let table = alpha_recursive(&mu, 0.6, 6).unwrap();
        let aux = aux_vectors(&emb, &table).unwrap();
        for (n, h) in aux.h().iter().enumerate() {
            let want = emb.exponential(n).unwrap().scale(c(0.6));
            assert!(h.max_abs_diff(&want).unwrap() < 1e-14);
        }
    }

    #[test]
    fn h2_matches_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(4, &mut rng).unwrap(), 3).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let l = 0.9;
        let aux = aux_vectors(&emb, &alpha_recursive(&mu, l, 3).unwrap()).unwrap();
        let g = |s, i| emb.gram(s, i).unwrap();
        let e = |n| emb.exponential(n).unwrap().clone();
        let mut want = e(2).scale(c(l));
        want.axpy(-l * l * g(2, 1).conj(), &e(1)).unwrap();
        want.axpy(-l * l * g(2, 0).conj(), &e(0)).unwrap();
        want.axpy(l.powi(3) * g(2, 1).conj() * g(1, 0).conj(), &e(0)).unwrap();
        assert!(aux.h()[2].max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn recursion_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(5, &mut rng).unwrap(), 7).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let table = alpha_recursive(&mu, 0.7, 7).unwrap();
        let aux = aux_vectors(&emb, &table).unwrap();
        assert_eq!(aux.h()[0], emb.exponential(0).unwrap().scale(c(0.7)));
        assert!(aux.deviation_from_closed_form(&emb, &table).unwrap() < 1e-10);
        assert!(aux_vectors(&emb, &alpha_recursive(&mu, 0.7, 8).unwrap()).is_err());
    }

    #[test]
    fn expansion_coeff_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(5, &mut rng).unwrap(), 30).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let table = alpha_recursive(&mu, 1.2, 30).unwrap();
        let aux = aux_vectors(&emb, &table).unwrap();
        let f = ComplexVector::new((0..5).map(|_| Complex64::new(rng.random(), rng.random())).collect()).unwrap();
        let d = expansion_coeffs(&emb, &aux, &f).unwrap();
        let fhat: Vec<_> = (0..30).map(|j| emb.inner_product(emb.exponential(j).unwrap(), &f).unwrap()).collect();
        let k = convolution_coeffs(&table, &fhat);
        for (a, b) in d.iter().zip(&k) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn expansion_of_constant_on_two_point_measure() {
        // f = e_0, λ = 1: f̂(j) = μ̂(j), so d = α * μ̂ which is (1, 0, 0, …).
        let emb = L2muEmbedding::new(AtomicMeasure::half_half(), 8).unwrap();
        let table = alpha_recursive(&half_half(), 1.0, 8).unwrap();
        let aux = aux_vectors(&emb, &table).unwrap();
        let d = expansion_coeffs(&emb, &aux, emb.exponential(0).unwrap()).unwrap();
        let fhat = half_half().moments(8);
        let k = convolution_coeffs(&table, &fhat);
        for (n, (a, b)) in d.iter().zip(&k).enumerate() {
            assert!((a - b).norm() < 1e-12);
            assert!((a - c(if n == 0 { 1.0 } else { 0.0 })).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_expansion_of_e0() {
        let emb = L2muEmbedding::new(AtomicMeasure::uniform_rational(&[0, 1, 2, 3], 4).unwrap(), 4).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let table = alpha_recursive(&mu, 0.4, 4).unwrap();
        let aux = aux_vectors(&emb, &table).unwrap();
        let d = expansion_coeffs(&emb, &aux, emb.exponential(0).unwrap()).unwrap();
        assert!((d[0] - c(0.4)).norm() < 1e-15);
        assert!(d[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn effectiveness_on_two_point_measure() {
        let r = effectiveness_sum(&alpha_recursive(&half_half(), 0.8, 200).unwrap()).unwrap();
        // Geometric series: λ⁴ / (2λ − λ²).
        let closed = 0.8f64.powi(4) / (1.6 - 0.64);
        assert!((r.target - 0.512 / 1.2).abs() < 1e-15);
        assert!((closed - r.target).abs() < 1e-15);
        assert!(r.gap.abs() < 1e-10);

        let r = effectiveness_sum(&alpha_recursive(&half_half(), 1.0, 64).unwrap()).unwrap();
        assert!((r.sum - 1.0).abs() < 1e-15 && (r.target - 1.0).abs() < 1e-15);

        let r = effectiveness_sum(&alpha_recursive(&SpectralMeasure::Lebesgue, 0.5, 64).unwrap()).unwrap();
        assert_eq!(r.sum, 0.0);
        assert!((r.target - 0.125 / 1.5).abs() < 1e-15);

        assert!(effectiveness_sum(&alpha_recursive(&half_half(), 0.5, 1).unwrap()).is_err());
    }

    #[test]
    fn partial_sums_increase_toward_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mu: SpectralMeasure = AtomicMeasure::random_stratified(5, &mut rng).unwrap().into();
        for lambda in [0.3, 0.7, 1.0, 1.5, 1.9] {
            let t = alpha_recursive(&mu, lambda, 2048).unwrap();
            let sums = t.running_sums();
            assert!(sums.windows(2).all(|w| w[1] >= w[0]));
            let target = effectiveness_target(lambda);
            assert!(*sums.last().unwrap() <= target + 1e-9);
            assert!((target - sums.last().unwrap()).abs() < 1e-4, "λ={lambda}");
        }
    }

    #[test]
    fn u_norm_two_routes() {
        let emb = L2muEmbedding::new(AtomicMeasure::half_half(), 6).unwrap();
        let r = u_norm_recursion(&emb, &alpha_recursive(&half_half(), 1.0, 6).unwrap()).unwrap();
        let expect = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((r.direct[i] - e).abs() < 1e-14);
            assert!((r.recursion[i] - e).abs() < 1e-14);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(5, &mut rng).unwrap(), 300).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        for lambda in [0.4, 1.3] {
            let r = u_norm_recursion(&emb, &alpha_recursive(&mu, lambda, 300).unwrap()).unwrap();
            assert!((r.recursion[0] - lambda * lambda).abs() < 1e-15);
            assert!(r.max_discrepancy() < 1e-9);
            assert!(r.direct.iter().all(|&x| x >= 0.0));
            assert!(*r.direct.last().unwrap() < 1e-9);
        }
    }

    #[test]
    fn norm_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(5, &mut rng).unwrap(), 13).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let table = alpha_recursive(&mu, 0.9, 13).unwrap();
        for i in 0..=5 {
            for n in i..=12 {
                let (v, u) = shift_norms(&emb, &table, i, n).unwrap();
                assert!((v - u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_sum_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let emb = L2muEmbedding::new(AtomicMeasure::random_stratified(5, &mut rng).unwrap(), 12).unwrap();
        let mu: SpectralMeasure = emb.measure().clone().into();
        let t1 = alpha_recursive(&mu, 1.0, 12).unwrap();
        let aux = aux_vectors_closed_form(&emb, &t1).unwrap();
        for n in 0..12 {
            // λ = 1: K_n(e_0) = e_0 exactly.
            let mut k = ComplexVector::zeros(5);
            for j in 0..=n {
                k.axpy(emb.inner_product(&aux.h()[j], emb.exponential(0).unwrap()).unwrap(), emb.exponential(j).unwrap())
                    .unwrap();
            }
            assert!(emb.norm(&k.sub(emb.exponential(0).unwrap()).unwrap()).unwrap() < 1e-12);
        }
        let t05 = alpha_recursive(&mu, 0.5, 12).unwrap();
        assert!(verify_partial_sum_identities(&emb, &t05, 0, 8).unwrap() < 1e-9);
        let t13 = alpha_recursive(&mu, 1.3, 12).unwrap();
        assert!(verify_partial_sum_identities(&emb, &t13, 2, 10).unwrap() < 1e-9);
        assert!(verify_partial_sum_identities(&emb, &t13, 3, 2).is_err());
        assert!(verify_partial_sum_identities(&emb, &t13, 0, 12).is_err());
    }

    #[test]
    fn csv_export_columns() {
        let t = alpha_recursive(&half_half(), 1.0, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,re_alpha,im_alpha,abs2_alpha,running_sum,target");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,-1.0000000000000000e0,"));
    }
}
