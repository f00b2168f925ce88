//! Dense complex linear algebra.
//!
//! Vectors and operators are small, immutable-after-construction carriers in
//! double precision. The SVD is delegated to `nalgebra`; everything built on
//! top of it (pseudoinverse, row-space projector, partial-isometry test) lives
//! here so the rest of the crate never touches `nalgebra` types directly.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative rank cutoff applied to the largest singular value when no
/// explicit tolerance is supplied.
pub const DEFAULT_RELATIVE_RANK_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { what: "vector" });
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            entries: vec![ZERO; len],
        }
    }

    /// Unit coordinate vector `e_index` in `len` dimensions.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.entries[index] = ONE;
        v
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product, conjugate-linear in `self`.
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        self.check_len(other, "dot")?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_len(other, "vector add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other, "vector sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: Complex64, other: &Self) -> Result<()> {
        self.check_len(other, "axpy")?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_len(other, "max_abs_diff")?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn check_len(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, index: usize) -> &Complex64 {
        &self.entries[index]
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "operator data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { what: "operator" });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "operator rows",
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::new(r, c, data)
    }

    /// The 1×n operator `h ↦ ⟨v, h⟩`.
    pub fn row_functional(v: &ComplexVector) -> Self {
        Self {
            rows: 1,
            cols: v.len(),
            data: v.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Rank-one operator `h ↦ ⟨v, h⟩ u`.
    pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Orthogonal projector onto the span of `v` (zero if `v` is zero).
    pub fn projector_onto(v: &ComplexVector) -> Self {
        let n2 = v.norm_sqr();
        if n2 == 0.0 {
            return Self::zeros(v.len(), v.len());
        }
        Self::outer(v, v).scale(Complex64::new(1.0 / n2, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "operator add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "operator sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = vec![ZERO; self.rows * other.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                context: "operator apply",
                expected: self.cols,
                found: x.len(),
            });
        }
        let out = (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x.as_slice())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.to_matrix()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// `true` when the operator violates `‖X‖ ≤ 1` beyond `slack`.
    pub fn exceeds_unit_norm(&self, slack: f64) -> bool {
        self.operator_norm() > 1.0 + slack
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ComplexOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Thin SVD `A = U Σ V*` with singular values sorted descending.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// `U`, rows × r.
    pub left: ComplexOperator,
    pub singulars: Vec<f64>,
    /// `V` (not `V*`), cols × r.
    pub right: ComplexOperator,
    pub rank_tol: f64,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singulars.iter().filter(|&&s| s > self.rank_tol).count()
    }

    pub fn reconstruct(&self) -> ComplexOperator {
        let r = self.singulars.len();
        ComplexOperator::from_fn(self.left.rows(), self.right.rows(), |i, j| {
            (0..r)
                .map(|k| self.left.get(i, k) * self.singulars[k] * self.right.get(j, k).conj())
                .sum()
        })
    }
}

fn validate_input(a: &ComplexOperator, rank_tol: Option<f64>) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "operator" });
    }
    match rank_tol {
        Some(t) if t.is_nan() => Err(Error::NonFinite { what: "rank tolerance" }),
        Some(t) if t < 0.0 => Err(Error::NegativeTolerance(t)),
        _ => Ok(()),
    }
}

/// Thin SVD. `rank_tol` defaults to `1e-12 · σ_max`.
pub fn svd(a: &ComplexOperator, rank_tol: Option<f64>) -> Result<SvdFactors> {
    validate_input(a, rank_tol)?;
    let r = a.rows.min(a.cols);
    if r == 0 {
        return Ok(SvdFactors {
            left: ComplexOperator::zeros(a.rows, 0),
            singulars: Vec::new(),
            right: ComplexOperator::zeros(a.cols, 0),
            rank_tol: rank_tol.unwrap_or(0.0),
        });
    }
    let decomposition = a.to_matrix().svd(true, true);
    let u = decomposition.u.expect("U requested");
    let v_t = decomposition.v_t.expect("V* requested");
    let s = decomposition.singular_values;

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let singulars: Vec<f64> = order.iter().map(|&k| s[k].max(0.0)).collect();
    let left = ComplexOperator::from_fn(a.rows, r, |i, k| u[(i, order[k])]);
    let right = ComplexOperator::from_fn(a.cols, r, |j, k| v_t[(order[k], j)].conj());
    let sigma_max = singulars.first().copied().unwrap_or(0.0);
    Ok(SvdFactors {
        left,
        singulars,
        right,
        rank_tol: rank_tol.unwrap_or(DEFAULT_RELATIVE_RANK_TOL * sigma_max),
    })
}

/// Moore–Penrose pseudoinverse `V Σ⁺ U*`; singular values at or below
/// `rank_tol` are treated as zero.
pub fn pseudoinverse(a: &ComplexOperator, rank_tol: Option<f64>) -> Result<ComplexOperator> {
    let f = svd(a, rank_tol)?;
    let kept: Vec<(usize, f64)> = f
        .singulars
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > f.rank_tol && s > 0.0)
        .map(|(k, &s)| (k, 1.0 / s))
        .collect();
    Ok(ComplexOperator::from_fn(a.cols, a.rows, |i, j| {
        kept.iter()
            .map(|&(k, inv)| f.right.get(i, k) * inv * f.left.get(j, k).conj())
            .sum()
    }))
}

/// Orthogonal projector `X†X` onto the row space of `a`.
pub fn row_space_projector(a: &ComplexOperator, rank_tol: Option<f64>) -> Result<ComplexOperator> {
    let pinv = pseudoinverse(a, rank_tol)?;
    pinv.matmul(a)
}

/// `true` iff `X*X` is a projector, i.e. `‖X*X − (X*X)²‖ ≤ tol`.
pub fn is_partial_isometry(a: &ComplexOperator, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::NonPositiveTolerance(tol));
    }
    validate_input(a, None)?;
    let gram = a.adjoint().matmul(a)?;
    let defect = gram.sub(&gram.matmul(&gram)?)?;
    Ok(defect.operator_norm() <= tol)
}

/// Idempotence and self-adjointness defects `(‖P² − P‖, ‖P* − P‖)`.
pub fn projector_defects(p: &ComplexOperator) -> Result<(f64, f64)> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch {
            context: "projector",
            expected: p.rows(),
            found: p.cols(),
        });
    }
    let idem = p.matmul(p)?.sub(p)?.operator_norm();
    let sym = p.adjoint().sub(p)?.operator_norm();
    Ok((idem, sym))
}

/// Maximum relative defect over the four Moore–Penrose conditions.
pub fn moore_penrose_defect(a: &ComplexOperator, pinv: &ComplexOperator) -> Result<f64> {
    let scale_a = a.operator_norm().max(1.0);
    let scale_p = pinv.operator_norm().max(1.0);
    let axa = a.matmul(pinv)?.matmul(a)?;
    let xax = pinv.matmul(a)?.matmul(pinv)?;
    let ax = a.matmul(pinv)?;
    let xa = pinv.matmul(a)?;
    let d1 = axa.sub(a)?.operator_norm() / scale_a;
    let d2 = xax.sub(pinv)?.operator_norm() / scale_p;
    let d3 = ax.adjoint().sub(&ax)?.operator_norm();
    let d4 = xa.adjoint().sub(&xa)?.operator_norm();
    Ok(d1.max(d2).max(d3).max(d4))
}
