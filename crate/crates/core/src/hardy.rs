//! Truncated power series on the unit disk: the Cauchy transform `F`, the
//! generating function `A = λ/(1 − λ + λF)`, `g = (A − λ)/λ`, the inner
//! function `φ = (1 − λF)/(1 − λ + λF)` and the λ-transform `V = N_f · A`.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::report::{fmt_f64, write_csv};
use crate::validate_lambda;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 512;
/// Minimum number of trapezoid nodes on a circle.
pub const MIN_QUADRATURE_NODES: usize = 2048;
/// Radii of the default boundary sweep.
pub const DEFAULT_RADII: [f64; 3] = [0.9, 0.99, 0.999];

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Power-series coefficients plus, when known, an exact pointwise formula.
#[derive(Clone)]
pub struct DiskFunction {
    coeffs: Vec<Complex64>,
    closed_form: Option<Evaluator>,
}

impl fmt::Debug for DiskFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiskFunction")
            .field("trunc_order", &self.coeffs.len())
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl DiskFunction {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            closed_form: None,
        }
    }

    fn with_closed_form(mut self, f: Option<Evaluator>) -> Self {
        self.closed_form = f;
        self
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn eval_closed(&self, z: Complex64) -> Option<Complex64> {
        self.closed_form.as_ref().map(|f| f(z))
    }

    /// Exact value when a formula is known, otherwise the truncated series.
    pub fn value(&self, z: Complex64) -> Complex64 {
        self.eval_closed(z).unwrap_or_else(|| self.eval(z))
    }
}

/// Product of two series, truncated to `n` terms.
pub fn series_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(b.len().saturating_sub(1));
            let hi = k.min(a.len().saturating_sub(1));
            if a.is_empty() || b.is_empty() || lo > hi {
                return Complex64::new(0.0, 0.0);
            }
            (lo..=hi).map(|j| a[j] * b[k - j]).sum()
        })
        .collect()
}

/// `num / den` truncated to `n` terms by the triangular recurrence
/// `q_k = (num_k − Σ_{j<k} q_j den_{k−j}) / den_0`.
pub fn series_div(num: &[Complex64], den: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    let d0 = den.first().copied().unwrap_or_default();
    if d0.norm() == 0.0 {
        return Err(Error::InvalidMeasure("series division by a series with zero constant term".into()));
    }
    let mut q = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = num.get(k).copied().unwrap_or_default();
        for j in k.saturating_sub(den.len() - 1)..k {
            acc -= q[j] * den[k - j];
        }
        q.push(acc / d0);
    }
    Ok(q)
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OrderTooSmall {
            context: "series truncation",
            order: 0,
            min: 1,
        });
    }
    Ok(())
}

fn cauchy_closed_form(mu: &SpectralMeasure) -> Option<Evaluator> {
    match mu {
        SpectralMeasure::Atomic(a) => {
            let a = a.clone();
            Some(Arc::new(move |z| a.cauchy_transform_at(z)))
        }
        SpectralMeasure::Lebesgue => Some(Arc::new(|_| Complex64::new(1.0, 0.0))),
        SpectralMeasure::Cantor { .. } => None,
    }
}

/// `F(z) = Σ μ̂(n) zⁿ`.
pub fn cauchy_transform(mu: &SpectralMeasure, n: usize) -> Result<DiskFunction> {
    check_order(n)?;
    Ok(DiskFunction::from_coeffs(mu.moments(n)).with_closed_form(cauchy_closed_form(mu)))
}

/// Coefficients of `1 − λ + λF`.
fn relaxed_denominator(moments: &[Complex64], lambda: f64) -> Vec<Complex64> {
    moments
        .iter()
        .enumerate()
        .map(|(k, m)| if k == 0 { 1.0 - lambda + lambda * m } else { lambda * m })
        .collect()
}

/// `A(z) = λ / (1 − λ + λF(z))`.
pub fn generating_function(mu: &SpectralMeasure, lambda: f64, n: usize) -> Result<DiskFunction> {
    validate_lambda(lambda)?;
    check_order(n)?;
    let den = relaxed_denominator(&mu.moments(n), lambda);
    let coeffs = series_div(&[Complex64::new(lambda, 0.0)], &den, n)?;
    let closed = cauchy_closed_form(mu).map(|f| -> Evaluator { Arc::new(move |z| lambda / (1.0 - lambda + lambda * f(z))) });
    Ok(DiskFunction::from_coeffs(coeffs).with_closed_form(closed))
}

/// `g = (A − λ)/λ`, which vanishes at the origin.
pub fn g_function(mu: &SpectralMeasure, lambda: f64, n: usize) -> Result<DiskFunction> {
    let a = generating_function(mu, lambda, n)?;
    let coeffs = a
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { c / lambda - 1.0 } else { c / lambda })
        .collect();
    let closed = a.closed_form.clone().map(|f| -> Evaluator { Arc::new(move |z| (f(z) - lambda) / lambda) });
    Ok(DiskFunction::from_coeffs(coeffs).with_closed_form(closed))
}

/// `φ(z) = (1 − λF(z)) / (1 − λ + λF(z))`.
pub fn inner_function(mu: &SpectralMeasure, lambda: f64, n: usize) -> Result<DiskFunction> {
    validate_lambda(lambda)?;
    check_order(n)?;
    let moments = mu.moments(n);
    let num: Vec<Complex64> = moments
        .iter()
        .enumerate()
        .map(|(k, m)| if k == 0 { 1.0 - lambda * m } else { -lambda * m })
        .collect();
    let coeffs = series_div(&num, &relaxed_denominator(&moments, lambda), n)?;
    let closed = cauchy_closed_form(mu).map(|f| -> Evaluator {
        Arc::new(move |z| {
            let fz = f(z);
            (1.0 - lambda * fz) / (1.0 - lambda + lambda * fz)
        })
    });
    Ok(DiskFunction::from_coeffs(coeffs).with_closed_form(closed))
}

/// `V(z) = N_f(z) A(z)` with `N_f(z) = Σ f̂(j) zʲ`; coefficient `n` is
/// `Σ_{j≤n} α_{n−j} f̂(j)`.
pub fn lambda_transform(mu: &SpectralMeasure, fhat: &[Complex64], lambda: f64, n: usize) -> Result<DiskFunction> {
    if fhat.len() < n {
        return Err(Error::DimensionMismatch {
            context: "Fourier coefficients for the λ-transform",
            expected: n,
            found: fhat.len(),
        });
    }
    let a = generating_function(mu, lambda, n)?;
    Ok(DiskFunction::from_coeffs(series_mul(&fhat[..n], a.coeffs(), n)))
}

/// Center `(λ−1)/(2−λ)` and radius `1/(2−λ)` of the disk that `g` maps into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MobiusData {
    pub lambda: f64,
    pub c: Complex64,
    pub r: f64,
}

impl MobiusData {
    pub fn new(lambda: f64) -> Result<Self> {
        validate_lambda(lambda)?;
        Ok(Self {
            lambda,
            c: Complex64::new((lambda - 1.0) / (2.0 - lambda), 0.0),
            r: 1.0 / (2.0 - lambda),
        })
    }

    /// `|r² − |c|² − λ/(2−λ)|`.
    pub fn identity_defect(&self) -> f64 {
        (self.r * self.r - self.c.norm_sqr() - self.lambda / (2.0 - self.lambda)).abs()
    }
}

fn validate_nodes(nodes: usize) -> Result<()> {
    if nodes < MIN_QUADRATURE_NODES || !nodes.is_power_of_two() {
        return Err(Error::OrderTooSmall {
            context: "quadrature nodes (power of two)",
            order: nodes,
            min: MIN_QUADRATURE_NODES,
        });
    }
    Ok(())
}

fn validate_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidMeasure(format!("radius {r} must lie strictly inside (0, 1)")));
    }
    Ok(())
}

/// Smallest admissible power-of-two node count resolving a degree-`n` series.
pub fn nodes_for_order(n: usize) -> usize {
    (2 * n).max(MIN_QUADRATURE_NODES).next_power_of_two()
}

fn circle(r: f64, nodes: usize) -> impl Iterator<Item = Complex64> {
    (0..nodes).map(move |m| Complex64::from_polar(r, TAU * m as f64 / nodes as f64))
}

/// Trapezoid mean of `f(re^{iθ})` over `[0, 2π)`.
pub fn circle_mean(f: &DiskFunction, r: f64, nodes: usize) -> Result<Complex64> {
    validate_radius(r)?;
    validate_nodes(nodes)?;
    Ok(circle(r, nodes).map(|z| f.eval(z)).sum::<Complex64>() / nodes as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusRow {
    pub r: f64,
    /// Trapezoid mean of `|A_N(re^{it}) − λ|²`.
    pub quadrature: f64,
    /// `Σ_{1≤n<N} |α_n|² r^{2n}`.
    pub weighted_sum: f64,
    pub parseval_gap: f64,
    pub target_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub lambda: f64,
    pub order: usize,
    pub nodes: usize,
    /// `Σ_{1≤n<N} |α_n|²`.
    pub coefficient_sum: f64,
    /// `λ³/(2−λ)`.
    pub target: f64,
    pub sum_gap: f64,
    pub rows: Vec<RadiusRow>,
    /// Polynomial extrapolation of the quadratures in `1 − r²` to `r = 1`.
    pub extrapolated: Option<f64>,
    pub extrapolated_gap: Option<f64>,
}

/// Value at `0` of the interpolating polynomial through `(x_i, y_i)`.
fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| {
            let basis: f64 = (0..x.len()).filter(|&j| j != i).map(|j| x[j] / (x[j] - x[i])).product();
            y[i] * basis
        })
        .sum()
}

/// Compares the coefficient sum, circle quadratures of `|A − λ|²` at each
/// radius, and the target `λ³/(2−λ)`.
pub fn coefficient_sum_vs_boundary(
    mu: &SpectralMeasure,
    lambda: f64,
    n: usize,
    radii: &[f64],
    nodes: usize,
) -> Result<BoundaryReport> {
    validate_nodes(nodes)?;
    for &r in radii {
        validate_radius(r)?;
    }
    let a = generating_function(mu, lambda, n)?;
    let target = lambda.powi(3) / (2.0 - lambda);
    let coefficient_sum: f64 = a.coeffs()[1..].iter().map(|c| c.norm_sqr()).sum();

    let rows: Vec<RadiusRow> = radii
        .par_iter()
        .map(|&r| {
            let quadrature = circle(r, nodes).map(|z| (a.eval(z) - lambda).norm_sqr()).sum::<f64>() / nodes as f64;
            let r2 = r * r;
            let weighted_sum: f64 = a.coeffs()[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm_sqr() * r2.powi(k as i32 + 1))
                .sum();
            RadiusRow {
                r,
                quadrature,
                weighted_sum,
                parseval_gap: (quadrature - weighted_sum).abs(),
                target_gap: (quadrature - target).abs(),
            }
        })
        .collect();

    let extrapolated = (rows.len() >= 2).then(|| {
        let x: Vec<f64> = rows.iter().map(|row| 1.0 - row.r * row.r).collect();
        let y: Vec<f64> = rows.iter().map(|row| row.quadrature).collect();
        extrapolate_to_zero(&x, &y)
    });
    Ok(BoundaryReport {
        lambda,
        order: n,
        nodes,
        coefficient_sum,
        target,
        sum_gap: (target - coefficient_sum).abs(),
        rows,
        extrapolated,
        extrapolated_gap: extrapolated.map(|e| (e - target).abs()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub r: f64,
    pub theta: f64,
    pub value: Complex64,
}

/// Values on `radii × {2πj/angles}`, using the exact formula when available.
pub fn disk_grid(f: &DiskFunction, radii: &[f64], angles: usize) -> Vec<GridPoint> {
    radii
        .par_iter()
        .flat_map_iter(|&r| {
            (0..angles).map(move |j| {
                let theta = TAU * j as f64 / angles as f64;
                GridPoint {
                    r,
                    theta,
                    value: f.value(Complex64::from_polar(r, theta)),
                }
            })
        })
        .collect()
}

/// `count` radii evenly spaced in `(0, r_max]`.
pub fn interior_radii(count: usize, r_max: f64) -> Vec<f64> {
    (1..=count).map(|i| r_max * i as f64 / count as f64).collect()
}

/// Columns `r, theta, re, im, modulus`.
pub fn write_grid_csv<W: Write>(out: W, grid: &[GridPoint]) -> io::Result<()> {
    write_csv(
        out,
        &["r", "theta", "re", "im", "modulus"],
        grid.iter().map(|p| {
            vec![
                fmt_f64(p.r),
                fmt_f64(p.theta),
                fmt_f64(p.value.re),
                fmt_f64(p.value.im),
                fmt_f64(p.value.norm()),
            ]
        }),
    )
}

/// `max_θ (1 − |f(re^{iθ})|)` on an `angles`-point circle.
pub fn max_modulus_deficit(f: &DiskFunction, r: f64, angles: usize) -> f64 {
    circle(r, angles).map(|z| 1.0 - f.value(z).norm()).fold(f64::NEG_INFINITY, f64::max)
}
