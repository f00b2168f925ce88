//! Probability measures on `[0, 1)` seen through their Fourier–Stieltjes
//! moments `μ̂(n) = ∫ e^{−2πinx} dμ(x)`.
//!
//! Atomic measures additionally get an exact `L²(μ)` model: a function is the
//! vector of its values at the atoms and the inner product is the weighted sum
//! `Σ_j w_j conj(f_j) g_j`. The interval `[0, 1)` is identified with the circle
//! by wraparound.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

pub const DEFAULT_CANTOR_DEPTH: u32 = 64;
pub const MIN_CANTOR_DEPTH: u32 = 30;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Atom location in `[0, 1)`. Rational locations keep `n·x mod 1` exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Rational { num: i64, den: i64 },
    Real(f64),
}

impl Location {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidMeasure(format!(
                "location denominator must be positive, got {den}"
            )));
        }
        if num < 0 || num >= den {
            return Err(Error::InvalidMeasure(format!(
                "location {num}/{den} is outside [0, 1)"
            )));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        Ok(Location::Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn real(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidMeasure(format!(
                "location {x} is outside [0, 1)"
            )));
        }
        Ok(Location::Real(x))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Location::Rational { num, den } => num as f64 / den as f64,
            Location::Real(x) => x,
        }
    }

    /// Fractional part of `n·x`, in `[0, 1)`.
    pub fn phase(&self, n: i64) -> f64 {
        match *self {
            Location::Rational { num, den } => {
                let r = (n as i128 * num as i128).rem_euclid(den as i128);
                r as f64 / den as f64
            }
            Location::Real(x) => {
                let p = (n as f64 * x).rem_euclid(1.0);
                if p >= 1.0 {
                    0.0
                } else {
                    p
                }
            }
        }
    }

    /// `e^{2πinx}`.
    pub fn character(&self, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.phase(n))
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Rational { num, den } => write!(f, "{num}/{den}"),
            Location::Real(x) => write!(f, "{x}"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Location,
    pub weight: f64,
}

/// Finite convex combination of point masses with distinct locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for a in &atoms {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom weight must be positive and finite, got {}",
                    a.weight
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[..i] {
                if same_location(&a.location, &b.location) {
                    return Err(Error::InvalidMeasure(format!(
                        "duplicate atom location {}",
                        a.location
                    )));
                }
            }
        }
        Ok(Self { atoms })
    }

    /// Equal-weight atoms at the given rational points `num/den`.
    pub fn uniform_rational(nums: &[i64], den: i64) -> Result<Self> {
        let w = 1.0 / nums.len() as f64;
        let atoms = nums
            .iter()
            .map(|&p| {
                Ok(Atom {
                    location: Location::rational(p, den)?,
                    weight: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    /// `½(δ_0 + δ_{1/2})`, the two-point measure used throughout the tests.
    pub fn half_half() -> Self {
        Self::uniform_rational(&[0, 1], 2).expect("valid measure")
    }

    /// Random measure with one atom per stratum `[j/m, (j+1)/m)`, placed in
    /// the middle half of the stratum, and weights drawn from `[0.5, 1.5]`
    /// before normalization. The strata keep atoms separated by at least
    /// `1/(2m)`.
    pub fn random_stratified(count: usize, rng: &mut impl Rng) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let m = count as f64;
        let raw: Vec<(f64, f64)> = (0..count)
            .map(|j| {
                let x = (j as f64 + rng.random_range(0.25..0.75)) / m;
                (x, rng.random_range(0.5..1.5))
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let mut atoms: Vec<Atom> = raw
            .into_iter()
            .map(|(x, w)| Atom {
                location: Location::Real(x),
                weight: w / total,
            })
            .collect();
        // Push the rounding residue into the first weight.
        let residue = 1.0 - atoms.iter().map(|a| a.weight).sum::<f64>();
        atoms[0].weight += residue;
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn moment(&self, n: i64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.location.character(n).conj())
            .sum()
    }

    /// `F(z) = Σ_j w_j / (1 − z e^{−2πi x_j})`, exact for `|z| < 1`.
    pub fn cauchy_transform_at(&self, z: Complex64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.weight / (1.0 - z * a.location.character(1).conj()))
            .sum()
    }
}

fn same_location(a: &Location, b: &Location) -> bool {
    match (a, b) {
        (
            Location::Rational { num: p, den: q },
            Location::Rational { num: r, den: s },
        ) => p == r && q == s,
        _ => a.value() == b.value(),
    }
}

/// Spectral measure exposed through its Fourier–Stieltjes moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpectralMeasure {
    Atomic(AtomicMeasure),
    /// Middle-thirds Cantor measure; the infinite product for `μ̂` is
    /// truncated after `depth` factors.
    Cantor { depth: u32 },
    Lebesgue,
}

impl SpectralMeasure {
    pub fn cantor(depth: u32) -> Result<Self> {
        if depth < MIN_CANTOR_DEPTH {
            return Err(Error::InvalidMeasure(format!(
                "Cantor truncation depth must be at least {MIN_CANTOR_DEPTH}, got {depth}"
            )));
        }
        Ok(SpectralMeasure::Cantor { depth })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectralMeasure::Atomic(_) => "atomic",
            SpectralMeasure::Cantor { .. } => "cantor",
            SpectralMeasure::Lebesgue => "lebesgue",
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicMeasure> {
        match self {
            SpectralMeasure::Atomic(a) => Some(a),
            _ => None,
        }
    }

    /// `μ̂(n)`.
    pub fn moment(&self, n: i64) -> Complex64 {
        match self {
            SpectralMeasure::Atomic(a) => a.moment(n),
            SpectralMeasure::Lebesgue => {
                if n == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            SpectralMeasure::Cantor { depth } => cantor_moment(n, *depth),
        }
    }

    /// `μ̂(0), …, μ̂(count − 1)`.
    pub fn moments(&self, count: usize) -> Vec<Complex64> {
        (0..count as i64).map(|n| self.moment(n)).collect()
    }

    /// Closed-form `F(z)` when one is available (atomic and Lebesgue).
    pub fn cauchy_transform_at(&self, z: Complex64) -> Option<Complex64> {
        match self {
            SpectralMeasure::Atomic(a) => Some(a.cauchy_transform_at(z)),
            SpectralMeasure::Lebesgue => Some(Complex64::new(1.0, 0.0)),
            SpectralMeasure::Cantor { .. } => None,
        }
    }
}

impl From<AtomicMeasure> for SpectralMeasure {
    fn from(a: AtomicMeasure) -> Self {
        SpectralMeasure::Atomic(a)
    }
}

/// `μ̂(n) = (−1)^n ∏_{k≤depth} cos(2πn/3^k)` for the middle-thirds Cantor
/// measure, from the random ternary digit representation `Σ a_k 3^{−k}`,
/// `a_k ∈ {0, 2}`. The phase `n mod 3^k` is reduced in integer arithmetic
/// while `3^k` fits in an `i128`.
pub fn cantor_moment(n: i64, depth: u32) -> Complex64 {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut product = 1.0;
    let mut power: i128 = 1;
    let mut exact = true;
    for k in 1..=depth {
        let frac = if exact {
            match power.checked_mul(3) {
                Some(p) => {
                    power = p;
                    (n as i128).rem_euclid(power) as f64 / power as f64
                }
                None => {
                    exact = false;
                    n as f64 / 3f64.powi(k as i32)
                }
            }
        } else {
            n as f64 / 3f64.powi(k as i32)
        };
        product *= (2.0 * PI * frac).cos();
    }
    Complex64::new(sign * product, 0.0)
}

/// Fourier–Stieltjes transform of the Cantor measure at real frequency `t`:
/// `e^{−iπt} ∏_{k≤depth} cos(2πt/3^k)`.
pub fn cantor_transform(t: f64, depth: u32) -> Complex64 {
    let product: f64 = (1..=depth)
        .map(|k| (2.0 * PI * t / 3f64.powi(k as i32)).cos())
        .product();
    Complex64::from_polar(product, -PI * t)
}

pub fn moment(mu: &SpectralMeasure, n: i64) -> Complex64 {
    mu.moment(n)
}

/// Exact `L²(μ)` model for an atomic measure together with the exponentials
/// `e_n(x) = e^{2πinx}`, `n = 0..count`, tabulated at the atoms.
#[derive(Clone, Debug)]
pub struct L2muEmbedding {
    measure: AtomicMeasure,
    weights: Vec<f64>,
    columns: Vec<ComplexVector>,
}

impl L2muEmbedding {
    pub fn new(measure: AtomicMeasure, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::OrderTooSmall {
                context: "exponential system",
                order: 0,
                min: 1,
            });
        }
        let weights = measure.weights();
        let columns = (0..count as i64)
            .map(|n| exponential_vector(&measure, n))
            .collect();
        Ok(Self {
            measure,
            weights,
            columns,
        })
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.measure
    }

    /// Number of atoms, the dimension of `L²(μ)`.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Number of tabulated exponentials.
    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tabulated `e_n`.
    pub fn exponential(&self, n: usize) -> Result<&ComplexVector> {
        self.columns.get(n).ok_or(Error::IndexOutOfRange {
            context: "exponential system",
            index: n,
            limit: self.columns.len(),
        })
    }

    /// `e_n` for any integer `n`, computed on demand.
    pub fn exponential_any(&self, n: i64) -> ComplexVector {
        exponential_vector(&self.measure, n)
    }

    /// `⟨f, g⟩ = Σ_j w_j conj(f_j) g_j`.
    pub fn inner_product(&self, f: &ComplexVector, g: &ComplexVector) -> Result<Complex64> {
        self.check_dim(f)?;
        self.check_dim(g)?;
        Ok(self
            .weights
            .iter()
            .zip(f.iter().zip(g.iter()))
            .map(|(w, (a, b))| *w * a.conj() * b)
            .sum())
    }

    pub fn norm(&self, f: &ComplexVector) -> Result<f64> {
        Ok(self.inner_product(f, f)?.re.max(0.0).sqrt())
    }

    /// `⟨e_s, e_i⟩` through the tabulated columns.
    pub fn gram(&self, s: usize, i: usize) -> Result<Complex64> {
        self.inner_product(self.exponential(s)?, self.exponential(i)?)
    }

    /// Isometry `L²(μ) → ℂ^m`, `f ↦ (√w_j f_j)`.
    pub fn to_euclidean(&self, f: &ComplexVector) -> Result<ComplexVector> {
        self.check_dim(f)?;
        Ok(ComplexVector::from_vec_unchecked(
            self.weights
                .iter()
                .zip(f.iter())
                .map(|(w, z)| z * w.sqrt())
                .collect(),
        ))
    }

    /// Inverse of [`Self::to_euclidean`].
    pub fn from_euclidean(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.check_dim(v)?;
        Ok(ComplexVector::from_vec_unchecked(
            self.weights
                .iter()
                .zip(v.iter())
                .map(|(w, z)| z / w.sqrt())
                .collect(),
        ))
    }

    fn check_dim(&self, f: &ComplexVector) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "L2(mu) vector",
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

fn exponential_vector(measure: &AtomicMeasure, n: i64) -> ComplexVector {
    ComplexVector::from_vec_unchecked(measure.atoms().iter().map(|a| a.location.character(n)).collect())
}

/// Tabulate `e_0, …, e_{count−1}` in `L²(μ)`; only atomic measures have a
/// finite model.
pub fn exponential_system(mu: &SpectralMeasure, count: usize) -> Result<L2muEmbedding> {
    match mu {
        SpectralMeasure::Atomic(a) => L2muEmbedding::new(a.clone(), count),
        _ => Err(Error::NotAtomic),
    }
}

pub fn inner_product(
    emb: &L2muEmbedding,
    f: &ComplexVector,
    g: &ComplexVector,
) -> Result<Complex64> {
    emb.inner_product(f, g)
}
