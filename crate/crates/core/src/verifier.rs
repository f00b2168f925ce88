//! Relaxed projection products and numerical certificates for their identities.
//!
//! For projections `P_1, P_2, …` and `λ ∈ (0, 2)`:
//! `T̃_n = (I − λP_n)⋯(I − λP_1)`, `Q̃_n = λ P_n T̃_{n−1}`,
//! `I − T̃_n = Σ_{j≤n} Q̃_j` and `I − T̃_N*T̃_N = ((2−λ)/λ) Σ_{n≤N} Q̃_n*Q̃_n`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kaczmarz::{run, NoiseModel, TaskSequence};
use crate::linalg::{projector_defects, row_space_projector, ComplexOperator, ComplexVector};
use crate::report::Check;
use crate::validate_lambda;

/// Idempotence / self-adjointness tolerance for input projections.
pub const PROJECTOR_TOL: f64 = 1e-9;
/// Dense verifier dimension cap.
pub const MAX_DIM: usize = 64;
/// Tolerance for the telescoping sum checked when a chain is built.
pub const TELESCOPING_TOL: f64 = 1e-9;
/// Default `ε` for certifying `‖T̃_N x‖ ≤ ε` on a basis.
pub const DEFAULT_EFFECTIVENESS_EPS: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ProjectionSequence {
    projections: Vec<ComplexOperator>,
    lambda: f64,
    dim: usize,
}

impl ProjectionSequence {
    pub fn new(projections: Vec<ComplexOperator>, lambda: f64) -> Result<Self> {
        validate_lambda(lambda)?;
        let dim = projections.first().map_or(0, ComplexOperator::rows);
        if dim > MAX_DIM {
            return Err(Error::OrderTooLarge {
                context: "dense verifier dimension",
                order: dim,
                max: MAX_DIM,
            });
        }
        for (index, p) in projections.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "projection shape",
                    expected: dim,
                    found: if p.rows() != dim { p.rows() } else { p.cols() },
                });
            }
            let (idempotence, symmetry) = projector_defects(p)?;
            if !(idempotence <= PROJECTOR_TOL && symmetry <= PROJECTOR_TOL) {
                return Err(Error::NotProjector {
                    index,
                    idempotence,
                    symmetry,
                });
            }
        }
        Ok(Self {
            projections,
            lambda,
            dim,
        })
    }

    /// `X_t†X_t` of every task, in the order the tasks are visited for `t = 1..=n`.
    pub fn from_tasks(seq: &TaskSequence, n: usize, lambda: f64) -> Result<Self> {
        let projections = (1..=n)
            .map(|t| Ok(seq.task_at(t)?.projector().clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projections, lambda)
    }

    pub fn projections(&self) -> &[ComplexOperator] {
        &self.projections
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }
}

/// `T̃_0 = I, …, T̃_N` and `Q̃_1, …, Q̃_N`.
#[derive(Clone, Debug)]
pub struct ProductChain {
    lambda: f64,
    t: Vec<ComplexOperator>,
    q: Vec<ComplexOperator>,
    telescoping_residual: f64,
}

impl ProductChain {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of factors `N`.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.t[0].rows()
    }

    /// `T̃_n` for `0 ≤ n ≤ N`.
    pub fn t(&self, n: usize) -> &ComplexOperator {
        &self.t[n]
    }

    /// `Q̃_n` for `1 ≤ n ≤ N`.
    pub fn q(&self, n: usize) -> &ComplexOperator {
        &self.q[n - 1]
    }

    /// `max_n ‖I − T̃_n − Σ_{j≤n} Q̃_j‖`, recorded at construction.
    pub fn telescoping_residual(&self) -> f64 {
        self.telescoping_residual
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::IndexOutOfRange {
                context: "product chain",
                index: n,
                limit: self.len(),
            });
        }
        Ok(())
    }
}

pub fn build_chain(seq: &ProjectionSequence, n: usize) -> Result<ProductChain> {
    if n > seq.len() {
        return Err(Error::OrderTooLarge {
            context: "projection sequence length",
            order: n,
            max: seq.len(),
        });
    }
    let dim = seq.dim();
    let lambda = seq.lambda();
    let id = ComplexOperator::identity(dim);
    let relax = Complex64::new(lambda, 0.0);

    let mut t = vec![id.clone()];
    let mut q = Vec::with_capacity(n);
    let mut q_sum = ComplexOperator::zeros(dim, dim);
    let mut telescoping_residual: f64 = 0.0;
    for p in &seq.projections()[..n] {
        let prev = t.last().expect("chain starts at identity");
        let q_n = p.matmul(prev)?.scale(relax);
        let t_n = id.sub(&p.scale(relax))?.matmul(prev)?;
        q_sum = q_sum.add(&q_n)?;
        let defect = id.sub(&t_n)?.sub(&q_sum)?.operator_norm();
        telescoping_residual = telescoping_residual.max(defect);
        q.push(q_n);
        t.push(t_n);
    }
    if !(telescoping_residual <= TELESCOPING_TOL) {
        return Err(Error::IdentityViolation {
            what: "telescoping sum I − T̃_n = Σ Q̃_j",
            residual: telescoping_residual,
            tol: TELESCOPING_TOL,
        });
    }
    Ok(ProductChain {
        lambda,
        t,
        q,
        telescoping_residual,
    })
}

/// `‖(I − T̃_N*T̃_N) − ((2−λ)/λ) Σ_{n≤N} Q̃_n*Q̃_n‖` in operator norm.
pub fn product_identity_residual(chain: &ProductChain, n: usize) -> Result<f64> {
    chain.check_index(n)?;
    let dim = chain.dim();
    let lambda = chain.lambda();
    let t_n = chain.t(n);
    let lhs = ComplexOperator::identity(dim).sub(&t_n.adjoint().matmul(t_n)?)?;
    let mut sum = ComplexOperator::zeros(dim, dim);
    for j in 1..=n {
        let q = chain.q(j);
        sum = sum.add(&q.adjoint().matmul(q)?)?;
    }
    let rhs = sum.scale(Complex64::new((2.0 - lambda) / lambda, 0.0));
    Ok(lhs.sub(&rhs)?.operator_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParsevalReport {
    /// `Σ_{j≤N} ‖Q̃_j x‖²`.
    pub sum: f64,
    /// `(λ/(2−λ))‖x‖²`.
    pub target: f64,
    pub gap: f64,
    /// `(λ/(2−λ))‖T̃_N x‖²`, which the gap must equal.
    pub predicted_gap: f64,
    /// Running sums for `N = 1, 2, …`.
    pub partial_sums: Vec<f64>,
}

impl ParsevalReport {
    pub fn gap_discrepancy(&self) -> f64 {
        (self.gap - self.predicted_gap).abs()
    }
}

pub fn parseval_gap(chain: &ProductChain, x: &ComplexVector) -> Result<ParsevalReport> {
    if x.len() != chain.dim() {
        return Err(Error::DimensionMismatch {
            context: "parseval test vector",
            expected: chain.dim(),
            found: x.len(),
        });
    }
    let ratio = chain.lambda() / (2.0 - chain.lambda());
    let mut acc = 0.0;
    let mut partial_sums = Vec::with_capacity(chain.len());
    for j in 1..=chain.len() {
        acc += chain.q(j).apply(x)?.norm_sqr();
        partial_sums.push(acc);
    }
    let target = ratio * x.norm_sqr();
    let predicted_gap = ratio * chain.t(chain.len()).apply(x)?.norm_sqr();
    Ok(ParsevalReport {
        sum: acc,
        target,
        gap: target - acc,
        predicted_gap,
        partial_sums,
    })
}

/// `max_i ‖T̃_N e_i‖` over the standard basis.
pub fn effectiveness_defect(chain: &ProductChain) -> Result<f64> {
    let t = chain.t(chain.len());
    let dim = chain.dim();
    (0..dim).try_fold(0.0f64, |worst, i| Ok(worst.max(t.apply(&ComplexVector::basis(dim, i))?.norm())))
}

/// Operational λ-effectiveness: `‖T̃_N e_i‖ ≤ eps` for every basis vector.
pub fn certify_effective(chain: &ProductChain, eps: f64) -> Result<bool> {
    Ok(effectiveness_defect(chain)? <= eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpRegretReport {
    pub lambda: f64,
    pub k: usize,
    pub cumulative: f64,
    /// `‖w*‖²/(λ(2−λ))`.
    pub target: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// Cumulative regret is nondecreasing in `k`, so the gap never grows.
    pub gap_nonincreasing: bool,
    pub gap_nonnegative: bool,
    pub cumulative_path: Vec<f64>,
}

/// Noiseless run compared against the sharp cumulative-regret constant.
/// Every task must be a partial isometry.
pub fn sharp_regret_check(seq: &TaskSequence, w_star: &ComplexVector, lambda: f64, k: usize) -> Result<SharpRegretReport> {
    validate_lambda(lambda)?;
    if let Some(index) = seq.tasks().iter().position(|t| !t.is_partial_isometry()) {
        return Err(Error::NotPartialIsometry { index });
    }
    let result = run(seq, w_star, lambda, &NoiseModel::none(), k)?;
    let target = w_star.norm_sqr() / (lambda * (2.0 - lambda));
    let path = result.ledger.cumulative;
    let cumulative = path.last().copied().unwrap_or(0.0);
    let gap = target - cumulative;
    // Rounding may nudge the sum a few ulps above the target.
    let slack = 1e-12 * target.max(1.0);
    Ok(SharpRegretReport {
        lambda,
        k,
        cumulative,
        target,
        gap,
        relative_gap: if target > 0.0 { gap.abs() / target } else { gap.abs() },
        gap_nonincreasing: path.windows(2).all(|w| w[1] >= w[0]),
        gap_nonnegative: path.iter().all(|&c| c <= target + slack),
        cumulative_path: path,
    })
}

/// Per-identity residuals of one chain, serializable as JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub lambda: f64,
    pub dim: usize,
    pub n: usize,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Telescoping, the product identity, the norm bound and scaled Parseval
/// for each test vector.
pub fn verify_chain(chain: &ProductChain, test_vectors: &[ComplexVector], tol: f64) -> Result<VerificationReport> {
    let n = chain.len();
    let mut checks = vec![
        Check::at_most("telescoping", chain.telescoping_residual(), tol),
        Check::at_most("product_identity", product_identity_residual(chain, n)?, tol),
    ];
    let worst_norm = (0..=n).map(|j| chain.t(j).operator_norm()).fold(0.0, f64::max);
    checks.push(Check::at_most("contraction_excess", (worst_norm - 1.0).max(0.0), tol));
    for (i, x) in test_vectors.iter().enumerate() {
        let p = parseval_gap(chain, x)?;
        checks.push(Check::at_most(format!("parseval_gap_identity[{i}]"), p.gap_discrepancy(), tol));
        let monotone = p.partial_sums.windows(2).all(|w| w[1] >= w[0] - tol);
        let bounded = p.partial_sums.iter().all(|&s| s <= p.target + tol);
        checks.push(Check::holds(format!("parseval_monotone_bounded[{i}]"), monotone && bounded));
    }
    Ok(VerificationReport {
        lambda: chain.lambda(),
        dim: chain.dim(),
        n,
        checks,
    })
}

/// Orthogonal projector of random rank `rank` in dimension `dim`.
pub fn random_projector(rng: &mut impl Rng, dim: usize, rank: usize) -> Result<ComplexOperator> {
    if rank == 0 {
        return Ok(ComplexOperator::zeros(dim, dim));
    }
    let a = ComplexOperator::from_fn(rank, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let p = row_space_projector(&a, None)?;
    // Symmetrize away rounding so the input tolerance is met comfortably.
    p.add(&p.adjoint()).map(|s| s.scale(Complex64::new(0.5, 0.0)))
}

/// `n` projectors of independent random ranks in `0..=dim`.
pub fn random_projection_sequence(rng: &mut impl Rng, dim: usize, n: usize, lambda: f64) -> Result<ProjectionSequence> {
    let projections = (0..n)
        .map(|_| {
            let rank = rng.random_range(0..=dim);
            random_projector(rng, dim, rank)
        })
        .collect::<Result<Vec<_>>>()?;
    ProjectionSequence::new(projections, lambda)
}

/// `P_1` onto `e_0`, then `n − 1` projections cycling over `e_1, …, e_{dim−1}`.
/// Every later range is orthogonal to `range(P_1)`, so `T̃_n e_0 = (1 − λ)e_0`.
pub fn orthogonal_block_sequence(dim: usize, n: usize, lambda: f64) -> Result<ProjectionSequence> {
    if dim < 2 {
        return Err(Error::OrderTooSmall {
            context: "orthogonal block dimension",
            order: dim,
            min: 2,
        });
    }
    let projections = (0..n)
        .map(|j| {
            let axis = if j == 0 { 0 } else { 1 + (j - 1) % (dim - 1) };
            ComplexOperator::projector_onto(&ComplexVector::basis(dim, axis))
        })
        .collect();
    ProjectionSequence::new(projections, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut impl Rng, n: usize) -> ComplexVector {
        ComplexVector::new(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    fn max_entry_diff(a: &ComplexOperator, b: &ComplexOperator) -> f64 {
        a.sub(b).unwrap().max_abs_entry()
    }

    #[test]
    fn zero_projections_leave_identity() {
        let seq = ProjectionSequence::new(vec![ComplexOperator::zeros(3, 3); 4], 0.7).unwrap();
        let chain = build_chain(&seq, 4).unwrap();
        for n in 0..=4 {
            assert_eq!(chain.t(n), &ComplexOperator::identity(3));
        }
        for n in 1..=4 {
            assert_eq!(chain.q(n).max_abs_entry(), 0.0);
        }
    }

    #[test]
    fn single_step() {
        let p = ComplexOperator::projector_onto(&ComplexVector::from_real(&[1.0, 1.0]).unwrap());
        let chain = build_chain(&ProjectionSequence::new(vec![p.clone()], 1.0).unwrap(), 1).unwrap();
        assert!(max_entry_diff(chain.t(1), &ComplexOperator::identity(2).sub(&p).unwrap()) < 1e-15);
        assert!(max_entry_diff(chain.q(1), &p) < 1e-15);
    }

    #[test]
    fn rejects_non_projectors() {
        let bad = ComplexOperator::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        let err = ProjectionSequence::new(vec![ComplexOperator::zeros(2, 2), bad], 1.0).unwrap_err();
        assert!(matches!(err, Error::NotProjector { index: 1, .. }));
        assert!(ProjectionSequence::new(vec![ComplexOperator::zeros(2, 2)], 2.5).is_err());
        let seq = ProjectionSequence::new(vec![ComplexOperator::zeros(2, 2)], 1.0).unwrap();
        assert!(build_chain(&seq, 2).is_err());
    }

    #[test]
    fn telescoping_on_random_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let projections = (0..12).map(|_| random_projector(&mut rng, 6, 1).unwrap()).collect();
        let chain = build_chain(&ProjectionSequence::new(projections, 1.4).unwrap(), 12).unwrap();
        assert!(chain.telescoping_residual() < 1e-10);
        let mut sum = ComplexOperator::zeros(6, 6);
        for n in 1..=12 {
            sum = sum.add(chain.q(n)).unwrap();
        }
        let rhs = ComplexOperator::identity(6).sub(chain.t(12)).unwrap();
        assert!(sum.sub(&rhs).unwrap().max_abs_entry() < 1e-10);
    }

    #[test]
    fn recursion_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let seq = random_projection_sequence(&mut rng, 5, 8, 0.6).unwrap();
        let chain = build_chain(&seq, 8).unwrap();
        let id = ComplexOperator::identity(5);
        let factors: Vec<_> = seq
            .projections()
            .iter()
            .map(|p| id.sub(&p.scale(Complex64::new(0.6, 0.0))).unwrap())
            .collect();
        for n in 0..=8 {
            // (I − λP_n)···(I − λP_1), multiplied left to right from the last factor.
            let mut prod = id.clone();
            for f in factors[..n].iter().rev() {
                prod = prod.matmul(f).unwrap();
            }
            assert!(max_entry_diff(chain.t(n), &prod) < 1e-12);
        }
    }

    #[test]
    fn product_identity_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for lambda in [0.3, 1.0, 1.7] {
            let dim = rng.random_range(2..=10);
            let n = rng.random_range(1..=30);
            let chain = build_chain(&random_projection_sequence(&mut rng, dim, n, lambda).unwrap(), n).unwrap();
            for j in [0, n / 2, n] {
                assert!(product_identity_residual(&chain, j).unwrap() < 1e-9);
            }
            assert_eq!(product_identity_residual(&chain, 0).unwrap(), 0.0);
            assert!(product_identity_residual(&chain, n + 1).is_err());
        }
    }

    #[test]
    fn unit_relaxation_recovers_plain_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seq = random_projection_sequence(&mut rng, 4, 6, 1.0).unwrap();
        let chain = build_chain(&seq, 6).unwrap();
        let id = ComplexOperator::identity(4);
        let mut t = id.clone();
        let mut sum = ComplexOperator::zeros(4, 4);
        for (j, p) in seq.projections().iter().enumerate() {
            let q = p.matmul(&t).unwrap();
            assert!(max_entry_diff(chain.q(j + 1), &q) < 1e-14);
            sum = sum.add(&q.adjoint().matmul(&q).unwrap()).unwrap();
            t = id.sub(p).unwrap().matmul(&t).unwrap();
        }
        let lhs = id.sub(&t.adjoint().matmul(&t).unwrap()).unwrap();
        assert!(lhs.sub(&sum).unwrap().operator_norm() < 1e-12);
    }

    #[test]
    fn contraction_and_parseval_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chain = build_chain(&random_projection_sequence(&mut rng, 6, 20, 1.6).unwrap(), 20).unwrap();
        for n in 0..=20 {
            assert!(chain.t(n).operator_norm() <= 1.0 + 1e-12);
        }
        let x = random_vector(&mut rng, 6);
        let report = parseval_gap(&chain, &x).unwrap();
        assert!(report.gap >= -1e-12);
        assert!(report.gap_discrepancy() < 1e-12);
        assert!(report.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(parseval_gap(&chain, &ComplexVector::zeros(5)).is_err());
    }

    #[test]
    fn spanning_family_closes_the_gap() {
        let dim = 4;
        let projections = (0..40).map(|j| ComplexOperator::projector_onto(&ComplexVector::basis(dim, j % dim))).collect();
        let chain = build_chain(&ProjectionSequence::new(projections, 1.0).unwrap(), 40).unwrap();
        let x = ComplexVector::from_real(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        let report = parseval_gap(&chain, &x).unwrap();
        assert!((report.target - x.norm_sqr()).abs() < 1e-15);
        assert!(report.gap.abs() < 1e-14);
        assert!(certify_effective(&chain, DEFAULT_EFFECTIVENESS_EPS).unwrap());
    }

    #[test]
    fn orthogonal_block_counterexample_stalls() {
        for lambda in [0.5, 1.3] {
            let chain = build_chain(&orthogonal_block_sequence(3, 30, lambda).unwrap(), 30).unwrap();
            let x = ComplexVector::basis(3, 0).scale(Complex64::new(2.0, -1.0));
            for n in 1..=30 {
                let tx = chain.t(n).apply(&x).unwrap();
                assert!((tx.norm() - (1.0 - lambda).abs() * x.norm()).abs() < 1e-12);
            }
            let report = parseval_gap(&chain, &x).unwrap();
            let stalled = lambda / (2.0 - lambda) * (1.0 - lambda).powi(2) * x.norm_sqr();
            assert!((report.gap - stalled).abs() < 1e-12);
            assert!(!certify_effective(&chain, DEFAULT_EFFECTIVENESS_EPS).unwrap());
        }
        // λ = 1 is effective on the same family.
        let chain = build_chain(&orthogonal_block_sequence(3, 30, 1.0).unwrap(), 30).unwrap();
        assert!(certify_effective(&chain, DEFAULT_EFFECTIVENESS_EPS).unwrap());
    }

    #[test]
    fn sharp_regret_requires_partial_isometries() {
        use crate::kaczmarz::{NormPolicy, SelectionRule};
        let half = ComplexOperator::identity(2).scale(Complex64::new(0.5, 0.0));
        let seq = TaskSequence::new(vec![half], SelectionRule::Cyclic, NormPolicy::Assert).unwrap();
        let w = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(sharp_regret_check(&seq, &w, 1.0, 5).unwrap_err(), Error::NotPartialIsometry { index: 0 });
    }

    #[test]
    fn sharp_regret_on_coordinate_rows() {
        use crate::kaczmarz::{NormPolicy, SelectionRule};
        let rows = (0..3).map(|i| ComplexOperator::row_functional(&ComplexVector::basis(3, i))).collect();
        let seq = TaskSequence::new(rows, SelectionRule::Cyclic, NormPolicy::Assert).unwrap();
        let w = ComplexVector::from_real(&[1.0, 2.0, -1.0]).unwrap();
        let r = sharp_regret_check(&seq, &w, 1.0, 3).unwrap();
        assert!((r.target - 6.0).abs() < 1e-15 && r.gap.abs() < 1e-14);
        let r = sharp_regret_check(&seq, &w, 0.5, 300).unwrap();
        assert!((r.target - 6.0 / 0.75).abs() < 1e-14);
        assert!(r.relative_gap < 1e-12 && r.gap_nonincreasing && r.gap_nonnegative);
    }

    #[test]
    fn report_serializes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let chain = build_chain(&random_projection_sequence(&mut rng, 3, 5, 0.9).unwrap(), 5).unwrap();
        let report = verify_chain(&chain, &[random_vector(&mut rng, 3)], 1e-9).unwrap();
        assert!(report.all_passed());
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["checks"][0]["name"], "telescoping");
        assert_eq!(json["checks"].as_array().unwrap().len(), 5);
    }
}
