//! Online (block, relaxed, noisy) Kaczmarz iteration with regret bookkeeping.
//!
//! Starting from `w_0 = 0`, each step observes `y_t = X_t w* (+ η_t)` and
//! updates `w_t = w_{t−1} + λ X_t†(y_t − X_t w_{t−1})`. The regret of step `t`
//! is `‖X_t w_{t−1} − y_t‖²`.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_partial_isometry, pseudoinverse, ComplexOperator, ComplexVector};
use crate::measures::L2muEmbedding;
use crate::report::{fmt_f64, write_csv};
use crate::validate_lambda;

/// Slack allowed above 1 when checking `‖X_t‖ ≤ 1`.
pub const NORM_SLACK: f64 = 1e-12;
/// The run aborts once `‖w_t − w*‖` exceeds this multiple of `‖w*‖`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// Tolerance for classifying tasks as partial isometries.
pub const PARTIAL_ISOMETRY_TOL: f64 = 1e-10;

/// Which task is presented at step `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// `τ(t) = (t − 1) mod m`.
    Cyclic,
    /// `τ(t) = t − 1`; the horizon cannot exceed the number of tasks.
    Natural,
    /// `τ(t)` read from the list.
    Explicit(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormPolicy {
    /// Reject tasks with `‖X_t‖ > 1`.
    #[default]
    Assert,
    /// Divide such tasks by their norm.
    Rescale,
    Allow,
}

/// One measurement operator with its cached pseudoinverse and row-space projector.
#[derive(Clone, Debug)]
pub struct Task {
    op: ComplexOperator,
    pinv: ComplexOperator,
    projector: ComplexOperator,
    pinv_norm_sqr: f64,
    partial_isometry: bool,
}

impl Task {
    pub fn new(op: ComplexOperator) -> Result<Self> {
        let pinv = pseudoinverse(&op, None)?;
        let projector = pinv.matmul(&op)?;
        let pinv_norm = pinv.operator_norm();
        let partial_isometry = is_partial_isometry(&op, PARTIAL_ISOMETRY_TOL)?;
        Ok(Self {
            op,
            pinv,
            projector,
            pinv_norm_sqr: pinv_norm * pinv_norm,
            partial_isometry,
        })
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn pinv(&self) -> &ComplexOperator {
        &self.pinv
    }

    /// `X†X`.
    pub fn projector(&self) -> &ComplexOperator {
        &self.projector
    }

    pub fn is_partial_isometry(&self) -> bool {
        self.partial_isometry
    }
}

#[derive(Clone, Debug)]
pub struct TaskSequence {
    tasks: Vec<Task>,
    rule: SelectionRule,
    norm_policy: NormPolicy,
    dim: usize,
    c: f64,
}

impl TaskSequence {
    pub fn new(ops: Vec<ComplexOperator>, rule: SelectionRule, norm_policy: NormPolicy) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidTasks("no tasks supplied".into()));
        };
        let dim = first.cols();
        if let SelectionRule::Explicit(order) = &rule {
            if let Some(&bad) = order.iter().find(|&&i| i >= ops.len()) {
                return Err(Error::IndexOutOfRange {
                    context: "explicit task order",
                    index: bad,
                    limit: ops.len(),
                });
            }
        }
        let mut tasks = Vec::with_capacity(ops.len());
        for (index, op) in ops.into_iter().enumerate() {
            if op.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "task domain",
                    expected: dim,
                    found: op.cols(),
                });
            }
            let op = match norm_policy {
                NormPolicy::Allow => op,
                NormPolicy::Assert => {
                    if op.exceeds_unit_norm(NORM_SLACK) {
                        return Err(Error::NormViolation {
                            index,
                            norm: op.operator_norm(),
                        });
                    }
                    op
                }
                NormPolicy::Rescale => {
                    let norm = op.operator_norm();
                    if norm > 1.0 {
                        op.scale(Complex64::new(1.0 / norm, 0.0))
                    } else {
                        op
                    }
                }
            };
            tasks.push(Task::new(op)?);
        }
        let c = tasks.iter().map(|t| t.pinv_norm_sqr).fold(0.0, f64::max);
        Ok(Self {
            tasks,
            rule,
            norm_policy,
            dim,
            c,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn rule(&self) -> &SelectionRule {
        &self.rule
    }

    pub fn norm_policy(&self) -> NormPolicy {
        self.norm_policy
    }

    /// Dimension of the unknown `w`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `C = sup_t ‖X_t†‖²`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn all_partial_isometries(&self) -> bool {
        self.tasks.iter().all(Task::is_partial_isometry)
    }

    /// Longest horizon the rule supports, `None` if unbounded.
    pub fn max_horizon(&self) -> Option<usize> {
        match &self.rule {
            SelectionRule::Cyclic => None,
            SelectionRule::Natural => Some(self.tasks.len()),
            SelectionRule::Explicit(order) => Some(order.len()),
        }
    }

    /// Task index `τ(t)` for `t ≥ 1`.
    pub fn index_at(&self, t: usize) -> Result<usize> {
        let limit = self.max_horizon().unwrap_or(usize::MAX);
        if t == 0 || t > limit {
            return Err(Error::IndexOutOfRange {
                context: "step of task sequence",
                index: t,
                limit,
            });
        }
        Ok(match &self.rule {
            SelectionRule::Cyclic => (t - 1) % self.tasks.len(),
            SelectionRule::Natural => t - 1,
            SelectionRule::Explicit(order) => order[t - 1],
        })
    }

    pub fn task_at(&self, t: usize) -> Result<&Task> {
        Ok(&self.tasks[self.index_at(t)?])
    }

    fn check_horizon(&self, k: usize) -> Result<()> {
        match self.max_horizon() {
            Some(limit) if k > limit => Err(Error::OrderTooLarge {
                context: "task sequence horizon",
                order: k,
                max: limit,
            }),
            _ => Ok(()),
        }
    }
}

/// Rank-one tasks `X_t f = ⟨e_t, f⟩_{L²(μ)}` for `t = 0, …, count − 1`, in the
/// isometric Euclidean coordinates of the embedding. Each is a partial
/// isometry because `‖e_t‖ = 1`.
pub fn exponential_tasks(emb: &L2muEmbedding, count: usize) -> Result<Vec<ComplexOperator>> {
    if count > emb.count() {
        return Err(Error::OrderTooLarge {
            context: "embedding column count",
            order: count,
            max: emb.count(),
        });
    }
    (0..count)
        .map(|n| Ok(ComplexOperator::row_functional(&emb.to_euclidean(emb.exponential(n)?)?)))
        .collect()
}

/// Draws one noise vector of the requested dimension with `E‖η‖² = σ²`.
pub trait NoiseSampler: Send + Sync + fmt::Debug {
    fn sample(&self, rng: &mut ChaCha8Rng, dim: usize, sigma2: f64) -> ComplexVector;
}

#[derive(Clone, Debug, Default)]
pub enum NoiseKind {
    #[default]
    None,
    /// Isotropic complex Gaussian, each real component with variance `σ²/(2d)`.
    Gaussian,
    /// Uniform on the sphere of radius `σ`.
    UniformSphere,
    Custom(Arc<dyn NoiseSampler>),
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::UniformSphere => "uniform_sphere",
            NoiseKind::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NoiseModel {
    kind: NoiseKind,
    sigma2: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, sigma2: f64, seed: u64) -> Result<Self> {
        if !sigma2.is_finite() {
            return Err(Error::NonFinite { what: "noise variance" });
        }
        if sigma2 < 0.0 {
            return Err(Error::NonPositive {
                name: "noise variance",
                value: sigma2,
            });
        }
        Ok(Self { kind, sigma2, seed })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(sigma2: f64, seed: u64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma2, seed)
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// No noise is ever added.
    pub fn is_silent(&self) -> bool {
        matches!(self.kind, NoiseKind::None) || self.sigma2 == 0.0
    }

    /// Independent stream for one trial.
    pub fn rng_for_trial(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng, dim: usize) -> ComplexVector {
        if self.is_silent() || dim == 0 {
            return ComplexVector::zeros(dim);
        }
        match &self.kind {
            NoiseKind::None => ComplexVector::zeros(dim),
            NoiseKind::Gaussian => {
                let sd = (self.sigma2 / (2.0 * dim as f64)).sqrt();
                gaussian_vector(rng, dim).scale(Complex64::new(sd, 0.0))
            }
            NoiseKind::UniformSphere => loop {
                let g = gaussian_vector(rng, dim);
                let n = g.norm();
                if n > 0.0 {
                    break g.scale(Complex64::new(self.sigma2.sqrt() / n, 0.0));
                }
            },
            NoiseKind::Custom(sampler) => sampler.sample(rng, dim, self.sigma2),
        }
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> ComplexVector {
    let entries = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    ComplexVector::new(entries).expect("normal samples are finite")
}

/// One relaxed block update `w + λ X†(y − X w)`, computing `X†` on the fly.
pub fn step(w_prev: &ComplexVector, x: &ComplexOperator, y: &ComplexVector, lambda: f64) -> Result<ComplexVector> {
    validate_lambda(lambda)?;
    let pinv = pseudoinverse(x, None)?;
    step_with_pinv(w_prev, x, &pinv, y, lambda)
}

/// As [`step`] with a precomputed pseudoinverse.
pub fn step_with_pinv(
    w_prev: &ComplexVector,
    x: &ComplexOperator,
    pinv: &ComplexOperator,
    y: &ComplexVector,
    lambda: f64,
) -> Result<ComplexVector> {
    validate_lambda(lambda)?;
    let residual = y.sub(&x.apply(w_prev)?)?;
    let mut w = w_prev.clone();
    w.axpy(Complex64::new(lambda, 0.0), &pinv.apply(&residual)?)?;
    Ok(w)
}

/// `‖w*‖²/(λ(2−λ)k)`.
pub fn noiseless_bound(norm_w2: f64, lambda: f64, k: usize) -> f64 {
    norm_w2 / (lambda * (2.0 - lambda) * k as f64)
}

/// `2‖w*‖²/(λ(2−λ)k) + (2λC(1 − 1/k)/(2−λ) + 1)σ²`.
pub fn noisy_bound(norm_w2: f64, lambda: f64, c: f64, sigma2: f64, k: usize) -> f64 {
    let kf = k as f64;
    2.0 * norm_w2 / (lambda * (2.0 - lambda) * kf)
        + (2.0 * lambda * c * (1.0 - 1.0 / kf) / (2.0 - lambda) + 1.0) * sigma2
}

/// Limit of the noise term as `k → ∞`: `(2λC/(2−λ) + 1)σ²`.
pub fn noise_floor(lambda: f64, c: f64, sigma2: f64) -> f64 {
    (2.0 * lambda * c / (2.0 - lambda) + 1.0) * sigma2
}

/// Per-step regrets and their running sums for a single run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretLedger {
    pub lambda: f64,
    pub norm_w2: f64,
    /// `‖X_t w_{t−1} − y_t‖²`, `t = 1..=k`.
    pub per_step: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// `‖X_t(w_{t−1} − w*)‖²`, the noise-free part of the residual.
    pub signal: Vec<f64>,
    /// Upper bound on the average regret after `t` steps.
    pub bound: Vec<f64>,
}

impl RegretLedger {
    pub fn len(&self) -> usize {
        self.per_step.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step.is_empty()
    }

    pub fn final_cumulative(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `cumulative_t / t`.
    pub fn averages(&self) -> Vec<f64> {
        self.cumulative
            .iter()
            .enumerate()
            .map(|(i, c)| c / (i + 1) as f64)
            .collect()
    }

    /// Steps (1-based) at which the average regret exceeds the bound by more than `slack`.
    pub fn bound_violations(&self, slack: f64) -> Vec<usize> {
        self.averages()
            .iter()
            .zip(&self.bound)
            .enumerate()
            .filter(|(_, (a, b))| **a > **b + slack)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Columns `t, regret_t, cumulative, average, bound_t`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let averages = self.averages();
        write_csv(
            out,
            &["t", "regret_t", "cumulative", "average", "bound_t"],
            (0..self.len()).map(|i| {
                vec![
                    (i + 1).to_string(),
                    fmt_f64(self.per_step[i]),
                    fmt_f64(self.cumulative[i]),
                    fmt_f64(averages[i]),
                    fmt_f64(self.bound[i]),
                ]
            }),
        )
    }
}

/// Checks made while iterating.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunDiagnostics {
    /// `max_t ‖ε_t − (I − λP_t)ε_{t−1}‖`; only meaningful without noise.
    pub max_recursion_defect: f64,
    /// `max_t (‖ε_t‖ − ‖ε_{t−1}‖)`; nonpositive up to rounding without noise.
    pub max_error_increase: f64,
    pub final_error_norm: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub ledger: RegretLedger,
    pub w_final: ComplexVector,
    pub diagnostics: RunDiagnostics,
}

/// `k` steps from `w_0 = 0` with `y_t = X_t w* + η_t`, using trial stream 0.
pub fn run(seq: &TaskSequence, w_star: &ComplexVector, lambda: f64, noise: &NoiseModel, k: usize) -> Result<RunResult> {
    run_trial(seq, w_star, lambda, noise, k, 0)
}

/// As [`run`] with the noise drawn from the given trial stream.
pub fn run_trial(
    seq: &TaskSequence,
    w_star: &ComplexVector,
    lambda: f64,
    noise: &NoiseModel,
    k: usize,
    trial: u64,
) -> Result<RunResult> {
    validate_lambda(lambda)?;
    if w_star.len() != seq.dim() {
        return Err(Error::DimensionMismatch {
            context: "w* versus task domain",
            expected: seq.dim(),
            found: w_star.len(),
        });
    }
    seq.check_horizon(k)?;

    let norm_w2 = w_star.norm_sqr();
    let limit = DIVERGENCE_FACTOR * w_star.norm().max(noise.sigma2().sqrt());
    let mut rng = noise.rng_for_trial(trial);
    let mut w = ComplexVector::zeros(seq.dim());
    let mut err_prev = w.sub(w_star)?;
    let mut diagnostics = RunDiagnostics::default();

    let mut per_step = Vec::with_capacity(k);
    let mut cumulative = Vec::with_capacity(k);
    let mut signal = Vec::with_capacity(k);
    let mut bound = Vec::with_capacity(k);
    let mut total = 0.0;
    let relax = Complex64::new(lambda, 0.0);

    for t in 1..=k {
        let task = seq.task_at(t)?;
        let clean = task.op.apply(w_star)?;
        let eta = noise.sample(&mut rng, clean.len());
        let y = clean.add(&eta)?;

        let predicted = task.op.apply(&w)?;
        let residual = predicted.sub(&y)?;
        let regret = residual.norm_sqr();
        signal.push(predicted.sub(&clean)?.norm_sqr());
        total += regret;
        per_step.push(regret);
        cumulative.push(total);
        bound.push(if noise.is_silent() {
            noiseless_bound(norm_w2, lambda, t)
        } else {
            noisy_bound(norm_w2, lambda, seq.c(), noise.sigma2(), t)
        });

        w.axpy(-relax, &task.pinv.apply(&residual)?)?;

        let err = w.sub(w_star)?;
        let mut expected = err_prev.clone();
        expected.axpy(-relax, &task.projector.apply(&err_prev)?)?;
        diagnostics.max_recursion_defect = diagnostics.max_recursion_defect.max(err.sub(&expected)?.norm());
        let (now, before) = (err.norm(), err_prev.norm());
        diagnostics.max_error_increase = diagnostics.max_error_increase.max(now - before);
        if !now.is_finite() || now > limit {
            return Err(Error::Divergence {
                step: t,
                error_norm: now,
                limit,
            });
        }
        err_prev = err;
    }
    diagnostics.final_error_norm = err_prev.norm();

    Ok(RunResult {
        ledger: RegretLedger {
            lambda,
            norm_w2,
            per_step,
            cumulative,
            signal,
            bound,
        },
        w_final: w,
        diagnostics,
    })
}

/// Monte-Carlo summary of many independent noisy runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyTrialsReport {
    pub lambda: f64,
    pub trials: usize,
    pub sigma2: f64,
    pub c: f64,
    pub norm_w2: f64,
    pub mean_regret: Vec<f64>,
    pub mean_signal: Vec<f64>,
    pub mean_average: Vec<f64>,
    /// Standard error of the mean average regret (zero for a single trial).
    pub stderr_average: Vec<f64>,
    pub bound: Vec<f64>,
}

impl NoisyTrialsReport {
    /// Steps (1-based) where `mean − z·stderr` exceeds the bound.
    pub fn bound_violations(&self, z: f64) -> Vec<usize> {
        (0..self.mean_average.len())
            .filter(|&i| self.mean_average[i] - z * self.stderr_average[i] > self.bound[i])
            .map(|i| i + 1)
            .collect()
    }

    /// `mean_t(E‖r_t‖² − E‖X_t ε_{t−1}‖²)` over all steps; estimates `σ²`.
    pub fn residual_excess(&self) -> f64 {
        let n = self.mean_regret.len().max(1) as f64;
        self.mean_regret
            .iter()
            .zip(&self.mean_signal)
            .map(|(r, s)| r - s)
            .sum::<f64>()
            / n
    }

    /// Columns `t, regret_t, cumulative, average, bound_t, average_stderr`, all means over trials.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut cumulative = 0.0;
        write_csv(
            out,
            &["t", "regret_t", "cumulative", "average", "bound_t", "average_stderr"],
            (0..self.mean_regret.len()).map(|i| {
                cumulative += self.mean_regret[i];
                vec![
                    (i + 1).to_string(),
                    fmt_f64(self.mean_regret[i]),
                    fmt_f64(cumulative),
                    fmt_f64(self.mean_average[i]),
                    fmt_f64(self.bound[i]),
                    fmt_f64(self.stderr_average[i]),
                ]
            }),
        )
    }
}

/// Trials run in parallel but are accumulated in trial order, so the report is
/// bit-identical across thread counts.
pub fn run_noisy_trials(
    seq: &TaskSequence,
    w_star: &ComplexVector,
    lambda: f64,
    noise: &NoiseModel,
    k: usize,
    trials: usize,
) -> Result<NoisyTrialsReport> {
    validate_lambda(lambda)?;
    if trials == 0 {
        return Err(Error::OrderTooSmall {
            context: "trial count",
            order: 0,
            min: 1,
        });
    }
    const CHUNK: usize = 64;
    let mut sum_regret = vec![0.0; k];
    let mut sum_signal = vec![0.0; k];
    let mut sum_avg = vec![0.0; k];
    let mut sum_avg2 = vec![0.0; k];
    let mut bound = Vec::new();

    for start in (0..trials).step_by(CHUNK) {
        let end = (start + CHUNK).min(trials);
        let ledgers = (start..end)
            .into_par_iter()
            .map(|trial| run_trial(seq, w_star, lambda, noise, k, trial as u64).map(|r| r.ledger))
            .collect::<Result<Vec<_>>>()?;
        for ledger in ledgers {
            for (i, a) in ledger.averages().into_iter().enumerate() {
                sum_regret[i] += ledger.per_step[i];
                sum_signal[i] += ledger.signal[i];
                sum_avg[i] += a;
                sum_avg2[i] += a * a;
            }
            if bound.is_empty() {
                bound = ledger.bound;
            }
        }
    }

    let n = trials as f64;
    let mean_average: Vec<f64> = sum_avg.iter().map(|s| s / n).collect();
    let stderr_average = sum_avg2
        .iter()
        .zip(&mean_average)
        .map(|(s2, m)| {
            if trials < 2 {
                0.0
            } else {
                let var = ((s2 - n * m * m) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            }
        })
        .collect();

    Ok(NoisyTrialsReport {
        lambda,
        trials,
        sigma2: noise.sigma2(),
        c: seq.c(),
        norm_w2: w_star.norm_sqr(),
        mean_regret: sum_regret.iter().map(|s| s / n).collect(),
        mean_signal: sum_signal.iter().map(|s| s / n).collect(),
        mean_average,
        stderr_average,
        bound,
    })
}

/// `β = Cσ²k / (2‖w*‖²)`.
pub fn advisor_beta(norm_w2: f64, c: f64, sigma2: f64, k: usize) -> Result<f64> {
    for (name, value) in [("‖w*‖²", norm_w2), ("C", c), ("σ²", sigma2), ("k", k as f64)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { what: "advisor input" });
        }
        if value <= 0.0 {
            return Err(Error::NonPositive { name, value });
        }
    }
    Ok(c * sigma2 * k as f64 / (2.0 * norm_w2))
}

/// `λ* = (√(1+8β) − 1)/(4β)`, evaluated as `2/(1 + √(1+8β))` to avoid cancellation.
pub fn lambda_star(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::NonPositive { name: "β", value: beta });
    }
    Ok(2.0 / (1.0 + (1.0 + 8.0 * beta).sqrt()))
}

/// Step size minimizing the noisy surrogate bound.
pub fn recommend_lambda(norm_w2: f64, c: f64, sigma2: f64, k: usize) -> Result<f64> {
    lambda_star(advisor_beta(norm_w2, c, sigma2, k)?)
}

/// `f(λ) = a/(λ(2−λ)) + 2bλ/(2−λ)` with `a = 2‖w*‖²/k`, `b = Cσ²`.
pub fn surrogate(lambda: f64, a: f64, b: f64) -> f64 {
    a / (lambda * (2.0 - lambda)) + 2.0 * b * lambda / (2.0 - lambda)
}

/// Minimizer of [`surrogate`] over the grid `lo, lo + h, …, ≤ hi`.
pub fn grid_minimize_surrogate(a: f64, b: f64, lo: f64, hi: f64, h: f64) -> (f64, f64) {
    let n = ((hi - lo) / h + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| lo + i as f64 * h)
        .map(|l| (l, surrogate(l, a, b)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}
