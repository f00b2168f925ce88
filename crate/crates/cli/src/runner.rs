//! Dispatch of one config to the core library and artifact output.
//!
//! Every artifact is computed in memory first; files are written only once
//! all cells succeeded, and the manifest goes last.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kaczmarz_core::coeffs::{alpha_recursive, aux_vectors, convolution_coeffs, effectiveness_sum};
use kaczmarz_core::expansion::{expand, standard_fourier_coeffs, DEFAULT_RESIDUAL_THRESHOLD, DEFAULT_TERMS};
use kaczmarz_core::hardy::{
    coefficient_sum_vs_boundary, disk_grid, inner_function, interior_radii, nodes_for_order, write_grid_csv,
    DEFAULT_RADII,
};
use kaczmarz_core::kaczmarz::{
    exponential_tasks, grid_minimize_surrogate, lambda_star, noise_floor, run, run_noisy_trials, surrogate,
    NoiseKind, NormPolicy, SelectionRule,
};
use kaczmarz_core::report::{fmt_f64, write_csv};
use kaczmarz_core::verifier::{
    build_chain, orthogonal_block_sequence, random_projection_sequence, verify_chain, MAX_DIM, TELESCOPING_TOL,
};
use kaczmarz_core::{
    Check, Complex64, ComplexVector, L2muEmbedding, NoiseModel, SpectralMeasure, TaskSequence, MobiusData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{derive_seed, ExperimentConfig, ExperimentKind, NoiseSpec, SeedTag};
use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

const DEFAULT_TRIALS: usize = 200;
const DEFAULT_ORDER: usize = 512;
const DEFAULT_DIM: usize = 8;
const DEFAULT_STEPS: usize = 20;
const DEFAULT_SEQUENCES: usize = 10;
const DEFAULT_GRID_RADII: usize = 10;
const DEFAULT_GRID_ANGLES: usize = 360;
const GRID_R_MAX: f64 = 0.99;
/// Series order used for the disk grid when no closed form exists, so the
/// tail `r^N` at the outermost radius is negligible.
const GRID_TAIL: f64 = 1e-13;
const ADVISOR_GRID_STEP: f64 = 1e-5;

/// In-memory file awaiting output.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn csv(name: String, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Self> {
        let mut bytes = Vec::new();
        write(&mut bytes).map_err(|source| CliError::Io {
            path: PathBuf::from(&name),
            source,
        })?;
        Ok(Self { name, bytes })
    }

    fn json(name: String, value: &impl Serialize) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self { name, bytes })
    }
}

/// One `(experiment, λ)` result.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl Cell {
    fn new(lambda: Option<f64>) -> Self {
        Self {
            lambda,
            checks: Vec::new(),
            metrics: Map::new(),
            artifacts: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Adds the per-cell JSON summary beside the CSV artifacts.
    fn finish(mut self, kind: ExperimentKind) -> Result<Self> {
        let stem = match self.lambda {
            Some(l) => format!("{kind}_lambda_{l}"),
            None => kind.name().to_string(),
        };
        let summary = json!({
            "kind": kind.name(),
            "lambda": self.lambda,
            "metrics": self.metrics,
            "checks": self.checks,
            "passed": self.passed(),
        });
        self.artifacts.push(Artifact::json(format!("{stem}.json"), &summary)?);
        Ok(self)
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    pub output_dir: PathBuf,
    pub artifacts: Vec<String>,
    pub cells: Vec<Cell>,
    pub all_passed: bool,
}

/// Overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

pub fn run_config(path: &Path, overrides: &Overrides) -> Result<RunSummary> {
    let (mut config, bytes) = ExperimentConfig::load(path)?;
    if let Some(seed) = overrides.seed {
        config.seed = Some(seed);
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = Some(dir.clone());
    }
    config.validate()?;
    let cells = compute(&config)?;
    let output_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let manifest = manifest(&config, &bytes, &cells)?;
    let artifacts = write_all(&output_dir, &cells, &manifest)?;
    Ok(RunSummary {
        kind: config.kind,
        output_dir,
        artifacts,
        all_passed: cells.iter().all(Cell::passed),
        cells,
    })
}

/// All cells of a validated config, in `lambdas` order.
pub fn compute(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let measure = config.measure.as_ref().map(|m| m.build(config.seed)).transpose()?;
    if config.kind == ExperimentKind::LambdaAdvisor {
        return Ok(vec![lambda_advisor(config)?.finish(config.kind)?]);
    }
    config
        .lambdas
        .par_iter()
        .enumerate()
        .map(|(index, &lambda)| {
            let cell = match config.kind {
                ExperimentKind::RegretRun => regret_run(config, measure_ref(&measure), lambda),
                ExperimentKind::NoisySweep => noisy_sweep(config, measure_ref(&measure), lambda),
                ExperimentKind::IdentitySuite => identity_suite(config, lambda, index as u64),
                ExperimentKind::EffectivenessReport => effectiveness_report(config, measure_ref(&measure), lambda),
                ExperimentKind::ExpansionReport => expansion_report(config, measure_ref(&measure), lambda),
                ExperimentKind::HardyReport => hardy_report(config, measure_ref(&measure), lambda),
                ExperimentKind::LambdaAdvisor => unreachable!(),
            }?;
            cell.finish(config.kind)
        })
        .collect()
}

fn measure_ref(measure: &Option<SpectralMeasure>) -> &SpectralMeasure {
    measure.as_ref().expect("validated config carries a measure")
}

fn embedding(mu: &SpectralMeasure, count: usize) -> Result<L2muEmbedding> {
    let atomic = mu.as_atomic().ok_or(kaczmarz_core::Error::NotAtomic)?;
    Ok(L2muEmbedding::new(atomic.clone(), count)?)
}

/// Uniform entries in the unit square, or the configured values.
fn vector_or_random(given: Option<&[[f64; 2]]>, dim: usize, seed: Option<u64>, tag: SeedTag, what: &str) -> Result<ComplexVector> {
    match given {
        Some(v) if v.len() != dim => Err(CliError::Invalid(format!(
            "`{what}` has {} entries but the measure has {dim} atoms",
            v.len()
        ))),
        Some(v) => ExperimentConfig::complex_list(v),
        None => {
            let seed = seed.ok_or_else(|| CliError::Invalid(format!("random `{what}` requires a seed")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag));
            Ok(ComplexVector::new(
                (0..dim)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )?)
        }
    }
}

fn noise_model(config: &ExperimentConfig) -> Result<NoiseModel> {
    if config.sigma2 == 0.0 {
        return Ok(NoiseModel::none());
    }
    let kind = match config.noise {
        NoiseSpec::Gaussian => NoiseKind::Gaussian,
        NoiseSpec::UniformSphere => NoiseKind::UniformSphere,
    };
    let seed = config.seed.expect("validated config has a seed when noisy");
    Ok(NoiseModel::new(kind, config.sigma2, derive_seed(seed, SeedTag::Noise))?)
}

fn exponential_setup(config: &ExperimentConfig, mu: &SpectralMeasure) -> Result<(TaskSequence, ComplexVector)> {
    let k = config.horizon();
    let emb = embedding(mu, k)?;
    let seq = TaskSequence::new(exponential_tasks(&emb, k)?, SelectionRule::Natural, NormPolicy::Assert)?;
    let w = vector_or_random(config.w_star.as_deref(), emb.dim(), config.seed, SeedTag::WStar, "w_star")?;
    Ok((seq, w))
}

fn regret_run(config: &ExperimentConfig, mu: &SpectralMeasure, lambda: f64) -> Result<Cell> {
    let k = config.horizon();
    let (seq, w) = exponential_setup(config, mu)?;
    let noise = noise_model(config)?;
    let result = run(&seq, &w, lambda, &noise, k)?;
    let ledger = &result.ledger;
    let norm_w2 = w.norm_sqr();
    let target = norm_w2 / (lambda * (2.0 - lambda));
    let final_cumulative = ledger.final_cumulative();

    let mut cell = Cell::new(Some(lambda));
    cell.metric("k", k);
    cell.metric("atoms", seq.dim());
    cell.metric("sigma2", config.sigma2);
    cell.metric("norm_w2", norm_w2);
    cell.metric("final_cumulative", final_cumulative);
    cell.metric("cumulative_target", target);
    cell.metric("final_average", final_cumulative / k as f64);
    cell.metric("final_bound", ledger.bound.last().copied().unwrap_or(f64::NAN));
    cell.metric("final_error_norm", result.diagnostics.final_error_norm);
    if noise.is_silent() {
        let slack = 1e-12 * target.max(1.0);
        cell.checks.push(Check::holds("average_within_bound", ledger.bound_violations(slack).is_empty()));
        cell.checks.push(Check::holds(
            "cumulative_monotone_below_target",
            ledger.cumulative.windows(2).all(|p| p[1] >= p[0]) && final_cumulative <= target + slack,
        ));
        cell.checks.push(Check::at_most(
            "cumulative_relative_gap",
            (target - final_cumulative).abs() / target,
            config.threshold.unwrap_or(1e-3),
        ));
        cell.checks.push(Check::at_most(
            "error_norm_increase",
            result.diagnostics.max_error_increase.max(0.0),
            1e-12 * norm_w2.sqrt().max(1.0),
        ));
    }
    cell.artifacts.push(Artifact::csv(format!("regret_run_lambda_{lambda}.csv"), |b| ledger.write_csv(b))?);
    Ok(cell)
}

fn noisy_sweep(config: &ExperimentConfig, mu: &SpectralMeasure, lambda: f64) -> Result<Cell> {
    let k = config.horizon();
    let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
    let (seq, w) = exponential_setup(config, mu)?;
    let noise = noise_model(config)?;
    let report = run_noisy_trials(&seq, &w, lambda, &noise, k, trials)?;

    let mut cell = Cell::new(Some(lambda));
    cell.metric("k", k);
    cell.metric("trials", trials);
    cell.metric("noise", noise.kind().name());
    cell.metric("sigma2", config.sigma2);
    cell.metric("c", seq.c());
    cell.metric("norm_w2", report.norm_w2);
    cell.metric("final_mean_average", report.mean_average.last().copied().unwrap_or(f64::NAN));
    cell.metric("final_stderr", report.stderr_average.last().copied().unwrap_or(f64::NAN));
    cell.metric("final_bound", report.bound.last().copied().unwrap_or(f64::NAN));
    cell.metric("noise_floor", noise_floor(lambda, seq.c(), config.sigma2));
    cell.metric("residual_excess", report.residual_excess());
    let violations = report.bound_violations(2.0);
    cell.metric("bound_violations", violations.len());
    cell.checks.push(Check::holds("mean_average_within_bound_2se", violations.is_empty()));
    cell.artifacts.push(Artifact::csv(format!("noisy_sweep_lambda_{lambda}.csv"), |b| report.write_csv(b))?);
    Ok(cell)
}

fn identity_suite(config: &ExperimentConfig, lambda: f64, index: u64) -> Result<Cell> {
    let dim = config.dim.unwrap_or(DEFAULT_DIM);
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(CliError::Invalid(format!("dim must lie in 2..={MAX_DIM}, got {dim}")));
    }
    let steps = config.steps.unwrap_or(DEFAULT_STEPS);
    let sequences = config.trials.unwrap_or(DEFAULT_SEQUENCES);
    let tol = config.threshold.unwrap_or(TELESCOPING_TOL);
    let seed = config.seed.expect("validated identity suite has a seed");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedTag::Projections));
    rng.set_stream(index);

    let mut cell = Cell::new(Some(lambda));
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for s in 0..sequences {
        let chain = build_chain(&random_projection_sequence(&mut rng, dim, steps, lambda)?, steps)?;
        let vectors: Vec<ComplexVector> = (0..3)
            .map(|_| {
                ComplexVector::new(
                    (0..dim)
                        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .collect(),
                )
            })
            .collect::<kaczmarz_core::Result<_>>()?;
        for check in verify_chain(&chain, &vectors, tol)?.checks {
            if check.threshold > 0.0 {
                worst = worst.max(check.residual);
            }
            rows.push((s, check));
        }
    }

    // Orthogonal block: T̃_n e_0 = (1 − λ)e_0 for every n.
    let block = build_chain(&orthogonal_block_sequence(dim, steps, lambda)?, steps)?;
    let e0 = ComplexVector::basis(dim, 0);
    let stall = (1..=steps)
        .map(|n| Ok((block.t(n).apply(&e0)?.norm() - (1.0 - lambda).abs()).abs()))
        .collect::<kaczmarz_core::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push((sequences, Check::at_most("orthogonal_block_stall", stall, tol)));

    cell.metric("dim", dim);
    cell.metric("steps", steps);
    cell.metric("sequences", sequences);
    cell.metric("max_residual", worst);
    cell.checks = rows.iter().map(|(_, c)| c.clone()).filter(|c| !c.passed).collect();
    cell.checks.insert(
        0,
        Check::holds("all_identities", rows.iter().all(|(_, c)| c.passed)),
    );
    cell.artifacts.push(Artifact::csv(format!("identity_suite_lambda_{lambda}.csv"), |b| {
        write_csv(
            b,
            &["sequence", "check", "residual", "threshold", "passed"],
            rows.iter().map(|(s, c)| {
                vec![
                    s.to_string(),
                    c.name.clone(),
                    fmt_f64(c.residual),
                    fmt_f64(c.threshold),
                    c.passed.to_string(),
                ]
            }),
        )
    })?);
    Ok(cell)
}

fn effectiveness_report(config: &ExperimentConfig, mu: &SpectralMeasure, lambda: f64) -> Result<Cell> {
    let order = config.order.unwrap_or(DEFAULT_ORDER);
    let table = alpha_recursive(mu, lambda, order)?;
    let report = effectiveness_sum(&table)?;
    let running = table.running_sums();

    let mut cell = Cell::new(Some(lambda));
    cell.metric("measure", mu.kind());
    cell.metric("order", order);
    cell.metric("sum", report.sum);
    cell.metric("target", report.target);
    cell.metric("gap", report.gap);
    cell.checks.push(Check::holds(
        "partial_sums_below_target",
        running.iter().all(|&s| s <= report.target * (1.0 + 1e-12) + 1e-15),
    ));
    cell.checks.push(Check::at_most("effectiveness_gap", report.gap, config.threshold.unwrap_or(1e-4)));
    cell.artifacts.push(Artifact::csv(format!("effectiveness_report_lambda_{lambda}.csv"), |b| table.write_csv(b))?);
    Ok(cell)
}

fn expansion_report(config: &ExperimentConfig, mu: &SpectralMeasure, lambda: f64) -> Result<Cell> {
    let n = config.order.unwrap_or(DEFAULT_TERMS);
    let emb = embedding(mu, n)?;
    let table = alpha_recursive(mu, lambda, n)?;
    let aux = aux_vectors(&emb, &table)?;
    let f = vector_or_random(config.f.as_deref(), emb.dim(), config.seed, SeedTag::Function, "f")?;
    let report = expand(&emb, &aux, &f, n)?;
    let conv = convolution_coeffs(&table, &standard_fourier_coeffs(&emb, &f, n)?);
    let route_gap = report
        .coefficients
        .iter()
        .zip(&conv)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = report.f_norm.max(1.0);

    let mut cell = Cell::new(Some(lambda));
    cell.metric("terms", n);
    cell.metric("f_norm", report.f_norm);
    cell.metric("final_residual", report.final_residual());
    cell.metric("parseval_target", report.parseval_target);
    cell.metric("final_parseval_gap", report.final_parseval_gap());
    cell.checks.push(Check::at_most(
        "final_residual",
        report.final_residual(),
        config.threshold.unwrap_or(DEFAULT_RESIDUAL_THRESHOLD) * scale,
    ));
    cell.checks.push(Check::holds("residuals_nonincreasing", report.residuals_nonincreasing(1e-12 * scale)));
    cell.checks.push(Check::holds("parseval_monotone_bounded", report.parseval_monotone_bounded(1e-9 * scale * scale)));
    cell.checks.push(Check::at_most("convolution_route_gap", route_gap, 1e-9 * scale));
    cell.artifacts.push(Artifact::csv(format!("expansion_report_lambda_{lambda}.csv"), |b| report.write_csv(b))?);
    Ok(cell)
}

fn hardy_report(config: &ExperimentConfig, mu: &SpectralMeasure, lambda: f64) -> Result<Cell> {
    let order = config.order.unwrap_or(DEFAULT_ORDER);
    let radii = config.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
    let boundary = coefficient_sum_vs_boundary(mu, lambda, order, &radii, nodes_for_order(order))?;
    let mobius = MobiusData::new(lambda)?;

    let grid_radii = interior_radii(config.grid_radii.unwrap_or(DEFAULT_GRID_RADII), GRID_R_MAX);
    let angles = config.grid_angles.unwrap_or(DEFAULT_GRID_ANGLES);
    let grid_order = if mu.as_atomic().is_some() {
        order
    } else {
        order.max((GRID_TAIL.ln() / GRID_R_MAX.ln()).ceil() as usize)
    };
    let phi = inner_function(mu, lambda, grid_order)?;
    let grid = disk_grid(&phi, &grid_radii, angles);
    let max_modulus = grid.iter().map(|p| p.value.norm()).fold(0.0, f64::max);

    let mut cell = Cell::new(Some(lambda));
    cell.metric("measure", mu.kind());
    cell.metric("order", order);
    cell.metric("nodes", boundary.nodes);
    cell.metric("coefficient_sum", boundary.coefficient_sum);
    cell.metric("target", boundary.target);
    cell.metric("sum_gap", boundary.sum_gap);
    cell.metric("extrapolated", boundary.extrapolated);
    cell.metric("extrapolated_gap", boundary.extrapolated_gap);
    cell.metric("mobius_center", json!([mobius.c.re, mobius.c.im]));
    cell.metric("mobius_radius", mobius.r);
    cell.metric("phi_grid_order", grid_order);
    cell.metric("phi_max_modulus", max_modulus);
    for row in &boundary.rows {
        cell.checks.push(Check::at_most(format!("finite_parseval[r={}]", row.r), row.parseval_gap, 1e-8));
    }
    cell.checks.push(Check::at_most("mobius_identity", mobius.identity_defect(), 1e-12));
    cell.checks.push(Check::at_most("phi_modulus_excess", (max_modulus - 1.0).max(0.0), 1e-9));
    if mu.as_atomic().is_some() {
        if let Some(gap) = boundary.extrapolated_gap {
            cell.checks.push(Check::at_most("boundary_limit_vs_target", gap, config.threshold.unwrap_or(1e-3)));
        }
    }
    cell.artifacts.push(Artifact::csv(format!("hardy_report_lambda_{lambda}.csv"), |b| {
        write_csv(
            b,
            &["r", "quadrature", "weighted_sum", "parseval_gap", "target", "target_gap"],
            boundary.rows.iter().map(|row| {
                vec![
                    fmt_f64(row.r),
                    fmt_f64(row.quadrature),
                    fmt_f64(row.weighted_sum),
                    fmt_f64(row.parseval_gap),
                    fmt_f64(boundary.target),
                    fmt_f64(row.target_gap),
                ]
            }),
        )
    })?);
    cell.artifacts.push(Artifact::csv(format!("hardy_report_lambda_{lambda}_phi_grid.csv"), |b| {
        write_grid_csv(b, &grid)
    })?);
    Ok(cell)
}

fn lambda_advisor(config: &ExperimentConfig) -> Result<Cell> {
    let (a, b, beta) = config.advisor_inputs()?;
    let star = lambda_star(beta)?;
    let at_star = surrogate(star, a, b);
    let (grid_lambda, grid_value) = grid_minimize_surrogate(a, b, ADVISOR_GRID_STEP, 2.0 - ADVISOR_GRID_STEP, ADVISOR_GRID_STEP);

    let mut cell = Cell::new(None);
    cell.metric("beta", beta);
    cell.metric("a", a);
    cell.metric("b", b);
    cell.metric("lambda_star", star);
    cell.metric("surrogate_at_lambda_star", at_star);
    cell.metric("grid_lambda", grid_lambda);
    cell.metric("grid_surrogate", grid_value);
    cell.checks.push(Check::at_most(
        "surrogate_relative_gap",
        (at_star - grid_value).max(0.0) / grid_value.abs().max(f64::MIN_POSITIVE),
        1e-6,
    ));
    cell.checks.push(Check::at_most("grid_distance", (star - grid_lambda).abs(), 1e-4));
    Ok(cell)
}

fn manifest(config: &ExperimentConfig, config_bytes: &[u8], cells: &[Cell]) -> Result<Value> {
    let digest = Sha256::digest(config_bytes);
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let artifacts: Vec<&str> = cells
        .iter()
        .flat_map(|c| c.artifacts.iter().map(|a| a.name.as_str()))
        .collect();
    Ok(json!({
        "kind": config.kind.name(),
        "config_sha256": hash,
        "core_version": kaczmarz_core::VERSION,
        "cli_version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "created_unix": created,
        "artifacts": artifacts,
        "cells": cells,
        "all_passed": cells.iter().all(Cell::passed),
    }))
}

/// Writes every artifact, then the manifest. On failure, files already
/// written by this call are removed.
fn write_all(dir: &Path, cells: &[Cell], manifest: &Value) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut manifest_bytes = serde_json::to_vec_pretty(manifest)?;
    manifest_bytes.push(b'\n');
    let files = cells
        .iter()
        .flat_map(|c| c.artifacts.iter().map(|a| (a.name.as_str(), a.bytes.as_slice())))
        .chain(std::iter::once((MANIFEST_NAME, manifest_bytes.as_slice())));

    let mut written: Vec<PathBuf> = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(source) = fs::write(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::Io { path, source });
        }
        written.push(path);
    }
    Ok(written
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect())
}
