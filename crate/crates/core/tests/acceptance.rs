//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kaczmarz_core::coeffs::{
    alpha_combinatorial, alpha_recursive, aux_vectors, effectiveness_sum, verify_partial_sum_identities,
};
use kaczmarz_core::expansion::expand;
use kaczmarz_core::hardy::{coefficient_sum_vs_boundary, disk_grid, inner_function, interior_radii, max_modulus_deficit, DEFAULT_RADII};
use kaczmarz_core::kaczmarz::{
    exponential_tasks, grid_minimize_surrogate, lambda_star, run, run_noisy_trials, surrogate, NoiseModel, NormPolicy,
    SelectionRule, TaskSequence,
};
use kaczmarz_core::verifier::{
    build_chain, certify_effective, orthogonal_block_sequence, product_identity_residual, random_projection_sequence,
    sharp_regret_check, DEFAULT_EFFECTIVENESS_EPS,
};
use kaczmarz_core::{AtomicMeasure, Complex64, ComplexVector, L2muEmbedding, Result, SpectralMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn random_measure(seed: u64, atoms: usize) -> AtomicMeasure {
    AtomicMeasure::random_stratified(atoms, &mut ChaCha8Rng::seed_from_u64(seed)).expect("valid measure")
}

fn random_vector(rng: &mut impl Rng, n: usize) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .expect("finite")
}

fn exponential_sequence(mu: AtomicMeasure, k: usize) -> Result<TaskSequence> {
    let emb = L2muEmbedding::new(mu, k)?;
    TaskSequence::new(exponential_tasks(&emb, k)?, SelectionRule::Natural, NormPolicy::Assert)
}

fn product_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let lambdas = [0.3, 1.0, 1.7];
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let dim = rng.random_range(2..=20);
        let n = rng.random_range(1..=50);
        let lambda = lambdas[case % 3];
        let chain = build_chain(&random_projection_sequence(&mut rng, dim, n, lambda)?, n)?;
        for j in 0..=n {
            worst = worst.max(product_identity_residual(&chain, j)?);
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max residual {worst:.2e} over 50 sequences (≤ 1e-9)")))
}

fn sharp_regret() -> Result<Outcome> {
    let k = 10_000;
    let seq = exponential_sequence(random_measure(202, 5), k)?;
    let w_star = random_vector(&mut ChaCha8Rng::seed_from_u64(203), 5);
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 1.5] {
        let r = sharp_regret_check(&seq, &w_star, lambda, k)?;
        ok &= r.relative_gap <= 1e-3 && r.gap_nonincreasing && r.gap_nonnegative;
        parts.push(format!("λ={lambda}: rel gap {:.1e}", r.relative_gap));
    }
    Ok(outcome(ok, format!("{} (≤ 1e-3, monotone)", parts.join(", "))))
}

fn average_regret_bound() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();

    let k = 10_000;
    let seq = exponential_sequence(random_measure(202, 5), k)?;
    let w_star = random_vector(&mut ChaCha8Rng::seed_from_u64(203), 5);
    for lambda in [0.5, 1.0, 1.5] {
        let r = run(&seq, &w_star, lambda, &NoiseModel::none(), k)?;
        let slack = 1e-12 * w_star.norm_sqr();
        let violations = r.ledger.bound_violations(slack).len();
        ok &= violations == 0;
        parts.push(format!("noiseless λ={lambda}: {violations} violations"));
    }

    let k = 2_000;
    let trials = 200;
    let seq = exponential_sequence(random_measure(303, 5), k)?;
    let w_star = random_vector(&mut ChaCha8Rng::seed_from_u64(304), 5);
    let noise = NoiseModel::gaussian(0.05, 305)?;
    for lambda in [0.5, 1.0, 1.5] {
        let r = run_noisy_trials(&seq, &w_star, lambda, &noise, k, trials)?;
        let violations = r.bound_violations(2.0).len();
        ok &= violations == 0;
        parts.push(format!("noisy λ={lambda}: {violations} violations"));
    }
    Ok(outcome(ok, format!("{}; {trials} trials, 2 s.e.", parts.join(", "))))
}

fn alpha_equivalence() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let atoms = rng.random_range(2..=8);
        let mu: SpectralMeasure = AtomicMeasure::random_stratified(atoms, &mut rng)?.into();
        let lambda = rng.random_range(0.05..1.95);
        let a = alpha_recursive(&mu, lambda, 13)?;
        let b = alpha_combinatorial(&mu, lambda, 13)?;
        worst = worst.max(a.max_deviation(&b));
    }
    Ok(outcome(worst <= 1e-10, format!("max |Δα_n| {worst:.2e} for n ≤ 12 over 20 pairs (≤ 1e-10)")))
}

const LAMBDAS: [f64; 5] = [0.3, 0.8, 1.0, 1.5, 1.9];

fn effectiveness() -> Result<Outcome> {
    let half: SpectralMeasure = AtomicMeasure::half_half().into();
    let mut closed: f64 = 0.0;
    for lambda in LAMBDAS {
        closed = closed.max(effectiveness_sum(&alpha_recursive(&half, lambda, 512)?)?.gap.abs());
    }
    let mut random: f64 = 0.0;
    for seed in [505, 506, 507] {
        let mu: SpectralMeasure = random_measure(seed, 5).into();
        for lambda in LAMBDAS {
            random = random.max(effectiveness_sum(&alpha_recursive(&mu, lambda, 2048)?)?.gap.abs());
        }
    }
    Ok(outcome(
        closed <= 1e-10 && random <= 1e-4,
        format!("two-point gap {closed:.1e} (≤ 1e-10), random 5-atom gap {random:.1e} at N=2048 (≤ 1e-4)"),
    ))
}

fn boundary_bridge() -> Result<Outcome> {
    let measures: Vec<SpectralMeasure> = vec![AtomicMeasure::half_half().into(), random_measure(606, 5).into()];
    let mut parseval: f64 = 0.0;
    let mut raw: f64 = 0.0;
    let mut limit: f64 = 0.0;
    let mut monotone = true;
    for mu in &measures {
        for lambda in [0.3, 0.8, 1.0] {
            let r = coefficient_sum_vs_boundary(mu, lambda, 512, &DEFAULT_RADII, 2048)?;
            let outer = r.rows.last().expect("three radii");
            parseval = parseval.max(outer.parseval_gap);
            raw = raw.max(outer.target_gap);
            limit = limit.max(r.extrapolated_gap.expect("three radii"));
            monotone &= r.rows.windows(2).all(|w| w[1].target_gap < w[0].target_gap);
        }
    }
    Ok(outcome(
        parseval <= 1e-8 && limit <= 1e-3 && monotone,
        format!(
            "finite Parseval {parseval:.1e} (≤ 1e-8); radial limit gap {limit:.1e} (≤ 1e-3); raw r=0.999 gap {raw:.1e}, shrinking in r"
        ),
    ))
}

fn inner_function_modulus() -> Result<Outcome> {
    let measures: Vec<SpectralMeasure> = vec![AtomicMeasure::half_half().into(), random_measure(707, 5).into()];
    let radii = interior_radii(100, 0.999);
    let mut excess = f64::NEG_INFINITY;
    let mut monotone = true;
    for mu in &measures {
        for lambda in [0.3, 1.0, 1.5] {
            let phi = inner_function(mu, lambda, 64)?;
            for p in disk_grid(&phi, &radii, 360) {
                excess = excess.max(p.value.norm() - 1.0);
            }
            let deficits: Vec<f64> = DEFAULT_RADII.iter().map(|&r| max_modulus_deficit(&phi, r, 360)).collect();
            monotone &= deficits.windows(2).all(|w| w[1] < w[0]);
        }
    }
    Ok(outcome(
        excess <= 1e-9 && monotone,
        format!("max |φ| − 1 = {excess:.1e} on 100×360 grid (≤ 1e-9); boundary deficit decreasing: {monotone}"),
    ))
}

fn expansion_convergence() -> Result<Outcome> {
    let emb = L2muEmbedding::new(random_measure(808, 5), 400)?;
    let mu: SpectralMeasure = emb.measure().clone().into();
    let aux = aux_vectors(&emb, &alpha_recursive(&mu, 1.3, 400)?)?;
    let f = random_vector(&mut ChaCha8Rng::seed_from_u64(809), 5);
    let r = expand(&emb, &aux, &f, 400)?;
    let (res, gap) = (r.final_residual(), r.final_parseval_gap());
    Ok(outcome(
        res <= 1e-6 && gap <= 1e-6,
        format!("residual {res:.1e}, Parseval gap {gap:.1e} at N=400 (both ≤ 1e-6)"),
    ))
}

fn partial_sum_identities() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for seed in [909, 910, 911] {
        let emb = L2muEmbedding::new(random_measure(seed, 5), 11)?;
        let mu: SpectralMeasure = emb.measure().clone().into();
        for lambda in [0.5, 1.3] {
            let table = alpha_recursive(&mu, lambda, 11)?;
            for i in 0..=3 {
                for n in i..=10 {
                    worst = worst.max(verify_partial_sum_identities(&emb, &table, i, n)?);
                }
            }
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max residual {worst:.1e} for i ≤ 3, n ≤ 10 (≤ 1e-9)")))
}

fn step_size_advisor() -> Result<Outcome> {
    let mut ok = lambda_star(1.0)? == 0.5;
    let mut parts = Vec::new();
    for beta in [0.01, 1.0, 100.0] {
        // a = 1, b = β gives the surrogate for that β.
        let star = lambda_star(beta)?;
        let (grid_l, grid_f) = grid_minimize_surrogate(1.0, beta, 0.001, 1.999, 1e-4);
        let f_star = surrogate(star, 1.0, beta);
        let rel = (grid_f - f_star) / grid_f;
        ok &= rel.abs() <= 1e-6 && f_star <= grid_f * (1.0 + 1e-15) && (star - grid_l).abs() <= 1e-4;
        parts.push(format!("β={beta}: λ*={star:.6}, rel surrogate gap {rel:.1e}"));
    }
    Ok(outcome(ok, format!("{}; β=1 gives exactly 0.5", parts.join(", "))))
}

fn counterexample() -> Result<Outcome> {
    let chain = build_chain(&orthogonal_block_sequence(4, 40, 0.5)?, 40)?;
    let x = ComplexVector::basis(4, 0).scale(Complex64::new(1.5, -2.0));
    let mut worst: f64 = 0.0;
    for n in 1..=40 {
        worst = worst.max((chain.t(n).apply(&x)?.norm() - 0.5 * x.norm()).abs());
    }
    let relaxed_effective = certify_effective(&chain, DEFAULT_EFFECTIVENESS_EPS)?;
    let plain = build_chain(&orthogonal_block_sequence(4, 40, 1.0)?, 40)?;
    let plain_effective = certify_effective(&plain, DEFAULT_EFFECTIVENESS_EPS)?;
    Ok(outcome(
        worst <= 1e-12 && !relaxed_effective && plain_effective,
        format!("max |‖T̃_n x‖ − 0.5‖x‖| = {worst:.1e} (≤ 1e-12); effective at λ=1: {plain_effective}, at λ=0.5: {relaxed_effective}"),
    ))
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("product identity I − T̃*T̃ = ((2−λ)/λ)ΣQ̃*Q̃", Duration::from_secs(10), product_identity),
        ("sharp noiseless cumulative regret", Duration::from_secs(30), sharp_regret),
        ("average regret below bound at every k", Duration::from_secs(120), average_regret_bound),
        ("recursive vs composition α_n", Duration::from_secs(5), alpha_equivalence),
        ("effectiveness sum Σ|α_n|² = λ³/(2−λ)", Duration::from_secs(20), effectiveness),
        ("coefficient sum vs boundary quadrature", Duration::from_secs(10), boundary_bridge),
        ("inner function modulus", Duration::from_secs(10), inner_function_modulus),
        ("Kaczmarz–Fourier expansion convergence", Duration::from_secs(10), expansion_convergence),
        ("partial-sum identities for K_n(e_i)", Duration::from_secs(5), partial_sum_identities),
        ("noise-aware step size λ*", Duration::from_secs(5), step_size_advisor),
        ("orthogonal-block counterexample stalls", Duration::from_secs(1), counterexample),
    ];

    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} [{:.2} s / {} s budget]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
