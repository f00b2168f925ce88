//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use kaczmarz_core::measures::{Atom, DEFAULT_CANTOR_DEPTH};
use kaczmarz_core::{validate_lambda, AtomicMeasure, Complex64, ComplexVector, Location, SpectralMeasure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Longest horizon for exponential-system runs; each step stores its own task.
pub const MAX_HORIZON: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    RegretRun,
    NoisySweep,
    IdentitySuite,
    EffectivenessReport,
    ExpansionReport,
    HardyReport,
    LambdaAdvisor,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::RegretRun,
        ExperimentKind::NoisySweep,
        ExperimentKind::IdentitySuite,
        ExperimentKind::EffectivenessReport,
        ExperimentKind::ExpansionReport,
        ExperimentKind::HardyReport,
        ExperimentKind::LambdaAdvisor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RegretRun => "regret_run",
            ExperimentKind::NoisySweep => "noisy_sweep",
            ExperimentKind::IdentitySuite => "identity_suite",
            ExperimentKind::EffectivenessReport => "effectiveness_report",
            ExperimentKind::ExpansionReport => "expansion_report",
            ExperimentKind::HardyReport => "hardy_report",
            ExperimentKind::LambdaAdvisor => "lambda_advisor",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::RegretRun => "single Kaczmarz run on an exponential system; regret ledger with bound column",
            ExperimentKind::NoisySweep => "Monte-Carlo noisy runs; mean average regret, standard error and noisy bound",
            ExperimentKind::IdentitySuite => "random projection chains; telescoping, product identity, scaled Parseval",
            ExperimentKind::EffectivenessReport => "alpha coefficient table with running sum against lambda^3/(2-lambda)",
            ExperimentKind::ExpansionReport => "Kaczmarz-Fourier reconstruction residuals and Parseval partial sums",
            ExperimentKind::HardyReport => "boundary sweep of |A - lambda|^2 against the coefficient sum; inner-function disk grid",
            ExperimentKind::LambdaAdvisor => "noise-aware step size lambda* with surrogate grid check",
        }
    }

    fn needs_lambdas(self) -> bool {
        self != ExperimentKind::LambdaAdvisor
    }

    fn needs_measure(self) -> bool {
        !matches!(self, ExperimentKind::IdentitySuite | ExperimentKind::LambdaAdvisor)
    }

    fn needs_atomic(self) -> bool {
        matches!(
            self,
            ExperimentKind::RegretRun | ExperimentKind::NoisySweep | ExperimentKind::ExpansionReport
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An atom location: `0`, a float in `[0, 1)`, or an exact fraction `"p/q"`.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum LocationSpec {
    Integer(i64),
    Float(f64),
    Text(String),
}

impl LocationSpec {
    fn to_location(&self) -> Result<Location> {
        let loc = match self {
            LocationSpec::Integer(n) => Location::rational(*n, 1),
            LocationSpec::Float(x) => Location::real(*x),
            LocationSpec::Text(s) => {
                let (p, q) = s
                    .split_once('/')
                    .ok_or_else(|| CliError::Invalid(format!("location \"{s}\" is not of the form p/q")))?;
                let parse = |t: &str| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|_| CliError::Invalid(format!("location \"{s}\" has a non-integer part")))
                };
                Location::rational(parse(p)?, parse(q)?)
            }
        };
        Ok(loc?)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Atomic {
        locations: Vec<LocationSpec>,
        /// Uniform when omitted.
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Stratified random atoms drawn from the root seed.
    RandomAtomic { atoms: usize },
    Cantor {
        #[serde(default)]
        depth: Option<u32>,
    },
    Lebesgue,
}

impl MeasureSpec {
    fn is_random(&self) -> bool {
        matches!(self, MeasureSpec::RandomAtomic { .. })
    }

    fn is_atomic(&self) -> bool {
        matches!(self, MeasureSpec::Atomic { .. } | MeasureSpec::RandomAtomic { .. })
    }

    pub fn build(&self, seed: Option<u64>) -> Result<SpectralMeasure> {
        Ok(match self {
            MeasureSpec::Atomic { locations, weights } => {
                let weights = match weights {
                    Some(w) if w.len() != locations.len() => {
                        return Err(CliError::Invalid(format!(
                            "measure has {} locations but {} weights",
                            locations.len(),
                            w.len()
                        )))
                    }
                    Some(w) => w.clone(),
                    None => vec![1.0 / locations.len() as f64; locations.len()],
                };
                let atoms = locations
                    .iter()
                    .zip(weights)
                    .map(|(l, weight)| {
                        Ok(Atom {
                            location: l.to_location()?,
                            weight,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                AtomicMeasure::new(atoms)?.into()
            }
            MeasureSpec::RandomAtomic { atoms } => {
                let seed = seed.ok_or_else(|| CliError::Invalid("random_atomic measure requires a seed".into()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedTag::Measure));
                AtomicMeasure::random_stratified(*atoms, &mut rng)?.into()
            }
            MeasureSpec::Cantor { depth } => SpectralMeasure::cantor(depth.unwrap_or(DEFAULT_CANTOR_DEPTH))?,
            MeasureSpec::Lebesgue => SpectralMeasure::Lebesgue,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    Gaussian,
    UniformSphere,
}

/// Inputs to the step-size advisor: either `beta` directly or all four raw quantities.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisorSpec {
    pub beta: Option<f64>,
    pub norm_w2: Option<f64>,
    pub c: Option<f64>,
    pub sigma2: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Horizon.
    pub k: Option<usize>,
    /// Truncation order `N`.
    pub order: Option<usize>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// `w*` as `[re, im]` pairs; random when omitted.
    pub w_star: Option<Vec<[f64; 2]>>,
    /// Function to expand, as `[re, im]` values at the atoms; random when omitted.
    pub f: Option<Vec<[f64; 2]>>,
    pub radii: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    /// Ambient dimension for random projection chains.
    pub dim: Option<usize>,
    /// Projections per chain.
    pub steps: Option<usize>,
    pub grid_radii: Option<usize>,
    pub grid_angles: Option<usize>,
    pub advisor: Option<AdvisorSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            message: "file is not valid UTF-8".into(),
        })?;
        Ok((Self::parse(text, path)?, bytes))
    }

    fn uses_randomness(&self) -> bool {
        let random_measure = self.measure.as_ref().is_some_and(MeasureSpec::is_random);
        let noisy = self.sigma2 > 0.0 && matches!(self.kind, ExperimentKind::RegretRun | ExperimentKind::NoisySweep);
        let random_w = matches!(self.kind, ExperimentKind::RegretRun | ExperimentKind::NoisySweep) && self.w_star.is_none();
        let random_f = self.kind == ExperimentKind::ExpansionReport && self.f.is_none();
        random_measure || noisy || random_w || random_f || self.kind == ExperimentKind::IdentitySuite
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(CliError::Invalid(msg));
        if self.kind.needs_lambdas() && self.lambdas.is_empty() {
            return invalid(format!("{} needs a non-empty `lambdas` list", self.kind));
        }
        for &l in &self.lambdas {
            if validate_lambda(l).is_err() {
                return invalid(format!("lambda {l} is outside (0, 2)"));
            }
        }
        if !self.sigma2.is_finite() || self.sigma2 < 0.0 {
            return invalid(format!("sigma2 must be finite and >= 0, got {}", self.sigma2));
        }
        if self.uses_randomness() && self.seed.is_none() {
            return invalid(format!("{} with these settings draws random numbers and needs `seed`", self.kind));
        }
        match (&self.measure, self.kind.needs_measure()) {
            (None, true) => return invalid(format!("{} needs a [measure] table", self.kind)),
            (Some(m), true) if self.kind.needs_atomic() && !m.is_atomic() => {
                return invalid(format!("{} needs an atomic measure", self.kind))
            }
            _ => {}
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
                return invalid("radii must be a non-empty list inside (0, 1)".into());
            }
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return invalid(format!("threshold must be positive, got {t}"));
            }
        }
        for (name, value) in [("k", self.k), ("order", self.order), ("trials", self.trials), ("steps", self.steps)] {
            if value == Some(0) {
                return invalid(format!("`{name}` must be at least 1"));
            }
        }
        match self.kind {
            ExperimentKind::RegretRun | ExperimentKind::NoisySweep => {
                let k = self.horizon();
                if k > MAX_HORIZON {
                    return invalid(format!("k = {k} exceeds the supported horizon {MAX_HORIZON}"));
                }
                if self.kind == ExperimentKind::NoisySweep && self.sigma2 == 0.0 {
                    return invalid("noisy_sweep needs sigma2 > 0".into());
                }
            }
            ExperimentKind::LambdaAdvisor => self.advisor_inputs().map(|_| ())?,
            _ => {}
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.k.unwrap_or(10_000)
    }

    /// Parsed `w*` or `f` values.
    pub fn complex_list(values: &[[f64; 2]]) -> Result<ComplexVector> {
        Ok(ComplexVector::new(values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())?)
    }

    /// `(a, b, β)` of the surrogate `a/(λ(2−λ)) + 2bλ/(2−λ)`.
    pub fn advisor_inputs(&self) -> Result<(f64, f64, f64)> {
        let spec = self
            .advisor
            .as_ref()
            .ok_or_else(|| CliError::Invalid("lambda_advisor needs an [advisor] table".into()))?;
        match (spec.beta, spec.norm_w2, spec.c, spec.sigma2, spec.k) {
            (Some(beta), None, None, None, None) => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(CliError::Invalid(format!("beta must be positive, got {beta}")));
                }
                Ok((1.0, beta, beta))
            }
            (None, Some(norm_w2), Some(c), Some(sigma2), Some(k)) => {
                let beta = kaczmarz_core::kaczmarz::advisor_beta(norm_w2, c, sigma2, k)?;
                Ok((2.0 * norm_w2 / k as f64, c * sigma2, beta))
            }
            _ => Err(CliError::Invalid(
                "[advisor] takes either `beta` alone or all of `norm_w2`, `c`, `sigma2`, `k`".into(),
            )),
        }
    }
}

/// Independent streams derived from the single root seed.
#[derive(Clone, Copy, Debug)]
pub enum SeedTag {
    Measure = 1,
    WStar = 2,
    Noise = 3,
    Function = 4,
    Projections = 5,
}

/// SplitMix64 finalizer over `root ⊕ tag`.
pub fn derive_seed(root: u64, tag: SeedTag) -> u64 {
    let mut z = root ^ (tag as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
