//! The seam between the command layer and an estimation method.
//!
//! Commands see only [`Estimator`]. Another fitting method (for example a
//! partial-likelihood estimator) can be benchmarked by implementing it.

use std::time::Instant;

use mcem_dsp::inference::{lrt_with, BankSource};
use mcem_dsp::mcem::{fit, fit_importance};
use mcem_dsp::{Dataset, EmConfig, Effect, FitResult, ModelVariant, Result, SimRng, TestResult};
use rand::SeedableRng;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Mcem,
    McemIs,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Mcem => "mcem",
            Engine::McemIs => "mcem-is",
        }
    }
}

pub trait Estimator: Sync {
    fn name(&self) -> &str;

    /// Fits one model variant. Must be a pure function of its arguments.
    fn fit(&self, data: &Dataset, variant: ModelVariant, seed: u64) -> Result<FitResult>;

    /// Posterior draws the test statistics are averaged over.
    fn bank_source(&self) -> BankSource {
        BankSource::SharedFull
    }
}

#[derive(Clone, Debug)]
pub struct McemEstimator {
    pub engine: Engine,
    pub config: EmConfig,
    pub bank: BankSource,
}

fn variant_stream(variant: ModelVariant) -> u64 {
    ModelVariant::ALL.iter().position(|v| *v == variant).unwrap_or(0) as u64
}

impl Estimator for McemEstimator {
    fn name(&self) -> &str {
        self.engine.name()
    }

    /// Each variant draws from its own ChaCha stream of `seed`, so a fit does
    /// not depend on which other variants were fitted before it.
    fn fit(&self, data: &Dataset, variant: ModelVariant, seed: u64) -> Result<FitResult> {
        let mut rng = SimRng::seed_from_u64(seed);
        rng.set_stream(variant_stream(variant));
        match self.engine {
            Engine::Mcem => fit(data, &self.config, variant, &mut rng),
            Engine::McemIs => fit_importance(data, &self.config, variant, &mut rng),
        }
    }

    fn bank_source(&self) -> BankSource {
        self.bank
    }
}

/// Four fits and three likelihood-ratio tests on one dataset.
#[derive(Clone, Debug)]
pub struct TestReport {
    /// In [`ModelVariant::ALL`] order.
    pub fits: Vec<FitResult>,
    /// In [`Effect::ALL`] order.
    pub tests: Vec<TestResult>,
    pub seconds: f64,
}

impl TestReport {
    pub fn full(&self) -> &FitResult {
        &self.fits[0]
    }

    pub fn test(&self, effect: Effect) -> &TestResult {
        &self.tests[Effect::ALL.iter().position(|e| *e == effect).expect("known effect")]
    }
}

pub fn run_tests(estimator: &dyn Estimator, data: &Dataset, seed: u64) -> Result<TestReport> {
    let start = Instant::now();
    let fits = ModelVariant::ALL
        .iter()
        .map(|&v| estimator.fit(data, v, seed))
        .collect::<Result<Vec<_>>>()?;
    let tests = Effect::ALL
        .iter()
        .map(|&e| {
            let reduced = &fits[variant_stream(e.reduced_variant()) as usize];
            lrt_with(&fits[0], reduced, e, data, estimator.bank_source())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TestReport {
        fits,
        tests,
        seconds: start.elapsed().as_secs_f64(),
    })
}
