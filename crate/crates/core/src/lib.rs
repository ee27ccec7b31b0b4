//! Joint maximum-likelihood detection of genomic imprinting and maternal
//! effects from discordant sib-pair (DSP) families.
//!
//! Unknown mating-type probabilities are treated as a Dirichlet-distributed
//! latent vector and integrated out by Monte Carlo EM. The E-step samples the
//! latent vector with a pairwise Metropolis–Hastings kernel; the M-step splits
//! into a derivative-free search over the penetrance parameters and a
//! Dirichlet maximum-likelihood update of the concentration vector.
//!
//! Module map:
//! - [`genetics`]: transmission, penetrance, the 29 discordant-pair
//!   configurations and the conditional log-likelihood `log P(Y | Z)`.
//! - [`dirichlet`]: density, sampling, pair conditionals, and the MLE of α.
//! - [`sampler`]: Metropolis–Hastings chains and the PSRF diagnostic.
//! - [`mcem`]: the EM driver and its importance-sampling variant.
//! - [`inference`]: likelihood-ratio tests.
//! - [`simulator`]: the disease-model × scenario data generator.
//! - [`oracle`]: brute-force references used for verification.

pub mod bank;
pub mod dirichlet;
pub mod error;
pub mod genetics;
pub mod inference;
pub mod mcem;
pub mod optim;
pub mod oracle;
pub mod sampler;
pub mod simulator;
mod special;

pub use bank::SampleBank;
pub use dirichlet::DirichletParams;
pub use error::{Error, Result};
pub use genetics::{
    ChildGenotype, Dataset, FamilyRecord, Genotype, Origin, Sibling, SimplexPoint, Theta,
};
pub use inference::{Effect, TestResult};
pub use mcem::{EmConfig, FitResult, ModelVariant};
pub use sampler::{ChainConfig, ChainResult};
pub use simulator::{DiseaseModel, Scenario};

/// The random number generator used throughout. ChaCha8 streams are
/// portable and reproducible across platforms.
pub type SimRng = rand_chacha::ChaCha8Rng;
