use thiserror::Error;

use crate::dirichlet::DirichletParams;
use crate::mcem::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("genotype {0} is not in {{0, 1, 2}}")]
    InvalidGenotype(u8),

    #[error("invalid parent-of-origin tag for child genotype {count}")]
    InvalidOrigin { count: u8 },

    #[error("penetrance needs a resolved parent-of-origin, got an ambiguous child")]
    AmbiguousOrigin,

    #[error("invalid theta: {0}")]
    InvalidTheta(String),

    #[error("penetrance {0} exceeds 1")]
    PenetranceExceedsOne(f64),

    #[error("invalid simplex point: {0}")]
    InvalidSimplex(String),

    #[error("family {family}: child genotypes are not Mendel-compatible with the parents")]
    MendelIncompatible { family: String },

    #[error("family {family} has zero probability under the model")]
    ZeroProbability { family: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("sample bank is empty")]
    EmptyBank,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Dirichlet MLE did not converge after {iterations} iterations")]
    DirichletMleNotConverged {
        iterations: usize,
        last: Box<DirichletParams>,
    },

    #[error("Dirichlet MLE diverges: the samples carry no spread (α → ∞)")]
    DirichletMleDiverged,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("diagnostic input: {0}")]
    Diagnostics(String),

    #[error("fits were computed on different datasets")]
    DatasetMismatch,

    #[error("reduced fit has variant {found}, expected {expected} for this test")]
    VariantMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("EM aborted at iteration {iteration}: {cause}")]
    FitAborted {
        iteration: usize,
        cause: Box<Error>,
        trace: Vec<IterationRecord>,
    },

    #[error("model {0} is not in 1..=8")]
    UnknownModel(usize),

    #[error("scenario {0} is not in 1..=8")]
    UnknownScenario(usize),
}
