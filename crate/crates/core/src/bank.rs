//! Monte Carlo draws of the mating-type vector together with cached
//! `log P(Y | Z)` values for the θ values they have been evaluated at.

use crate::error::{Error, Result};
use crate::genetics::{DataSummary, SimplexPoint, Theta};

#[derive(Clone, Debug, PartialEq)]
pub struct LogLikCache {
    pub theta: Theta,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SampleBank {
    samples: Vec<SimplexPoint>,
    caches: Vec<LogLikCache>,
}

impl SampleBank {
    pub fn new(samples: Vec<SimplexPoint>) -> Self {
        SampleBank {
            samples,
            caches: Vec::new(),
        }
    }

    /// A bank whose samples were recorded together with their log-likelihood
    /// at `theta`.
    pub fn with_cache(samples: Vec<SimplexPoint>, theta: Theta, values: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), values.len());
        SampleBank {
            samples,
            caches: vec![LogLikCache { theta, values }],
        }
    }

    pub fn samples(&self) -> &[SimplexPoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn caches(&self) -> &[LogLikCache] {
        &self.caches
    }

    pub fn cached(&self, theta: &Theta) -> Option<&[f64]> {
        self.caches
            .iter()
            .find(|c| c.theta == *theta)
            .map(|c| c.values.as_slice())
    }

    /// Evaluates and stores `log P(Y | Z_t; θ)` for every sample unless already cached.
    pub fn ensure_cached(&mut self, theta: &Theta, summary: &DataSummary) -> Result<&[f64]> {
        if let Some(i) = self.caches.iter().position(|c| c.theta == *theta) {
            return Ok(&self.caches[i].values);
        }
        let values = self.evaluate(theta, summary)?;
        self.caches.push(LogLikCache { theta: *theta, values });
        Ok(&self.caches.last().expect("just pushed").values)
    }

    /// `log P(Y | Z_t; θ)` for every sample, without caching.
    pub fn evaluate(&self, theta: &Theta, summary: &DataSummary) -> Result<Vec<f64>> {
        let terms = summary.theta_terms(theta)?;
        Ok(self
            .samples
            .iter()
            .map(|z| terms.log_likelihood(summary, z))
            .collect())
    }

    /// (Weighted) mean of `log z_k` per coordinate.
    pub fn mean_log_coords(&self, weights: Option<&[f64]>) -> Result<[f64; 9]> {
        if self.is_empty() {
            return Err(Error::EmptyBank);
        }
        let mut acc = [0.0; 9];
        match weights {
            None => {
                for z in &self.samples {
                    for (a, v) in acc.iter_mut().zip(z.as_array()) {
                        *a += v.ln();
                    }
                }
                let n = self.len() as f64;
                Ok(acc.map(|a| a / n))
            }
            Some(w) => {
                let total: f64 = w.iter().sum();
                for (z, wt) in self.samples.iter().zip(w) {
                    for (a, v) in acc.iter_mut().zip(z.as_array()) {
                        *a += wt * v.ln();
                    }
                }
                Ok(acc.map(|a| a / total))
            }
        }
    }

    /// The bank with every sample repeated `k` times (cache entries follow).
    pub fn repeated(&self, k: usize) -> SampleBank {
        let rep = |v: &[SimplexPoint]| v.iter().flat_map(|z| std::iter::repeat_n(*z, k)).collect();
        SampleBank {
            samples: rep(&self.samples),
            caches: self
                .caches
                .iter()
                .map(|c| LogLikCache {
                    theta: c.theta,
                    values: c.values.iter().flat_map(|v| std::iter::repeat_n(*v, k)).collect(),
                })
                .collect(),
        }
    }

    /// Splits the samples into two contiguous halves (caches dropped).
    pub fn halves(&self) -> (SampleBank, SampleBank) {
        let mid = self.len() / 2;
        (
            SampleBank::new(self.samples[..mid].to_vec()),
            SampleBank::new(self.samples[mid..].to_vec()),
        )
    }
}
