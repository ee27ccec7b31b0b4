//! Metropolis–Hastings sampling of the mating-type vector from
//! `f(Z | Y; ψ) ∝ P(Y | Z; θ) π_α(Z)`.
//!
//! Each proposal redraws two coordinates from their conditional prior, so the
//! prior and proposal densities cancel and the acceptance ratio is the
//! likelihood ratio alone.

use rand::{Rng, SeedableRng};
use rand_distr::Beta;
use statrs::function::erf::erfc_inv;

use crate::bank::SampleBank;
use crate::dirichlet::{redraw_pair, sample_dirichlet, sample_pair_given_rest, CoordPair, DirichletParams};
use crate::error::{Error, Result};
use crate::genetics::{DataSummary, Dataset, SimplexPoint, Theta, ThetaTerms};
use crate::SimRng;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n_samples: usize,
    pub n_burnin: usize,
    pub pair_schedule: Vec<CoordPair>,
    pub thin: usize,
    pub n_diag_chains: usize,
}

impl ChainConfig {
    /// Overlapping systematic sweep `(1,2) (3,4) (5,6) (7,8) (9,1) (2,3)
    /// (4,5) (6,7) (8,9)` in 1-based coordinates.
    pub fn default_schedule() -> Vec<CoordPair> {
        [(0, 1), (2, 3), (4, 5), (6, 7), (8, 0), (1, 2), (3, 4), (5, 6), (7, 8)]
            .into_iter()
            .map(|(i, j)| CoordPair::new(i, j).expect("static schedule"))
            .collect()
    }

    pub fn with_samples(n_samples: usize) -> Self {
        ChainConfig {
            n_samples,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.thin == 0 || self.n_diag_chains == 0 {
            return Err(Error::InvalidConfig("n_samples, thin and n_diag_chains must be positive".into()));
        }
        let mut seen = [false; 9];
        for p in &self.pair_schedule {
            seen[p.first()] = true;
            seen[p.second()] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidConfig("pair schedule must cover all 9 coordinates".into()));
        }
        Ok(())
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_samples: 10_000,
            n_burnin: 1_000,
            pair_schedule: Self::default_schedule(),
            thin: 1,
            n_diag_chains: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    pub bank: SampleBank,
    pub acceptance_rate: f64,
    pub psrf: Option<[f64; 9]>,
    pub warnings: Vec<String>,
}

/// `P(Y | z*; θ) / P(Y | z; θ)`.
pub fn mh_ratio(theta: &Theta, data: &Dataset, z_current: &SimplexPoint, z_proposed: &SimplexPoint) -> Result<f64> {
    let summary = DataSummary::new(data);
    let terms = summary.theta_terms(theta)?;
    Ok((terms.log_likelihood(&summary, z_proposed) - terms.log_likelihood(&summary, z_current)).exp())
}

/// One pairwise update. Returns the new state and whether the proposal was accepted.
pub fn mh_step_pair<R: Rng + ?Sized>(
    theta: &Theta,
    alpha: &DirichletParams,
    data: &Dataset,
    z: &SimplexPoint,
    pair: CoordPair,
    rng: &mut R,
) -> Result<(SimplexPoint, bool)> {
    let summary = DataSummary::new(data);
    let terms = summary.theta_terms(theta)?;
    let proposal = sample_pair_given_rest(alpha, pair, z, rng)?;
    let log_r = terms.log_likelihood(&summary, &proposal) - terms.log_likelihood(&summary, z);
    let u: f64 = rng.random();
    if u.ln() < log_r {
        Ok((proposal, true))
    } else {
        Ok((*z, false))
    }
}

/// A compiled sweep kernel for fixed (θ, α).
pub(crate) struct Kernel<'a> {
    summary: &'a DataSummary,
    terms: ThetaTerms,
    proposals: Vec<(CoordPair, Beta<f64>)>,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(
        theta: &Theta,
        alpha: &DirichletParams,
        summary: &'a DataSummary,
        schedule: &[CoordPair],
    ) -> Result<Self> {
        let terms = summary.theta_terms(theta)?;
        let a = alpha.as_array();
        let proposals = schedule
            .iter()
            .map(|&p| {
                Beta::new(a[p.first()], a[p.second()])
                    .map(|b| (p, b))
                    .map_err(|e| Error::Domain(format!("beta proposal: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Kernel {
            summary,
            terms,
            proposals,
        })
    }

    #[inline]
    fn log_lik(&self, z: &SimplexPoint) -> f64 {
        self.terms.log_likelihood(self.summary, z)
    }

    /// One pass over the schedule; returns the number of accepted proposals.
    fn sweep<R: Rng + ?Sized>(&self, z: &mut SimplexPoint, ll: &mut f64, rng: &mut R) -> usize {
        let mut accepted = 0;
        for (pair, beta) in &self.proposals {
            let prop = redraw_pair(beta, *pair, z, rng);
            let ll_prop = self.log_lik(&prop);
            let u: f64 = rng.random();
            if u.ln() < ll_prop - *ll {
                *z = prop;
                *ll = ll_prop;
                accepted += 1;
            }
        }
        let s: f64 = z.as_array().iter().sum();
        if s != 1.0 {
            *z = SimplexPoint::from_raw(z.as_array().map(|v| v / s));
            *ll = self.log_lik(z);
        }
        accepted
    }
}

pub(crate) fn run_chain_compiled<R: Rng + ?Sized>(
    theta: &Theta,
    alpha: &DirichletParams,
    summary: &DataSummary,
    config: &ChainConfig,
    start: Option<SimplexPoint>,
    rng: &mut R,
) -> Result<ChainResult> {
    config.validate()?;
    let kernel = Kernel::new(theta, alpha, summary, &config.pair_schedule)?;
    let mut z = match start {
        Some(z) => z,
        None => sample_dirichlet(alpha, rng),
    };
    let mut ll = kernel.log_lik(&z);
    let per_sweep = kernel.proposals.len();

    let mut warnings = Vec::new();
    let mut burn_acc = 0usize;
    for _ in 0..config.n_burnin {
        burn_acc += kernel.sweep(&mut z, &mut ll, rng);
    }
    if config.n_burnin > 0 {
        let rate = burn_acc as f64 / (config.n_burnin * per_sweep) as f64;
        if rate < 0.01 {
            warnings.push(format!("burn-in acceptance rate {rate:.4} is below 0.01"));
        }
    }

    let mut samples = Vec::with_capacity(config.n_samples);
    let mut values = Vec::with_capacity(config.n_samples);
    let mut acc = 0usize;
    for _ in 0..config.n_samples {
        for _ in 0..config.thin {
            acc += kernel.sweep(&mut z, &mut ll, rng);
        }
        samples.push(z);
        values.push(ll);
    }
    let acceptance_rate = acc as f64 / (config.n_samples * config.thin * per_sweep) as f64;
    Ok(ChainResult {
        bank: SampleBank::with_cache(samples, *theta, values),
        acceptance_rate,
        psrf: None,
        warnings,
    })
}

/// Runs one chain started from a draw of `π_α`; burn-in sweeps are
/// discarded and one sample is recorded per `thin` full sweeps.
pub fn run_chain<R: Rng + ?Sized>(
    theta: &Theta,
    alpha: &DirichletParams,
    data: &Dataset,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainResult> {
    let summary = DataSummary::new(data);
    run_chain_compiled(theta, alpha, &summary, config, None, rng)
}

/// Runs `n_diag_chains` chains from overdispersed starting points (uniform
/// draws on the simplex) on independent streams of `seed` and attaches the
/// PSRF. The returned bank is the first chain's.
pub fn run_chain_diagnostics(
    theta: &Theta,
    alpha: &DirichletParams,
    data: &Dataset,
    config: &ChainConfig,
    seed: u64,
) -> Result<ChainResult> {
    let summary = DataSummary::new(data);
    let mut results = Vec::with_capacity(config.n_diag_chains);
    for c in 0..config.n_diag_chains {
        let mut rng = SimRng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let start = sample_dirichlet(&DirichletParams::ones(), &mut rng);
        results.push(run_chain_compiled(theta, alpha, &summary, config, Some(start), &mut rng)?);
    }
    let banks: Vec<SampleBank> = results.iter().map(|r| r.bank.clone()).collect();
    let rhat = if banks.len() >= 2 { Some(psrf(&banks)?) } else { None };
    let mut first = results.swap_remove(0);
    first.psrf = rhat;
    Ok(first)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Rank-normalized potential scale reduction factor per coordinate.
pub fn psrf(chains: &[SampleBank]) -> Result<[f64; 9]> {
    if chains.len() < 2 {
        return Err(Error::Diagnostics("need at least two chains".into()));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::Diagnostics("chains have different lengths".into()));
    }
    if n < 100 {
        return Err(Error::Diagnostics(format!("chains of length {n} are shorter than 100")));
    }
    let m = chains.len();
    let total = (m * n) as f64;
    let mut out = [0.0; 9];
    for (k, slot) in out.iter_mut().enumerate() {
        let pooled: Vec<f64> = chains
            .iter()
            .flat_map(|c| c.samples().iter().map(move |z| z.as_array()[k]))
            .collect();
        let scores: Vec<f64> = average_ranks(&pooled)
            .into_iter()
            .map(|r| normal_quantile((r - 0.375) / (total + 0.25)))
            .collect();
        let means: Vec<f64> = scores.chunks(n).map(|c| c.iter().sum::<f64>() / n as f64).collect();
        let grand = means.iter().sum::<f64>() / m as f64;
        let between = n as f64 / (m as f64 - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
        let within = scores
            .chunks(n)
            .zip(&means)
            .map(|(c, mu)| c.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n as f64 - 1.0))
            .sum::<f64>()
            / m as f64;
        *slot = if within > 0.0 {
            let var_plus = (n as f64 - 1.0) / n as f64 * within + between / n as f64;
            (var_plus / within).sqrt()
        } else if between > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genetics::{FamilyRecord, Genotype};

    fn fam(id: usize, m: u8, f: u8, c1: u8, c2: u8) -> FamilyRecord {
        FamilyRecord {
            id: format!("f{id}"),
            m: Genotype::new(m).unwrap(),
            f: Genotype::new(f).unwrap(),
            c1: Genotype::new(c1).unwrap(),
            c2: Genotype::new(c2).unwrap(),
            siblings: vec![],
        }
    }

    fn point() -> SimplexPoint {
        SimplexPoint::new([0.05, 0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.05, 0.2]).unwrap()
    }

    #[test]
    fn ratio_identities() {
        let theta = Theta::new(0.05, 1.5, 2.0, 1.3, 1.2, 1.1).unwrap();
        let data = Dataset::new(vec![fam(0, 1, 1, 1, 0), fam(1, 0, 0, 0, 0), fam(2, 2, 1, 2, 1)]).unwrap();
        let a = point();
        let b = SimplexPoint::uniform();
        assert_eq!(mh_ratio(&theta, &data, &a, &a).unwrap(), 1.0);
        let r = mh_ratio(&theta, &data, &a, &b).unwrap() * mh_ratio(&theta, &data, &b, &a).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
        assert_eq!(mh_ratio(&theta, &Dataset::empty(), &a, &b).unwrap(), 1.0);
    }

    #[test]
    fn ratio_for_single_type1_family() {
        let theta = Theta::new(0.05, 1.5, 2.0, 1.3, 1.2, 1.1).unwrap();
        let data = Dataset::new(vec![fam(0, 0, 0, 0, 0)]).unwrap();
        let a = point();
        let b = SimplexPoint::uniform();
        let denom = |z: &SimplexPoint| crate::genetics::ds_denominator(&theta, z).unwrap();
        let expect = (b.as_array()[0] / denom(&b)) / (a.as_array()[0] / denom(&a));
        let got = mh_ratio(&theta, &data, &a, &b).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_data_always_accepts() {
        let theta = Theta::null(0.05).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let mut z = point();
        for p in ChainConfig::default_schedule() {
            let (next, acc) = mh_step_pair(&theta, &DirichletParams::ones(), &Dataset::empty(), &z, p, &mut rng).unwrap();
            assert!(acc);
            z = next;
        }
    }

    #[test]
    fn step_is_deterministic() {
        let theta = Theta::new(0.05, 1.5, 2.0, 1.3, 1.2, 1.1).unwrap();
        let data = Dataset::new(vec![fam(0, 1, 1, 1, 0), fam(1, 0, 1, 1, 0)]).unwrap();
        let pair = CoordPair::new(0, 4).unwrap();
        let run = || {
            let mut rng = SimRng::seed_from_u64(77);
            mh_step_pair(&theta, &DirichletParams::ones(), &data, &point(), pair, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn schedule_must_cover_coordinates() {
        let mut cfg = ChainConfig::default();
        cfg.pair_schedule.truncate(3);
        assert!(cfg.validate().is_err());
        assert!(ChainConfig::default().validate().is_ok());
    }

    #[test]
    fn chain_samples_are_interior_and_cached() {
        let theta = Theta::new(0.05, 1.5, 2.0, 1.3, 1.2, 1.1).unwrap();
        let data = Dataset::new((0..30).map(|i| fam(i, (i % 2) as u8, 1, 1, 0)).collect()).unwrap();
        let alpha = DirichletParams::new([3.0; 9]).unwrap();
        let cfg = ChainConfig {
            n_samples: 500,
            n_burnin: 50,
            ..Default::default()
        };
        let mut rng = SimRng::seed_from_u64(3);
        let res = run_chain(&theta, &alpha, &data, &cfg, &mut rng).unwrap();
        assert_eq!(res.bank.len(), 500);
        assert!((0.0..=1.0).contains(&res.acceptance_rate));
        let cached = res.bank.cached(&theta).unwrap();
        for (z, v) in res.bank.samples().iter().zip(cached) {
            assert!(z.is_interior());
            assert!((z.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let direct = crate::genetics::log_likelihood_given_z(&theta, z, &data).unwrap();
            assert!((direct - v).abs() < 1e-10);
        }
    }

    #[test]
    fn penetrance_violation_propagates() {
        // Valid theta, but an unaffected proband whose penetrance is exactly 1.
        let theta = Theta::new(0.5, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let data = Dataset::new(vec![fam(0, 0, 2, 1, 1)]).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let pair = CoordPair::new(0, 1).unwrap();
        let r = mh_step_pair(&theta, &DirichletParams::ones(), &data, &point(), pair, &mut rng);
        assert!(matches!(r, Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn psrf_edge_cases() {
        let mut rng = SimRng::seed_from_u64(4);
        let draws: Vec<SimplexPoint> = (0..200)
            .map(|_| sample_dirichlet(&DirichletParams::ones(), &mut rng))
            .collect();
        let a = SampleBank::new(draws.clone());
        let r = psrf(&[a.clone(), a.clone()]).unwrap();
        assert!(r.iter().all(|&v| v < 1.001));

        let lo = SampleBank::new(vec![point(); 150]);
        let hi = SampleBank::new(vec![SimplexPoint::uniform(); 150]);
        let r = psrf(&[lo, hi]).unwrap();
        assert!(r.iter().all(|&v| v > 2.0));

        let short = SampleBank::new(draws[..150].to_vec());
        assert!(psrf(&[a.clone(), short]).is_err());
        assert!(psrf(&[a]).is_err());
    }
}
