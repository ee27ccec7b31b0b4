//! Monte Carlo EM over `ψ = (θ, α)`.
//!
//! Each iteration draws a Metropolis–Hastings chain for the mating-type
//! vector at the current iterate, then maximizes the two separable halves of
//! the Monte Carlo Q function: the θ-term by Nelder–Mead on log-parameters,
//! the α-term by the Dirichlet MLE of the bank's mean log coordinates. The
//! importance-sampling variant reuses one reference bank with reweighting
//! after a switch iteration.

use rand::Rng;

use crate::bank::SampleBank;
use crate::dirichlet::{dirichlet_mle_from_log_means, log_density_with_norm, DirichletParams};
use crate::error::{Error, Result};
use crate::genetics::{DataSummary, Dataset, SimplexPoint, Theta};
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::sampler::{run_chain_compiled, ChainConfig};

const DELTA_MIN: f64 = 1e-8;
const DELTA_MAX: f64 = 1.0 - 1e-9;
const RR_MIN: f64 = 1e-3;
const RR_MAX: f64 = 1e3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelVariant {
    Full,
    Null,
    NoImprinting,
    NoMaternal,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Full,
        ModelVariant::Null,
        ModelVariant::NoImprinting,
        ModelVariant::NoMaternal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Full => "full",
            ModelVariant::Null => "null",
            ModelVariant::NoImprinting => "no-imprinting",
            ModelVariant::NoMaternal => "no-maternal",
        }
    }

    /// Which of `(δ, r1, r2, r_im, s1, s2)` are estimated.
    pub fn free_mask(self) -> [bool; 6] {
        match self {
            ModelVariant::Full => [true; 6],
            ModelVariant::Null => [true, false, false, false, false, false],
            ModelVariant::NoImprinting => [true, true, true, false, true, true],
            ModelVariant::NoMaternal => [true, true, true, true, false, false],
        }
    }

    /// Sets the variant's fixed parameters to 1.
    pub fn constrain(self, theta: &Theta) -> Result<Theta> {
        let mask = self.free_mask();
        let mut v = theta.to_array();
        for (x, free) in v.iter_mut().zip(mask) {
            if !free {
                *x = 1.0;
            }
        }
        Theta::from_array(v)
    }

    pub fn satisfied_by(self, theta: &Theta) -> bool {
        theta
            .to_array()
            .iter()
            .zip(self.free_mask())
            .all(|(x, free)| free || *x == 1.0)
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmConfig {
    pub max_iter: usize,
    pub min_iter: usize,
    /// Maximum relative change across free θ parameters.
    pub rel_tol: f64,
    pub mc_samples: usize,
    pub is_switch_iter: usize,
    pub is_weight_ess_floor: f64,
    pub n_burnin: usize,
    pub optimizer: NelderMeadConfig,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iter: 100,
            min_iter: 3,
            rel_tol: 1e-4,
            mc_samples: 10_000,
            is_switch_iter: 10,
            is_weight_ess_floor: 0.2,
            n_burnin: 1_000,
            // Successive M-steps start next to the previous optimum.
            optimizer: NelderMeadConfig {
                initial_step: 0.05,
                restarts: 1,
                ..Default::default()
            },
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.min_iter == 0 || self.mc_samples == 0 {
            return Err(Error::InvalidConfig("max_iter, min_iter and mc_samples must be positive".into()));
        }
        if self.min_iter > self.max_iter {
            return Err(Error::InvalidConfig(format!(
                "min_iter {} exceeds max_iter {}",
                self.min_iter, self.max_iter
            )));
        }
        if self.is_switch_iter == 0 {
            return Err(Error::InvalidConfig("is_switch_iter must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("rel_tol must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.is_weight_ess_floor) {
            return Err(Error::InvalidConfig("is_weight_ess_floor must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            n_samples: self.mc_samples,
            n_burnin: self.n_burnin,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub theta: Theta,
    pub alpha: DirichletParams,
    /// `Q_MC(ψ^k; ψ^{k-1})` on the bank used for the update.
    pub q_value: f64,
    /// Effective sample size of the importance weights; `None` for a fresh chain.
    pub ess: Option<f64>,
    pub acceptance_rate: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub theta_hat: Theta,
    pub alpha_hat: DirichletParams,
    pub variant: ModelVariant,
    /// The last bank used for an M-step, with `log P(Y | Z)` cached at `theta_hat`.
    pub final_bank: SampleBank,
    /// Normalized importance weights on `final_bank` when it was reweighted.
    pub final_weights: Option<Vec<f64>>,
    pub trace: Vec<IterationRecord>,
    pub n_iter: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub data_fingerprint: [u8; 32],
    pub ds_only: bool,
}

/// Starting point `θ⁰ = (δ₀, 1, …, 1)`, `α⁰ = 100·n_mf / n + 1`.
///
/// `δ₀` is the affected fraction among additional siblings (clamped to
/// `[0.001, 0.5]`), else 0.05.
pub fn init_psi(data: &Dataset, variant: ModelVariant) -> Result<(Theta, DirichletParams)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let counts = data.n_mf();
    let mut alpha = [0.0; 9];
    for m in 0..3 {
        for f in 0..3 {
            alpha[3 * m + f] = 100.0 * counts[m][f] as f64 / n + 1.0;
        }
    }
    let (mut affected, mut total) = (0usize, 0usize);
    for fam in data.families() {
        for s in &fam.siblings {
            total += 1;
            affected += s.affected as usize;
        }
    }
    let delta = if total > 0 {
        (affected as f64 / total as f64).clamp(0.001, 0.5)
    } else {
        0.05
    };
    let theta = variant.constrain(&Theta::null(delta)?)?;
    Ok((theta, DirichletParams::new(alpha)?))
}

/// Mean over the bank of `log P(Y | Z; θ)`, optionally weighted.
pub fn q_theta_term(theta: &Theta, bank: &SampleBank, data: &Dataset) -> Result<f64> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let summary = DataSummary::new(data);
    let values = bank.evaluate(theta, &summary)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean over the bank of `log π_α(Z)`.
pub fn q_alpha_term(alpha: &DirichletParams, bank: &SampleBank) -> Result<f64> {
    weighted_alpha_term(alpha, bank.samples(), None)
}

/// `Q_MC(ψ) = mean_t log P(Y | Z_t; θ) + mean_t log π_α(Z_t)`.
pub fn q_mc(theta: &Theta, alpha: &DirichletParams, bank: &SampleBank, data: &Dataset) -> Result<f64> {
    Ok(q_theta_term(theta, bank, data)? + q_alpha_term(alpha, bank)?)
}

fn weighted_mean(values: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        None => values.iter().sum::<f64>() / values.len() as f64,
        Some(w) => values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / w.iter().sum::<f64>(),
    }
}

fn weighted_alpha_term(alpha: &DirichletParams, samples: &[SimplexPoint], weights: Option<&[f64]>) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyBank);
    }
    if samples.iter().any(|z| !z.is_interior()) {
        return Err(Error::Domain("Dirichlet density needs interior points".into()));
    }
    let log_b = alpha.log_beta();
    let values: Vec<f64> = samples
        .iter()
        .map(|z| log_density_with_norm(alpha.as_array(), log_b, z))
        .collect();
    Ok(weighted_mean(&values, weights))
}

/// The θ-dependent part of the Monte Carlo Q function on a fixed bank.
struct ThetaObjective<'a> {
    summary: &'a DataSummary,
    samples: &'a [SimplexPoint],
    weights: Option<&'a [f64]>,
}

impl ThetaObjective<'_> {
    /// `C(θ) − n · mean_t log(z_t · G(θ))`.
    fn value(&self, theta: &Theta) -> Result<f64> {
        let terms = self.summary.theta_terms(theta)?;
        let n = self.summary.n_families() as f64;
        let logs = self.samples.iter().map(|z| terms.denominator(z).ln());
        let mean_log = match self.weights {
            None => logs.sum::<f64>() / self.samples.len() as f64,
            Some(w) => logs.zip(w).map(|(l, w)| l * w).sum::<f64>() / w.iter().sum::<f64>(),
        };
        Ok(terms.log_const() - n * mean_log)
    }
}

fn theta_bounds(mask: [bool; 6]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, free) in mask.iter().enumerate() {
        if *free {
            if i == 0 {
                lo.push(DELTA_MIN.ln());
                hi.push(DELTA_MAX.ln());
            } else {
                lo.push(RR_MIN.ln());
                hi.push(RR_MAX.ln());
            }
        }
    }
    (lo, hi)
}

fn assemble(base: &[f64; 6], mask: [bool; 6], x: &[f64]) -> [f64; 6] {
    let mut v = *base;
    let mut k = 0;
    for (slot, free) in v.iter_mut().zip(mask) {
        if free {
            *slot = x[k].exp();
            k += 1;
        }
    }
    v
}

pub(crate) fn m_step_theta_weighted(
    summary: &DataSummary,
    samples: &[SimplexPoint],
    weights: Option<&[f64]>,
    theta_init: &Theta,
    variant: ModelVariant,
    cfg: &NelderMeadConfig,
) -> Result<(Theta, Vec<String>)> {
    if samples.is_empty() {
        return Err(Error::EmptyBank);
    }
    let init = variant.constrain(theta_init)?;
    if variant == ModelVariant::Null && !summary.has_siblings() {
        return Ok((
            init,
            vec!["theta objective is flat in delta for discordant pairs without additional siblings; delta kept".into()],
        ));
    }
    let objective = ThetaObjective {
        summary,
        samples,
        weights,
    };
    let q_init = objective.value(&init)?;
    let mask = variant.free_mask();
    let base = init.to_array();
    let x0: Vec<f64> = base
        .iter()
        .zip(mask)
        .filter(|(_, free)| *free)
        .map(|(v, _)| v.ln())
        .collect();
    let (lo, hi) = theta_bounds(mask);
    let f = |x: &[f64]| match Theta::from_array(assemble(&base, mask, x)) {
        Ok(t) => objective.value(&t).map(|q| -q).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let min = nelder_mead(f, &x0, &lo, &hi, cfg);
    let mut warnings = Vec::new();
    if !min.converged {
        warnings.push(format!(
            "theta optimizer stopped after {} iterations without meeting tolerance",
            min.iterations
        ));
    }
    let candidate = Theta::from_array(assemble(&base, mask, &min.x))?;
    // Guard exact ascent on this bank.
    if objective.value(&candidate)? >= q_init {
        Ok((candidate, warnings))
    } else {
        Ok((init, warnings))
    }
}

/// Maximizer of the θ-term of `q_mc` over the variant's free parameters.
pub fn m_step_theta(bank: &SampleBank, data: &Dataset, theta_init: &Theta, variant: ModelVariant) -> Result<Theta> {
    let summary = DataSummary::new(data);
    m_step_theta_weighted(&summary, bank.samples(), None, theta_init, variant, &NelderMeadConfig::default())
        .map(|(t, _)| t)
}

/// Dirichlet MLE from the bank's mean log coordinates.
pub fn m_step_alpha(bank: &SampleBank) -> Result<DirichletParams> {
    dirichlet_mle_from_log_means(bank.mean_log_coords(None)?)
}

fn m_step_alpha_weighted(bank: &SampleBank, weights: Option<&[f64]>, warnings: &mut Vec<String>) -> Result<DirichletParams> {
    match dirichlet_mle_from_log_means(bank.mean_log_coords(weights)?) {
        Err(Error::DirichletMleNotConverged { iterations, last }) => {
            warnings.push(format!("alpha update did not converge in {iterations} iterations"));
            Ok(*last)
        }
        other => other,
    }
}

/// Importance weights for reusing a bank drawn at `(θ_ref, α_ref)` at the
/// iterate `(θ_k, α_k)`: normalized to sum to 1, with the effective sample
/// size `(Σw)² / Σw²`.
pub fn importance_weights(
    bank: &SampleBank,
    theta_k: &Theta,
    alpha_k: &DirichletParams,
    theta_ref: &Theta,
    alpha_ref: &DirichletParams,
    data: &Dataset,
) -> Result<(Vec<f64>, f64)> {
    let summary = DataSummary::new(data);
    let mut bank = bank.clone();
    log_importance(&mut bank, &summary, theta_k, alpha_k, theta_ref, alpha_ref).map(normalize_log_weights)
}

fn log_importance(
    bank: &mut SampleBank,
    summary: &DataSummary,
    theta_k: &Theta,
    alpha_k: &DirichletParams,
    theta_ref: &Theta,
    alpha_ref: &DirichletParams,
) -> Result<Vec<f64>> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let ll_k = bank.ensure_cached(theta_k, summary)?.to_vec();
    let ll_ref = bank.ensure_cached(theta_ref, summary)?.to_vec();
    let (bk, br) = (alpha_k.log_beta(), alpha_ref.log_beta());
    Ok(bank
        .samples()
        .iter()
        .zip(ll_k.iter().zip(&ll_ref))
        .map(|(z, (a, b))| {
            let prior = if alpha_k == alpha_ref {
                0.0
            } else {
                log_density_with_norm(alpha_k.as_array(), bk, z) - log_density_with_norm(alpha_ref.as_array(), br, z)
            };
            if theta_k == theta_ref {
                prior
            } else {
                a - b + prior
            }
        })
        .collect())
}

fn normalize_log_weights(log_w: Vec<f64>) -> (Vec<f64>, f64) {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    let w: Vec<f64> = w.into_iter().map(|v| v / s).collect();
    let ess = 1.0 / w.iter().map(|v| v * v).sum::<f64>();
    (w, ess)
}

fn max_relative_change(old: &Theta, new: &Theta, mask: [bool; 6]) -> f64 {
    old.to_array()
        .iter()
        .zip(new.to_array())
        .zip(mask)
        .filter(|(_, free)| *free)
        .map(|((a, b), _)| ((b - a) / a).abs())
        .fold(0.0, f64::max)
}

/// Plain MCEM: a fresh chain at every iteration.
pub fn fit<R: Rng + ?Sized>(data: &Dataset, config: &EmConfig, variant: ModelVariant, rng: &mut R) -> Result<FitResult> {
    run_em(data, config, variant, rng, false)
}

/// MCEM with importance reweighting of a reference bank after
/// `is_switch_iter`; a fresh reference is drawn whenever the effective
/// sample size falls below `is_weight_ess_floor · mc_samples`.
pub fn fit_importance<R: Rng + ?Sized>(
    data: &Dataset,
    config: &EmConfig,
    variant: ModelVariant,
    rng: &mut R,
) -> Result<FitResult> {
    run_em(data, config, variant, rng, true)
}

fn run_em<R: Rng + ?Sized>(
    data: &Dataset,
    config: &EmConfig,
    variant: ModelVariant,
    rng: &mut R,
    importance: bool,
) -> Result<FitResult> {
    config.validate()?;
    let (mut theta, mut alpha) = init_psi(data, variant)?;
    let summary = DataSummary::new(data);
    let chain_cfg = config.chain_config();
    let mask = variant.free_mask();

    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut streak = 0;
    let mut converged = false;
    // Reference bank and the iterate it was drawn at.
    let mut reference: Option<(SampleBank, Theta, DirichletParams)> = None;
    let mut weights: Option<Vec<f64>> = None;

    for k in 1..=config.max_iter {
        let reweight = importance && k > config.is_switch_iter;
        let mut ess = None;
        let mut acceptance_rate = f64::NAN;
        let fresh = |theta: &Theta, alpha: &DirichletParams, warnings: &mut Vec<String>, rng: &mut R| {
            let chain = run_chain_compiled(theta, alpha, &summary, &chain_cfg, None, rng)
                .map_err(|e| abort(k, e, &trace))?;
            warnings.extend(chain.warnings.iter().map(|w| format!("iteration {k}: {w}")));
            Ok::<_, Error>((chain.bank, chain.acceptance_rate))
        };
        if reweight {
            let (mut bank, t_ref, a_ref) = reference.take().expect("reference bank exists after switch");
            let log_w = log_importance(&mut bank, &summary, &theta, &alpha, &t_ref, &a_ref).map_err(|e| abort(k, e, &trace))?;
            let (w, e) = normalize_log_weights(log_w);
            if e / (bank.len() as f64) < config.is_weight_ess_floor {
                let (b, acc) = fresh(&theta, &alpha, &mut warnings, rng)?;
                acceptance_rate = acc;
                reference = Some((b, theta, alpha));
                weights = None;
            } else {
                ess = Some(e);
                reference = Some((bank, t_ref, a_ref));
                weights = Some(w);
            }
        } else {
            let (b, acc) = fresh(&theta, &alpha, &mut warnings, rng)?;
            acceptance_rate = acc;
            reference = Some((b, theta, alpha));
            weights = None;
        }
        let bank = &reference.as_ref().expect("bank drawn this iteration").0;
        let w = weights.as_deref();

        let (new_theta, w_theta) =
            m_step_theta_weighted(&summary, bank.samples(), w, &theta, variant, &config.optimizer)
                .map_err(|e| abort(k, e, &trace))?;
        warnings.extend(w_theta.into_iter().map(|m| format!("iteration {k}: {m}")));
        let new_alpha = m_step_alpha_weighted(bank, w, &mut warnings).map_err(|e| abort(k, e, &trace))?;

        let ll = bank.evaluate(&new_theta, &summary).map_err(|e| abort(k, e, &trace))?;
        let q_value = weighted_mean(&ll, w)
            + weighted_alpha_term(&new_alpha, bank.samples(), w).map_err(|e| abort(k, e, &trace))?;
        trace.push(IterationRecord {
            theta: new_theta,
            alpha: new_alpha,
            q_value,
            ess,
            acceptance_rate,
        });

        let change = max_relative_change(&theta, &new_theta, mask);
        streak = if change < config.rel_tol { streak + 1 } else { 0 };
        theta = new_theta;
        alpha = new_alpha;
        if streak >= 2 && k >= config.min_iter {
            converged = true;
            break;
        }
    }

    let (mut final_bank, _, _) = reference.expect("at least one iteration ran");
    final_bank.ensure_cached(&theta, &summary)?;
    if !converged {
        warnings.push(format!("EM did not converge within {} iterations", config.max_iter));
    }
    Ok(FitResult {
        theta_hat: theta,
        alpha_hat: alpha,
        variant,
        final_bank,
        final_weights: weights,
        n_iter: trace.len(),
        trace,
        converged,
        warnings,
        data_fingerprint: data.fingerprint(),
        ds_only: data.is_ds_only(),
    })
}

fn abort(iteration: usize, cause: Error, trace: &[IterationRecord]) -> Error {
    Error::FitAborted {
        iteration,
        cause: Box::new(cause),
        trace: trace.to_vec(),
    }
}
