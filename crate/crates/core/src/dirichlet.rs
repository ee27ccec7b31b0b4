//! Dirichlet machinery on the 9 mating-type coordinates: density, sampling,
//! the scaled-Dirichlet law of a coordinate pair given the rest, and the
//! maximum-likelihood estimate of α from mean log coordinates.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::genetics::SimplexPoint;
use crate::special::{digamma, inv_digamma, ln_gamma, trigamma};

/// Concentration vector α, indexed like [`SimplexPoint`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DirichletParams([f64; 9]);

impl DirichletParams {
    pub fn new(alpha: [f64; 9]) -> Result<Self> {
        if alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Domain(format!("concentration must be positive and finite: {alpha:?}")));
        }
        Ok(DirichletParams(alpha))
    }

    pub fn ones() -> Self {
        DirichletParams([1.0; 9])
    }

    pub fn as_array(&self) -> &[f64; 9] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `α / Σα`.
    pub fn mean(&self) -> [f64; 9] {
        let s = self.sum();
        self.0.map(|a| a / s)
    }

    /// `log B(α) = Σ log Γ(α_i) − log Γ(Σ α_i)`.
    pub fn log_beta(&self) -> f64 {
        log_beta(&self.0)
    }
}

pub(crate) fn log_beta(alpha: &[f64]) -> f64 {
    let s: f64 = alpha.iter().sum();
    alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(s)
}

/// Dirichlet log-density for any dimension; `z` must be strictly interior.
pub fn log_density_slice(alpha: &[f64], z: &[f64]) -> Result<f64> {
    debug_assert_eq!(alpha.len(), z.len());
    if z.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("Dirichlet density needs an interior point".into()));
    }
    let kernel: f64 = alpha.iter().zip(z).map(|(&a, &v)| (a - 1.0) * v.ln()).sum();
    Ok(kernel - log_beta(alpha))
}

pub fn dirichlet_log_density(alpha: &DirichletParams, z: &SimplexPoint) -> Result<f64> {
    log_density_slice(&alpha.0, z.as_array())
}

/// Log-density with `log B(α)` supplied, for hot loops over many points.
#[inline]
pub(crate) fn log_density_with_norm(alpha: &[f64; 9], log_b: f64, z: &SimplexPoint) -> f64 {
    let mut k = 0.0;
    for (a, v) in alpha.iter().zip(z.as_array()) {
        k += (a - 1.0) * v.ln();
    }
    k - log_b
}

pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &DirichletParams, rng: &mut R) -> SimplexPoint {
    let gammas: Vec<Gamma<f64>> = alpha
        .0
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape"))
        .collect();
    loop {
        let mut x = [0.0; 9];
        for (xi, g) in x.iter_mut().zip(&gammas) {
            *xi = g.sample(rng);
        }
        let s: f64 = x.iter().sum();
        if s > 0.0 && s.is_finite() {
            let z = x.map(|v| v / s);
            // Tiny shapes can underflow a coordinate to zero; redraw.
            if z.iter().all(|&v| v > 0.0) {
                return SimplexPoint::from_raw(z);
            }
        }
    }
}

/// Two distinct coordinate indices in `0..9`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordPair(usize, usize);

impl CoordPair {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j || i >= 9 || j >= 9 {
            return Err(Error::Domain(format!("invalid coordinate pair ({i}, {j})")));
        }
        Ok(CoordPair(i, j))
    }

    pub fn first(self) -> usize {
        self.0
    }

    pub fn second(self) -> usize {
        self.1
    }
}

fn residual_mass(pair: CoordPair, z: &[f64; 9]) -> Result<f64> {
    let rest: f64 = z
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != pair.0 && *k != pair.1)
        .map(|(_, v)| v)
        .sum();
    let s = 1.0 - rest;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("residual mass {s} is not positive")));
    }
    Ok(s)
}

/// Log-density of `(z_i, z_j)` given the other seven coordinates.
///
/// With residual mass `s = 1 − Σ_rest z`, `z_i / s ~ Beta(α_i, α_j)` and the
/// density on the segment `z_i + z_j = s` (parameterized by `z_i`) carries a
/// Jacobian `1 / s`.
pub fn conditional_pair_log_density(alpha: &DirichletParams, pair: CoordPair, z: &SimplexPoint) -> Result<f64> {
    let zz = z.as_array();
    let s = residual_mass(pair, zz)?;
    let (a, b) = (alpha.0[pair.0], alpha.0[pair.1]);
    let (u, v) = (zz[pair.0] / s, zz[pair.1] / s);
    if !(u > 0.0 && v > 0.0) {
        return Err(Error::Domain("pair coordinates must be interior".into()));
    }
    Ok(ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * u.ln() + (b - 1.0) * v.ln() - s.ln())
}

/// Redraws coordinates `(i, j)` from their conditional law, leaving the rest
/// untouched.
pub fn sample_pair_given_rest<R: Rng + ?Sized>(
    alpha: &DirichletParams,
    pair: CoordPair,
    z: &SimplexPoint,
    rng: &mut R,
) -> Result<SimplexPoint> {
    let beta = Beta::new(alpha.0[pair.0], alpha.0[pair.1])
        .map_err(|e| Error::Domain(format!("beta proposal: {e}")))?;
    residual_mass(pair, z.as_array())?;
    Ok(redraw_pair(&beta, pair, z, rng))
}

/// Proposal step with a prebuilt `Beta(α_i, α_j)`.
#[inline]
pub(crate) fn redraw_pair<R: Rng + ?Sized>(
    beta: &Beta<f64>,
    pair: CoordPair,
    z: &SimplexPoint,
    rng: &mut R,
) -> SimplexPoint {
    let mut out = *z.as_array();
    let s = out[pair.0] + out[pair.1];
    loop {
        let u: f64 = beta.sample(rng);
        let zi = s * u;
        let zj = s - zi;
        if zi > 0.0 && zj > 0.0 {
            out[pair.0] = zi;
            out[pair.1] = zj;
            return SimplexPoint::from_raw(out);
        }
    }
}

const MLE_MAX_ITER: usize = 1000;
const MLE_GRAD_TOL: f64 = 1e-8;
const MLE_DIVERGENCE: f64 = 1e12;

fn mle_objective(alpha: &[f64; 9], mean_log: &[f64; 9]) -> f64 {
    let kernel: f64 = alpha.iter().zip(mean_log).map(|(a, s)| (a - 1.0) * s).sum();
    kernel - log_beta(alpha)
}

fn mle_gradient(alpha: &[f64; 9], mean_log: &[f64; 9]) -> [f64; 9] {
    let psi_sum = digamma(alpha.iter().sum());
    let mut g = [0.0; 9];
    for k in 0..9 {
        g[k] = psi_sum - digamma(alpha[k]) + mean_log[k];
    }
    g
}

/// Maximum-likelihood α given `E[log z_k]` for each coordinate.
///
/// Newton iterations with the diagonal-plus-rank-one Hessian, started from a
/// moment-style precision guess; a step that leaves the positive orthant or
/// fails to increase the objective is halved, and as a last resort replaced
/// by one fixed-point update `α_k ← ψ⁻¹(ψ(Σα) + s_k)`.
pub fn dirichlet_mle_from_log_means(mean_log: [f64; 9]) -> Result<DirichletParams> {
    if mean_log.iter().any(|&s| !(s < 0.0 && s.is_finite())) {
        return Err(Error::Domain(format!("mean log coordinates must be finite and negative: {mean_log:?}")));
    }
    let total: f64 = mean_log.iter().map(|s| s.exp()).sum();
    // Jensen: Σ exp(E log z) < Σ E z = 1 unless the samples have no spread.
    if total >= 1.0 - 1e-14 {
        return Err(Error::DirichletMleDiverged);
    }
    let precision = (9.0 - 1.0) / (-2.0 * total.ln());
    let mut alpha = mean_log.map(|s| precision * s.exp() / total);

    let mut f = mle_objective(&alpha, &mean_log);
    let mut polished = false;
    for _ in 0..MLE_MAX_ITER {
        let g = mle_gradient(&alpha, &mean_log);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < MLE_GRAD_TOL {
            // One extra Newton step once inside the tolerance.
            if polished {
                return Ok(DirichletParams(alpha));
            }
            polished = true;
        }
        let sum: f64 = alpha.iter().sum();
        if sum > MLE_DIVERGENCE {
            return Err(Error::DirichletMleDiverged);
        }
        // H = diag(q) + z 11ᵀ with q_k = −ψ₁(α_k), z = ψ₁(Σα).
        let z = trigamma(sum);
        let q = alpha.map(|a| -trigamma(a));
        let num: f64 = g.iter().zip(&q).map(|(gk, qk)| gk / qk).sum();
        let den: f64 = 1.0 / z + q.iter().map(|qk| 1.0 / qk).sum::<f64>();
        let b = num / den;
        let step: [f64; 9] = std::array::from_fn(|k| (g[k] - b) / q[k]);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: [f64; 9] = std::array::from_fn(|k| alpha[k] - t * step[k]);
            if cand.iter().all(|&a| a > 0.0) {
                let fc = mle_objective(&cand, &mean_log);
                if fc >= f - 1e-12 * f.abs().max(1.0) {
                    alpha = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            let psi_sum = digamma(alpha.iter().sum());
            alpha = mean_log.map(|s| inv_digamma(psi_sum + s));
            f = mle_objective(&alpha, &mean_log);
        }
    }
    Err(Error::DirichletMleNotConverged {
        iterations: MLE_MAX_ITER,
        last: Box::new(DirichletParams(alpha)),
    })
}
