//! Likelihood-ratio tests for association, imprinting and maternal effects.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::genetics::{DataSummary, Dataset};
use crate::mcem::{FitResult, ModelVariant};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Association,
    Imprinting,
    Maternal,
}

impl Effect {
    pub const ALL: [Effect; 3] = [Effect::Association, Effect::Imprinting, Effect::Maternal];

    pub fn name(self) -> &'static str {
        match self {
            Effect::Association => "association",
            Effect::Imprinting => "imprinting",
            Effect::Maternal => "maternal",
        }
    }

    pub fn reduced_variant(self) -> ModelVariant {
        match self {
            Effect::Association => ModelVariant::Null,
            Effect::Imprinting => ModelVariant::NoImprinting,
            Effect::Maternal => ModelVariant::NoMaternal,
        }
    }

    /// Degrees of freedom. Without additional siblings δ is not identified
    /// under the Null, so association loses one fewer parameter.
    pub fn df(self, ds_only: bool) -> u32 {
        match self {
            Effect::Association if ds_only => 6,
            Effect::Association => 5,
            Effect::Imprinting => 1,
            Effect::Maternal => 2,
        }
    }
}

impl std::fmt::Display for Effect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which posterior draws the reduced-model log-likelihood is averaged over.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum BankSource {
    /// Both terms on the Full fit's final bank.
    #[default]
    SharedFull,
    /// Each term on its own fit's final bank.
    OwnPosterior,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    /// The statistic before flooring at 0.
    pub raw_statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub effect: Effect,
    pub variant_pair: (ModelVariant, ModelVariant),
    pub warnings: Vec<String>,
}

/// Upper tail of the chi-square law with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    assert!(df > 0, "chi-square needs positive degrees of freedom");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

fn bank_mean(fit: &FitResult, theta: &crate::Theta, summary: &DataSummary) -> Result<f64> {
    let values = match fit.final_bank.cached(theta) {
        Some(v) => v.to_vec(),
        None => fit.final_bank.evaluate(theta, summary)?,
    };
    if values.is_empty() {
        return Err(Error::EmptyBank);
    }
    Ok(match &fit.final_weights {
        None => values.iter().sum::<f64>() / values.len() as f64,
        Some(w) => values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / w.iter().sum::<f64>(),
    })
}

/// `T = mean_t 2[log P(Y | Z_t; θ̂_full) − log P(Y | Z_t; θ̂_reduced)]`
/// on the Full fit's final bank, floored at 0.
pub fn lrt(full: &FitResult, reduced: &FitResult, effect: Effect, data: &Dataset) -> Result<TestResult> {
    lrt_with(full, reduced, effect, data, BankSource::SharedFull)
}

pub fn lrt_with(
    full: &FitResult,
    reduced: &FitResult,
    effect: Effect,
    data: &Dataset,
    source: BankSource,
) -> Result<TestResult> {
    if full.variant != ModelVariant::Full {
        return Err(Error::VariantMismatch {
            expected: ModelVariant::Full.name(),
            found: full.variant.name(),
        });
    }
    let expected = effect.reduced_variant();
    if reduced.variant != expected {
        return Err(Error::VariantMismatch {
            expected: expected.name(),
            found: reduced.variant.name(),
        });
    }
    let fp = data.fingerprint();
    if full.data_fingerprint != fp || reduced.data_fingerprint != fp {
        return Err(Error::DatasetMismatch);
    }
    let summary = DataSummary::new(data);
    let l_full = bank_mean(full, &full.theta_hat, &summary)?;
    let l_red = match source {
        BankSource::SharedFull => bank_mean(full, &reduced.theta_hat, &summary)?,
        BankSource::OwnPosterior => bank_mean(reduced, &reduced.theta_hat, &summary)?,
    };
    let raw = 2.0 * (l_full - l_red);
    let mut warnings = Vec::new();
    let statistic = if raw < 0.0 {
        warnings.push(format!("negative {effect} statistic {raw:.6} floored at 0"));
        0.0
    } else {
        raw
    };
    let df = effect.df(data.is_ds_only());
    Ok(TestResult {
        statistic,
        raw_statistic: raw,
        df,
        p_value: chi2_sf(statistic, df),
        effect,
        variant_pair: (ModelVariant::Full, expected),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_tail_values() {
        for k in 1..10 {
            assert_eq!(chi2_sf(0.0, k), 1.0);
        }
        for x in [0.1, 1.0, 3.0, 10.0, 40.0] {
            assert!((chi2_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-14);
        }
        // 0.95 quantiles of chi-square with 1, 2, 5, 6 df.
        assert!((chi2_sf(3.841458820694124, 1) - 0.05).abs() < 1e-10);
        assert!((chi2_sf(5.991464547107979, 2) - 0.05).abs() < 1e-10);
        assert!((chi2_sf(11.070497693516351, 5) - 0.05).abs() < 1e-10);
        assert!((chi2_sf(12.591587243743977, 6) - 0.05).abs() < 1e-10);
    }

    #[test]
    fn chi2_tail_is_decreasing() {
        let mut last = 1.0;
        for i in 1..200 {
            let p = chi2_sf(i as f64 * 0.25, 5);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn df_rules() {
        assert_eq!(Effect::Association.df(true), 6);
        assert_eq!(Effect::Association.df(false), 5);
        assert_eq!(Effect::Imprinting.df(true), 1);
        assert_eq!(Effect::Maternal.df(false), 2);
    }
}
