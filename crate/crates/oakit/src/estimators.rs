//! Sample-mean estimators over unit samples, replicate variance, and
//! standardized statistics.

use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::sampler::{Design, UnitSample};
use crate::seed::SeedSpec;
use crate::stats;

/// One estimate with its provenance.
#[derive(Clone, Debug)]
pub struct EstimateRecord {
    pub value: f64,
    pub design: Design,
    pub q: u32,
    pub d: usize,
    pub seed: SeedSpec,
    pub integrand_id: String,
}

impl EstimateRecord {
    pub fn csv_header() -> &'static str {
        "design,q,d,integrand,seed,value"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e}",
            self.design,
            self.q,
            self.d,
            self.integrand_id,
            self.seed.canonical(),
            self.value
        )
    }
}

/// A centered, scaled estimate w = (value - mu) / sigma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WStatistic {
    pub w: f64,
    pub sigma_used: f64,
    pub mu_used: f64,
}

/// Arithmetic mean of f over the sample rows.
pub fn estimate(f: &Integrand, s: &UnitSample) -> Result<EstimateRecord> {
    if s.d() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: s.d(),
        });
    }
    let vals: Vec<f64> = s.rows().map(|r| f.eval(r)).collect();
    Ok(EstimateRecord {
        value: stats::mean(&vals),
        design: s.design(),
        q: s.q(),
        d: s.d(),
        seed: *s.seed(),
        integrand_id: f.id().to_string(),
    })
}

/// Unbiased sample variance of replicate estimates (divisor R - 1).
pub fn replicate_variance(values: &[f64]) -> Result<f64> {
    stats::sample_variance(values)
}

/// Standardizes replicate values against a given mean, with the scale
/// taken from the replicate sample standard deviation.
pub fn standardize(values: &[f64], mu: f64) -> Result<Vec<WStatistic>> {
    let sd = replicate_variance(values)?.sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok(values
        .iter()
        .map(|&v| WStatistic {
            w: (v - mu) / sd,
            sigma_used: sd,
            mu_used: mu,
        })
        .collect())
}
