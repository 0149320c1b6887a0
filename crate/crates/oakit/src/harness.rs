//! Replicated Monte Carlo experiments: the variance sweep that tracks
//! q^2 Var against the remainder norm, and the normality experiment for
//! the standardized estimators. Reports are plain data with stable field
//! names and reproduce byte for byte from the same config.

use crate::anova::decompose;
use crate::error::{Error, Result};
use crate::estimators::{estimate, standardize};
use crate::integrand::Integrand;
use crate::oa::{construct_bose_oa, is_prime, OrthogonalArray};
use crate::randomize::{expand_to_latin, randomize_symbols, tang_randomize};
use crate::sampler::{
    sample_lhs, sample_oalh, sample_oalh_tang, sample_oas, sample_srs, Design,
};
use crate::seed::SeedSpec;
use crate::stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const Z_975: f64 = 1.959963984540054;

/// Experiment parameters. `tolerances` carries every named threshold a
/// verdict may reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub integrand_id: String,
    pub d: usize,
    pub q_list: Vec<u32>,
    pub designs: Vec<String>,
    pub replicates: usize,
    pub master_seed: u64,
    pub normality_alpha: f64,
    pub quadrature_m: usize,
    pub tolerances: BTreeMap<String, f64>,
}

pub fn default_tolerances() -> BTreeMap<String, f64> {
    let mut t = BTreeMap::new();
    t.insert("ratio_tol".into(), 0.15);
    t.insert("monotone_slack".into(), 0.0);
    t.insert("ks_tol".into(), 0.05);
    t.insert("skew_tol".into(), 0.2);
    t.insert("kurt_tol".into(), 0.5);
    t.insert("coverage_tol".into(), 0.02);
    t.insert("bootstrap_level".into(), 0.95);
    t.insert("bootstrap_b".into(), 2000.0);
    t
}

impl ExperimentConfig {
    pub fn new(integrand_id: &str, d: usize, q_list: &[u32], replicates: usize) -> Self {
        ExperimentConfig {
            integrand_id: integrand_id.to_string(),
            d,
            q_list: q_list.to_vec(),
            designs: vec!["oas".into(), "oalh".into(), "oalh_tang".into()],
            replicates,
            master_seed: 0,
            normality_alpha: 0.01,
            quadrature_m: 128,
            tolerances: default_tolerances(),
        }
    }

    pub fn with_designs(mut self, designs: &[Design]) -> Self {
        self.designs = designs.iter().map(|d| d.as_str().to_string()).collect();
        self
    }

    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .unwrap_or_else(|| default_tolerances()[name])
    }

    pub fn parsed_designs(&self) -> Result<Vec<Design>> {
        self.designs.iter().map(|s| Design::parse(s)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::InsufficientReplicates {
                got: self.replicates,
                min: 100,
            });
        }
        if self.d < 3 {
            return Err(Error::DimensionTooSmall { d: self.d, min: 3 });
        }
        if self.d > 4 {
            return Err(Error::DimensionTooLarge { d: self.d, max: 4 });
        }
        if self.q_list.is_empty() {
            return Err(Error::Parse("q_list is empty".into()));
        }
        for &q in &self.q_list {
            if !is_prime(q) {
                return Err(Error::NonPrimeQ(q));
            }
            if self.d > q as usize + 1 {
                return Err(Error::DimensionTooLarge {
                    d: self.d,
                    max: q as usize + 1,
                });
            }
        }
        if self.designs.is_empty() {
            return Err(Error::Parse("designs is empty".into()));
        }
        self.parsed_designs()?;
        if !(self.normality_alpha > 0.0 && self.normality_alpha < 1.0) {
            return Err(Error::Parse(format!(
                "normality_alpha {} not in (0,1)",
                self.normality_alpha
            )));
        }
        if self.quadrature_m < 2 {
            return Err(Error::TooFewValues {
                context: "quadrature grid",
                got: self.quadrature_m,
                need: 2,
            });
        }
        Ok(())
    }
}

/// Statistics of one (design, q) row of the sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignRow {
    pub design: String,
    pub q: u32,
    pub mean: f64,
    pub variance: f64,
    pub q2_variance: f64,
    pub ratio_to_frem: Option<f64>,
    pub ks: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ci95_coverage: f64,
}

/// Pass/fail record; `tolerance` names the config entry the bound came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub tolerance: String,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub master_seed: u64,
    pub replicates: usize,
    pub key_schema: String,
    pub design_stream_extras: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub integrand: String,
    pub d: usize,
    pub mu_reference: f64,
    pub mu_source: String,
    pub frem_l2: f64,
    pub ks_alpha_bound: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub rows: Vec<DesignRow>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub seeds: SeedProvenance,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn row(&self, design: Design, q: u32) -> Option<&DesignRow> {
        self.rows
            .iter()
            .find(|r| r.design == design.as_str() && r.q == q)
    }
}

fn design_stream_extra(design: Design) -> u64 {
    match design {
        Design::Oas => 1,
        Design::Oalh => 2,
        Design::OalhTang => 3,
        Design::Srs => 4,
        Design::Lhs => 5,
    }
}

/// One replicate of the full pipeline for a design at a given q.
fn replicate_estimate(
    f: &Integrand,
    base: &OrthogonalArray,
    design: Design,
    master_seed: u64,
    rep: u64,
) -> Result<f64> {
    let seed = SeedSpec::for_replicate(master_seed, rep).with_extra(design_stream_extra(design));
    let sample = match design {
        Design::Oas => {
            let a_star = randomize_symbols(base, &seed)?;
            sample_oas(&a_star, &seed)?
        }
        Design::Oalh => {
            let a_dd = expand_to_latin(&randomize_symbols(base, &seed)?, &seed)?;
            sample_oalh(&a_dd, &seed)?
        }
        Design::OalhTang => {
            let a_dd = expand_to_latin(&randomize_symbols(base, &seed)?, &seed)?;
            sample_oalh_tang(&tang_randomize(&a_dd, &seed)?, &seed)?
        }
        Design::Srs => sample_srs(base.n(), f.dim(), &seed)?,
        Design::Lhs => sample_lhs(base.n(), f.dim(), &seed)?,
    };
    Ok(estimate(f, &sample)?.value)
}

/// All replicate estimates for one (design, q), generated in parallel and
/// collected in replicate order.
pub fn replicate_estimates(
    f: &Integrand,
    design: Design,
    q: u32,
    d: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    let base = construct_bose_oa(q, d)?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|rep| replicate_estimate(f, &base, design, master_seed, rep))
        .collect()
}

/// Replicate estimates for every (design, q) the config names, plus the
/// quadrature references. Shared by both experiment kinds.
pub struct SweepData {
    pub mu: f64,
    pub mu_source: String,
    pub frem_l2: f64,
    pub values: Vec<(Design, u32, Vec<f64>)>,
}

pub fn collect_sweep(cfg: &ExperimentConfig) -> Result<SweepData> {
    cfg.validate()?;
    let f = Integrand::by_id(&cfg.integrand_id, cfg.d)?;
    let dec = decompose(&f, cfg.quadrature_m)?;
    let (mu, mu_source) = match f.known_mu() {
        Some(mu) => (mu, "known".to_string()),
        None => (dec.mu(), "quadrature".to_string()),
    };
    let designs = cfg.parsed_designs()?;
    let mut values = Vec::new();
    for &design in &designs {
        for &q in &cfg.q_list {
            let vals = replicate_estimates(
                &f,
                design,
                q,
                cfg.d,
                cfg.replicates,
                cfg.master_seed,
            )?;
            values.push((design, q, vals));
        }
    }
    Ok(SweepData {
        mu,
        mu_source,
        frem_l2: dec.frem_l2(),
        values,
    })
}

fn build_rows(data: &SweepData) -> Result<Vec<DesignRow>> {
    let mut rows = Vec::with_capacity(data.values.len());
    for (design, q, vals) in &data.values {
        let mean = stats::mean(vals);
        let variance = stats::sample_variance(vals)?;
        let n = (*q as f64) * (*q as f64);
        let q2_variance = n * variance;
        let ratio_to_frem = if data.frem_l2 > 1e-12 {
            Some(q2_variance / data.frem_l2)
        } else {
            None
        };
        let ws = standardize(vals, data.mu)?;
        let mut w_vals: Vec<f64> = ws.iter().map(|w| w.w).collect();
        let coverage =
            w_vals.iter().filter(|w| w.abs() <= Z_975).count() as f64 / w_vals.len() as f64;
        w_vals.sort_by(|a, b| a.total_cmp(b));
        rows.push(DesignRow {
            design: design.as_str().to_string(),
            q: *q,
            mean,
            variance,
            q2_variance,
            ratio_to_frem,
            ks: stats::ks_statistic(&w_vals),
            skewness: stats::skewness(vals),
            excess_kurtosis: stats::excess_kurtosis(vals),
            ci95_coverage: coverage,
        });
    }
    Ok(rows)
}

fn report_skeleton(
    cfg: &ExperimentConfig,
    data: &SweepData,
    experiment: &str,
    rows: Vec<DesignRow>,
) -> ExperimentReport {
    let designs = cfg.parsed_designs().expect("validated");
    let design_stream_extras = designs
        .iter()
        .map(|&d| (d.as_str().to_string(), design_stream_extra(d)))
        .collect();
    ExperimentReport {
        experiment: experiment.to_string(),
        integrand: cfg.integrand_id.clone(),
        d: cfg.d,
        mu_reference: data.mu,
        mu_source: data.mu_source.clone(),
        frem_l2: data.frem_l2,
        ks_alpha_bound: stats::kolmogorov_critical(cfg.replicates, cfg.normality_alpha),
        tolerances: cfg.tolerances.clone(),
        rows,
        verdicts: BTreeMap::new(),
        seeds: SeedProvenance {
            master_seed: cfg.master_seed,
            replicates: cfg.replicates,
            key_schema: "seed=<u64>;rep=<i>;col=<j>;role=<name>[;sym=<k>];extra=<e>".into(),
            design_stream_extras,
        },
    }
}

fn values_for(data: &SweepData, design: Design, q: u32) -> Option<&[f64]> {
    data.values
        .iter()
        .find(|(d, qq, _)| *d == design && *qq == q)
        .map(|(_, _, v)| v.as_slice())
}

/// Variance sweep: per design, checks that q^2 Var converges onto the
/// remainder norm, that the approach is monotone over q_list, and (when
/// the relevant designs are present) the bootstrap comparisons between
/// plain arrays, Latin hypercubes, and the Tang variant.
pub fn run_variance_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = collect_sweep(cfg)?;
    variance_report(cfg, &data)
}

pub fn variance_report(cfg: &ExperimentConfig, data: &SweepData) -> Result<ExperimentReport> {
    let rows = build_rows(data)?;
    let mut report = report_skeleton(cfg, data, "variance", rows);
    let designs = cfg.parsed_designs()?;
    let max_q = *cfg.q_list.iter().max().expect("non-empty");
    let f = Integrand::by_id(&cfg.integrand_id, cfg.d)?;

    let ratio_tol = cfg.tolerance("ratio_tol");
    let slack = cfg.tolerance("monotone_slack");
    let oa_designs = [Design::Oas, Design::Oalh, Design::OalhTang];
    for &design in designs.iter().filter(|d| oa_designs.contains(d)) {
        if data.frem_l2 <= 1e-12 {
            continue;
        }
        let mut qs = cfg.q_list.clone();
        qs.sort_unstable();
        let ratios: Vec<f64> = qs
            .iter()
            .map(|&q| {
                report
                    .row(design, q)
                    .and_then(|r| r.ratio_to_frem)
                    .expect("ratio present when frem_l2 > 0")
            })
            .collect();
        let last = ratios.last().copied().expect("non-empty");
        report.verdicts.insert(
            format!("converges_to_frem_{design}"),
            Verdict {
                pass: (last - 1.0).abs() <= ratio_tol,
                tolerance: "ratio_tol".into(),
                observed: (last - 1.0).abs(),
                bound: ratio_tol,
            },
        );
        if ratios.len() >= 2 {
            let mut worst = f64::NEG_INFINITY;
            for w in ratios.windows(2) {
                worst = worst.max((w[1] - 1.0).abs() - (w[0] - 1.0).abs());
            }
            report.verdicts.insert(
                format!("ratio_monotone_{design}"),
                Verdict {
                    pass: worst <= slack,
                    tolerance: "monotone_slack".into(),
                    observed: worst,
                    bound: slack,
                },
            );
        }
    }

    let level = cfg.tolerance("bootstrap_level");
    let b = cfg.tolerance("bootstrap_b") as usize;
    let boot_seed = SeedSpec::new(cfg.master_seed).with_extra(0xB00);

    // Plain arrays and Latin hypercubes should be statistically
    // indistinguishable in q^2-scaled variance at the largest q.
    if let (Some(oas), Some(oalh)) = (
        values_for(data, Design::Oas, max_q),
        values_for(data, Design::Oalh, max_q),
    ) {
        let scale = (max_q as f64) * (max_q as f64);
        let (lo, hi) = stats::bootstrap_diff_ci(
            oas,
            oalh,
            |v| scale * stats::sample_variance(v).unwrap(),
            level,
            b,
            &boot_seed,
        )?;
        report.verdicts.insert(
            "variance_match_oas_oalh".into(),
            Verdict {
                pass: lo <= 0.0 && 0.0 <= hi,
                tolerance: "bootstrap_level".into(),
                observed: lo.max(-hi),
                bound: 0.0,
            },
        );
    }

    // Tang's ordering for additive integrands: Var(tang) <= Var(oas).
    if f.is_additive() {
        if let (Some(tang), Some(oas)) = (
            values_for(data, Design::OalhTang, max_q),
            values_for(data, Design::Oas, max_q),
        ) {
            let upper = stats::bootstrap_diff_upper(
                tang,
                oas,
                |v| stats::sample_variance(v).unwrap(),
                level,
                b,
                &boot_seed.with_extra(0xB01),
            )?;
            report.verdicts.insert(
                "tang_additive_ordering".into(),
                Verdict {
                    pass: upper <= 0.0,
                    tolerance: "bootstrap_level".into(),
                    observed: upper,
                    bound: 0.0,
                },
            );
        }
    }

    Ok(report)
}

/// Normality experiment: standardizes the replicate estimates at the
/// largest q and checks KS distance, skewness, excess kurtosis, and the
/// coverage of the nominal 95% interval.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = collect_sweep(cfg)?;
    clt_report(cfg, &data)
}

pub fn clt_report(cfg: &ExperimentConfig, data: &SweepData) -> Result<ExperimentReport> {
    let rows = build_rows(data)?;
    let mut report = report_skeleton(cfg, data, "clt", rows);
    let max_q = *cfg.q_list.iter().max().expect("non-empty");
    let ks_tol = cfg.tolerance("ks_tol");
    let skew_tol = cfg.tolerance("skew_tol");
    let kurt_tol = cfg.tolerance("kurt_tol");
    let coverage_tol = cfg.tolerance("coverage_tol");

    for &design in &cfg.parsed_designs()? {
        let row = match report.row(design, max_q) {
            Some(r) => r.clone(),
            None => continue,
        };
        report.verdicts.insert(
            format!("normal_ks_{design}"),
            Verdict {
                pass: row.ks <= ks_tol,
                tolerance: "ks_tol".into(),
                observed: row.ks,
                bound: ks_tol,
            },
        );
        report.verdicts.insert(
            format!("normal_skew_{design}"),
            Verdict {
                pass: row.skewness.abs() <= skew_tol,
                tolerance: "skew_tol".into(),
                observed: row.skewness.abs(),
                bound: skew_tol,
            },
        );
        report.verdicts.insert(
            format!("normal_kurt_{design}"),
            Verdict {
                pass: row.excess_kurtosis.abs() <= kurt_tol,
                tolerance: "kurt_tol".into(),
                observed: row.excess_kurtosis.abs(),
                bound: kurt_tol,
            },
        );
        report.verdicts.insert(
            format!("normal_{design}"),
            Verdict {
                pass: row.ks <= ks_tol
                    && row.skewness.abs() <= skew_tol
                    && row.excess_kurtosis.abs() <= kurt_tol,
                tolerance: "ks_tol".into(),
                observed: row.ks,
                bound: ks_tol,
            },
        );
        report.verdicts.insert(
            format!("coverage_{design}"),
            Verdict {
                pass: (row.ci95_coverage - 0.95).abs() <= coverage_tol,
                tolerance: "coverage_tol".into(),
                observed: (row.ci95_coverage - 0.95).abs(),
                bound: coverage_tol,
            },
        );
    }
    Ok(report)
}
