//! Flat key=value config files for `oakit verify`. Lines are
//! `key = value`; `#` starts a comment; unknown keys are rejected.

use anyhow::{bail, Context, Result};
use oakit::harness::{default_tolerances, ExperimentConfig};

const TOLERANCE_KEYS: [&str; 8] = [
    "ratio_tol",
    "monotone_slack",
    "ks_tol",
    "skew_tol",
    "kurt_tol",
    "coverage_tol",
    "bootstrap_level",
    "bootstrap_b",
];

/// Parses a config file into (experiment kind, experiment config).
/// Required keys: `integrand`, `q_list`, `replicates`. Everything else
/// has defaults.
pub fn parse_config(text: &str) -> Result<(String, ExperimentConfig)> {
    let mut experiment = "variance".to_string();
    let mut integrand: Option<String> = None;
    let mut d = 3usize;
    let mut q_list: Option<Vec<u32>> = None;
    let mut designs = vec!["oas".to_string(), "oalh".to_string(), "oalh_tang".to_string()];
    let mut replicates: Option<usize> = None;
    let mut master_seed = 0u64;
    let mut normality_alpha = 0.01f64;
    let mut quadrature_m = 128usize;
    let mut tolerances = default_tolerances();

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let parse_err = || format!("line {}: bad value for {key}: {value:?}", lineno + 1);
        match key {
            "experiment" => {
                if !["variance", "clt", "both"].contains(&value) {
                    bail!("line {}: experiment must be variance, clt, or both", lineno + 1);
                }
                experiment = value.to_string();
            }
            "integrand" => integrand = Some(value.to_string()),
            "d" => d = value.parse().with_context(parse_err)?,
            "q_list" => {
                let qs: Result<Vec<u32>, _> =
                    value.split(',').map(|s| s.trim().parse()).collect();
                q_list = Some(qs.with_context(parse_err)?);
            }
            "designs" => {
                designs = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "replicates" => replicates = Some(value.parse().with_context(parse_err)?),
            "master_seed" => master_seed = value.parse().with_context(parse_err)?,
            "normality_alpha" => normality_alpha = value.parse().with_context(parse_err)?,
            "quadrature_m" => quadrature_m = value.parse().with_context(parse_err)?,
            k if TOLERANCE_KEYS.contains(&k) => {
                tolerances.insert(k.to_string(), value.parse().with_context(parse_err)?);
            }
            other => bail!("line {}: unknown key {other:?}", lineno + 1),
        }
    }

    let integrand = integrand.context("config is missing `integrand`")?;
    let q_list = q_list.context("config is missing `q_list`")?;
    let replicates = replicates.context("config is missing `replicates`")?;

    Ok((
        experiment,
        ExperimentConfig {
            integrand_id: integrand,
            d,
            q_list,
            designs,
            replicates,
            master_seed,
            normality_alpha,
            quadrature_m,
            tolerances,
        },
    ))
}
