//! `oakit`: construct orthogonal arrays, draw design samples, decompose
//! integrands, and run the variance / normality verification experiments.
//!
//! Every command writes its artifact plus a `<stem>.manifest.json` run
//! manifest; `oakit rerun --manifest <path>` replays the recorded command
//! and reproduces the artifact byte for byte.
//!
//! Exit codes: 0 success or verdict pass, 1 verdict fail, 2 usage or
//! config error.

mod config;
mod manifest;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use manifest::{CommandSpec, RunManifest};
use oakit::anova::decompose;
use oakit::harness::{clt_report, collect_sweep, variance_report, ExperimentConfig};
use oakit::integrand::Integrand;
use oakit::oa::{construct_bose_oa, verify_strength};
use oakit::randomize::{expand_to_latin, randomize_symbols, tang_randomize};
use oakit::sampler::{
    check_bivariate_stratification, check_univariate_latin, sample_lhs, sample_oalh,
    sample_oalh_tang, sample_oas, sample_srs, Design, UnitSample,
};
use oakit::seed::SeedSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "oakit", version, about = "Orthogonal array sampling designs and their verification experiments")]
struct Cli {
    /// Cap the rayon worker count used by replicated experiments.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a strength-2 orthogonal array and write the text format.
    Construct {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sampling pipeline for one design and write the CSV.
    Sample {
        #[arg(long)]
        design: String,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a registered integrand and write the JSON summary.
    Decompose {
        #[arg(long)]
        integrand: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiments named by a key=value config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Also dump every replicate estimate as CSV.
        #[arg(long)]
        raw_out: Option<PathBuf>,
        /// Override the config's replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay a recorded run manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        /// Redirect the primary artifact (defaults to the recorded path).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Combined verify output; either section may be absent depending on the
/// config's `experiment` key.
#[derive(Serialize, Deserialize)]
struct VerifyReport {
    variance: Option<oakit::harness::ExperimentReport>,
    clt: Option<oakit::harness::ExperimentReport>,
}

impl VerifyReport {
    fn all_pass(&self) -> bool {
        self.variance.iter().all(|r| r.all_pass()) && self.clt.iter().all(|r| r.all_pass())
    }

    fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure {t} worker threads");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Construct { q, d, out } => cmd_construct(q, d, &out),
        Command::Sample {
            design,
            q,
            d,
            seed,
            replicate,
            out,
        } => cmd_sample(&design, q, d, seed, replicate, &out),
        Command::Decompose {
            integrand,
            d,
            m,
            out,
        } => cmd_decompose(&integrand, d, m, &out),
        Command::Verify {
            config,
            out,
            raw_out,
            replicates,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let (experiment, mut cfg) = config::parse_config(&text)?;
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cmd_verify(&experiment, &cfg, &out, raw_out.as_deref())
        }
        Command::Rerun { manifest, out } => cmd_rerun(&manifest, out.as_deref()),
    }
}

fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_construct(q: u32, d: usize, out: &Path) -> Result<ExitCode> {
    let start = Instant::now();
    let array = construct_bose_oa(q, d)?;
    write_artifact(out, &array.to_text())?;
    let ok = verify_strength(&array, 2)?;
    println!(
        "wrote OA({}, {}, {}, 2) to {}; strength-2 verification: {}",
        array.n(),
        array.d(),
        array.q(),
        out.display(),
        if ok { "ok" } else { "FAIL" }
    );
    manifest::write(
        out,
        RunManifest::new(CommandSpec::Construct { q, d }, 0, vec![out], start),
    )?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn build_sample(design: Design, q: u32, d: usize, seed: u64, replicate: u64) -> Result<UnitSample> {
    let spec = SeedSpec::for_replicate(seed, replicate);
    let sample = match design {
        Design::Oas => {
            let a = construct_bose_oa(q, d)?;
            sample_oas(&randomize_symbols(&a, &spec)?, &spec)?
        }
        Design::Oalh => {
            let a = construct_bose_oa(q, d)?;
            let a_dd = expand_to_latin(&randomize_symbols(&a, &spec)?, &spec)?;
            sample_oalh(&a_dd, &spec)?
        }
        Design::OalhTang => {
            let a = construct_bose_oa(q, d)?;
            let a_dd = expand_to_latin(&randomize_symbols(&a, &spec)?, &spec)?;
            sample_oalh_tang(&tang_randomize(&a_dd, &spec)?, &spec)?
        }
        Design::Srs => sample_srs((q * q) as usize, d, &spec)?,
        Design::Lhs => sample_lhs((q * q) as usize, d, &spec)?,
    };
    Ok(sample)
}

fn cmd_sample(
    design_name: &str,
    q: u32,
    d: usize,
    seed: u64,
    replicate: u64,
    out: &Path,
) -> Result<ExitCode> {
    let start = Instant::now();
    let design = Design::parse(design_name)?;
    let sample = build_sample(design, q, d, seed, replicate)?;
    write_artifact(out, &sample.to_csv())?;
    println!(
        "wrote {} {} points in d={} to {}",
        sample.n(),
        design,
        d,
        out.display()
    );

    // Structural guarantees by design; SRS is reported informationally.
    let mut guaranteed_ok = true;
    let bivariate = check_bivariate_stratification(&sample, q)?;
    match design {
        Design::Oas | Design::Oalh | Design::OalhTang => {
            println!("bivariate stratification: {}", if bivariate { "ok" } else { "FAIL" });
            guaranteed_ok &= bivariate;
        }
        Design::Srs | Design::Lhs => {
            println!(
                "bivariate stratification (not guaranteed for {design}): {}",
                if bivariate { "ok" } else { "no" }
            );
        }
    }
    match design {
        Design::Oalh | Design::OalhTang | Design::Lhs => {
            let latin = check_univariate_latin(&sample, (q * q) as usize)?;
            println!("univariate latin: {}", if latin { "ok" } else { "FAIL" });
            guaranteed_ok &= latin;
        }
        _ => {}
    }

    manifest::write(
        out,
        RunManifest::new(
            CommandSpec::Sample {
                design: design.as_str().to_string(),
                q,
                d,
                seed,
                replicate,
            },
            seed,
            vec![out],
            start,
        ),
    )?;
    Ok(if guaranteed_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_decompose(integrand: &str, d: usize, m: usize, out: &Path) -> Result<ExitCode> {
    let start = Instant::now();
    let f = Integrand::by_id(integrand, d)?;
    let dec = decompose(&f, m)?;
    write_artifact(out, &dec.to_json())?;
    println!(
        "decomposed {integrand} at d={d}, m={m}: mu = {:.6e}, frem_l2 = {:.6e} -> {}",
        dec.mu(),
        dec.frem_l2(),
        out.display()
    );
    manifest::write(
        out,
        RunManifest::new(
            CommandSpec::Decompose {
                integrand: integrand.to_string(),
                d,
                m,
            },
            0,
            vec![out],
            start,
        ),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    experiment: &str,
    cfg: &ExperimentConfig,
    out: &Path,
    raw_out: Option<&Path>,
) -> Result<ExitCode> {
    let start = Instant::now();
    cfg.validate()?;
    let data = collect_sweep(cfg)?;

    if let Some(raw_path) = raw_out {
        let mut csv = String::from("design,q,replicate,value\n");
        for (design, q, vals) in &data.values {
            for (rep, v) in vals.iter().enumerate() {
                csv.push_str(&format!("{design},{q},{rep},{v:.16e}\n"));
            }
        }
        write_artifact(raw_path, &csv)?;
    }

    let report = VerifyReport {
        variance: if experiment == "variance" || experiment == "both" {
            Some(variance_report(cfg, &data)?)
        } else {
            None
        },
        clt: if experiment == "clt" || experiment == "both" {
            Some(clt_report(cfg, &data)?)
        } else {
            None
        },
    };
    write_artifact(out, &report.to_json())?;

    for section in [&report.variance, &report.clt].into_iter().flatten() {
        for (name, verdict) in &section.verdicts {
            println!(
                "[{}] {name}: {} (observed {:.4e}, bound {:.4e}, tolerance {})",
                section.experiment,
                if verdict.pass { "pass" } else { "FAIL" },
                verdict.observed,
                verdict.bound,
                verdict.tolerance
            );
        }
    }
    let pass = report.all_pass();
    println!(
        "report -> {}; overall: {}",
        out.display(),
        if pass { "pass" } else { "FAIL" }
    );

    let mut outputs = vec![out];
    if let Some(r) = raw_out {
        outputs.push(r);
    }
    manifest::write(
        out,
        RunManifest::new(
            CommandSpec::Verify {
                experiment: experiment.to_string(),
                config: cfg.clone(),
                raw_out: raw_out.map(|p| p.display().to_string()),
            },
            cfg.master_seed,
            outputs,
            start,
        ),
    )?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_rerun(manifest_path: &Path, out_override: Option<&Path>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(manifest_path)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let recorded: RunManifest =
        serde_json::from_str(&text).context("parsing run manifest")?;
    let out = match out_override {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(recorded.primary_output()?),
    };
    match recorded.spec {
        CommandSpec::Construct { q, d } => cmd_construct(q, d, &out),
        CommandSpec::Sample {
            design,
            q,
            d,
            seed,
            replicate,
        } => cmd_sample(&design, q, d, seed, replicate, &out),
        CommandSpec::Decompose { integrand, d, m } => cmd_decompose(&integrand, d, m, &out),
        CommandSpec::Verify {
            experiment,
            config,
            raw_out,
        } => {
            if out_override.is_some() && raw_out.is_some() {
                bail!("cannot redirect a verify run that also recorded a raw dump");
            }
            cmd_verify(&experiment, &config, &out, raw_out.as_deref().map(Path::new))
        }
    }
}
