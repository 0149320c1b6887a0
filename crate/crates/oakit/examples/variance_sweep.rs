//! Minimal library walkthrough: build the designs, estimate the product
//! integrand over replicates, and print the q^2-scaled variances next to
//! the ANOVA remainder norm they approach.
//!
//! Run with `cargo run --release -p oakit --example variance_sweep`.

use oakit::anova::decompose;
use oakit::harness::replicate_estimates;
use oakit::integrand::Integrand;
use oakit::sampler::Design;
use oakit::stats::sample_variance;

fn main() -> oakit::Result<()> {
    let f = Integrand::by_id("product", 3)?;
    let frem = decompose(&f, 128)?.frem_l2();
    println!("remainder norm: {frem:.6e}\n");
    println!("{:>10} {:>6} {:>12} {:>8}", "design", "q", "q^2 Var", "ratio");
    for design in [Design::Oas, Design::Oalh, Design::OalhTang, Design::Srs] {
        for q in [11u32, 23] {
            let estimates = replicate_estimates(&f, design, q, 3, 2000, 7)?;
            let q2_var = (q as f64).powi(2) * sample_variance(&estimates)?;
            println!(
                "{:>10} {:>6} {:>12.4e} {:>8.3}",
                design.as_str(),
                q,
                q2_var,
                q2_var / frem
            );
        }
    }
    Ok(())
}
