//! Scalar statistics: compensated sums, moments, the standard normal CDF
//! and quantile, Kolmogorov-Smirnov distances, and percentile bootstrap
//! intervals.

use crate::error::{Error, Result};
use crate::seed::SeedSpec;
use rand::Rng;

/// Pairwise (cascade) summation. Round-off grows like O(log n) instead of
/// O(n), and the result does not depend on how callers chunk their data.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 64;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (divisor n - 1), two-pass.
pub fn sample_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooFewValues {
            context: "sample variance",
            got: xs.len(),
            need: 2,
        });
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    Ok(pairwise_sum(&sq) / (xs.len() - 1) as f64)
}

fn central_moment(xs: &[f64], m: f64, p: i32) -> f64 {
    let v: Vec<f64> = xs.iter().map(|x| (x - m).powi(p)).collect();
    pairwise_sum(&v) / xs.len() as f64
}

/// Method-of-moments skewness g1 = m3 / m2^(3/2).
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    let m3 = central_moment(xs, m, 3);
    m3 / m2.powf(1.5)
}

/// Method-of-moments excess kurtosis g2 = m4 / m2^2 - 3.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    let m4 = central_moment(xs, m, 4);
    m4 / (m2 * m2) - 3.0
}

// ---------------------------------------------------------------------------
// Error function and standard normal CDF / quantile
// ---------------------------------------------------------------------------

// Rational Chebyshev coefficients for erf/erfc (Cody's CALERF scheme,
// three argument regions). Relative accuracy is close to machine epsilon,
// far inside the 1e-12 budget the KS statistic needs.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_5,
    1.138_641_541_510_501_6e2,
    3.774_852_376_853_02e2,
    3.209_377_589_138_469_4e3,
    1.857_777_061_846_031_5e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_2e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_171e3,
];
const ERF_C: [f64; 9] = [
    5.641_884_969_886_701e-1,
    8.883_149_794_388_377,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001e2,
    8.819_522_212_417_69e2,
    1.712_047_612_634_070_7e3,
    2.051_078_377_826_071_6e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_3e-8,
];
const ERF_D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_099e2,
    1.621_389_574_566_690_3e3,
    3.290_799_235_733_459_7e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_5e3,
];
const ERF_P: [f64; 6] = [
    3.053_266_349_612_323_6e-1,
    3.603_448_999_498_044_5e-1,
    1.257_817_261_112_292_6e-1,
    1.608_378_514_874_227_5e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_7e-2,
];
const ERF_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    5.279_051_029_514_285e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];
const SQRPI: f64 = 5.641_895_835_477_563e-1;

fn erf_small(x: f64) -> f64 {
    // |x| <= 0.46875
    let ysq = x * x;
    let mut xnum = ERF_A[4] * ysq;
    let mut xden = ysq;
    for i in 0..3 {
        xnum = (xnum + ERF_A[i]) * ysq;
        xden = (xden + ERF_B[i]) * ysq;
    }
    x * (xnum + ERF_A[3]) / (xden + ERF_B[3])
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf_small(x);
    }
    let r = if y <= 4.0 {
        let mut xnum = ERF_C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + ERF_C[i]) * y;
            xden = (xden + ERF_D[i]) * y;
        }
        let frac = (xnum + ERF_C[7]) / (xden + ERF_D[7]);
        scaled_exp(y) * frac
    } else if y < 26.543 {
        let ysq = 1.0 / (y * y);
        let mut xnum = ERF_P[5] * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + ERF_P[i]) * ysq;
            xden = (xden + ERF_Q[i]) * ysq;
        }
        let frac = ysq * (xnum + ERF_P[4]) / (xden + ERF_Q[4]);
        scaled_exp(y) * ((SQRPI - frac) / y)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

// exp(-y^2) split so the squared high part is exact; avoids the rounding
// of y*y feeding straight into exp at large y.
fn scaled_exp(y: f64) -> f64 {
    let hi = (y * 16.0).trunc() / 16.0;
    let del = (y - hi) * (y + hi);
    (-hi * hi).exp() * (-del).exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.abs() <= 0.46875 {
        erf_small(x)
    } else if x < 0.0 {
        erfc(-x) - 1.0
    } else {
        1.0 - erfc(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile (inverse CDF), rational initial guess plus one
/// Halley refinement against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parse(format!("quantile probability {p} not in (0,1)")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };
    // Halley step.
    let e = normal_cdf(x) - p;
    let u = e / normal_pdf(x);
    x -= u / (1.0 + x * u / 2.0);
    Ok(x)
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

/// KS distance of a sorted sample against an arbitrary CDF:
/// sup_i max(|i/n - F(v_i)|, |(i-1)/n - F(v_i)|).
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "input not sorted");
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let f = cdf(v);
        let hi = ((i + 1) as f64 / n - f).abs();
        let lo = (i as f64 / n - f).abs();
        sup = sup.max(hi).max(lo);
    }
    sup
}

/// KS distance of a sorted sample against the standard normal CDF.
pub fn ks_statistic(sorted: &[f64]) -> f64 {
    ks_distance(sorted, normal_cdf)
}

/// Asymptotic Kolmogorov CDF K(x) = P(sqrt(n) D_n <= x).
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Critical KS distance at significance `alpha` for sample size `n`
/// (asymptotic: K^{-1}(1 - alpha) / sqrt(n)).
pub fn kolmogorov_critical(n: usize, alpha: f64) -> f64 {
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.2f64, 4.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (n as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Percentile bootstrap
// ---------------------------------------------------------------------------

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let w = rank - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi.min(n - 1)] * w
}

const MIN_BOOTSTRAP: usize = 1000;

fn check_bootstrap_args(values: &[f64], level: f64, b: usize) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::TooFewValues {
            context: "bootstrap sample",
            got: values.len(),
            need: 2,
        });
    }
    if b < MIN_BOOTSTRAP {
        return Err(Error::TooFewValues {
            context: "bootstrap resamples",
            got: b,
            need: MIN_BOOTSTRAP,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parse(format!("bootstrap level {level} not in (0,1)")));
    }
    Ok(())
}

fn resample_into(rng: &mut impl Rng, src: &[f64], dst: &mut [f64]) {
    for slot in dst.iter_mut() {
        *slot = src[rng.random_range(0..src.len())];
    }
}

/// Two-sided percentile bootstrap interval for `statistic` over `values`.
pub fn bootstrap_ci(
    values: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    b: usize,
    seed: &SeedSpec,
) -> Result<(f64, f64)> {
    check_bootstrap_args(values, level, b)?;
    let mut rng = seed.rng();
    let mut buf = vec![0.0; values.len()];
    let mut stats = Vec::with_capacity(b);
    for _ in 0..b {
        resample_into(&mut rng, values, &mut buf);
        stats.push(statistic(&buf));
    }
    stats.sort_by(|a, b| a.total_cmp(b));
    let tail = (1.0 - level) / 2.0;
    Ok((percentile(&stats, tail), percentile(&stats, 1.0 - tail)))
}

fn bootstrap_diff_stats(
    a: &[f64],
    b_vals: &[f64],
    statistic: &impl Fn(&[f64]) -> f64,
    level: f64,
    b: usize,
    seed: &SeedSpec,
) -> Result<Vec<f64>> {
    check_bootstrap_args(a, level, b)?;
    check_bootstrap_args(b_vals, level, b)?;
    let mut rng = seed.rng();
    let mut buf_a = vec![0.0; a.len()];
    let mut buf_b = vec![0.0; b_vals.len()];
    let mut stats = Vec::with_capacity(b);
    for _ in 0..b {
        resample_into(&mut rng, a, &mut buf_a);
        resample_into(&mut rng, b_vals, &mut buf_b);
        stats.push(statistic(&buf_a) - statistic(&buf_b));
    }
    stats.sort_by(|x, y| x.total_cmp(y));
    Ok(stats)
}

/// Two-sided percentile bootstrap interval for statistic(a) - statistic(b),
/// resampling the two groups independently.
pub fn bootstrap_diff_ci(
    a: &[f64],
    b_vals: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    b: usize,
    seed: &SeedSpec,
) -> Result<(f64, f64)> {
    let stats = bootstrap_diff_stats(a, b_vals, &statistic, level, b, seed)?;
    let tail = (1.0 - level) / 2.0;
    Ok((percentile(&stats, tail), percentile(&stats, 1.0 - tail)))
}

/// One-sided upper bound: the `level` percentile of the bootstrap
/// distribution of statistic(a) - statistic(b).
pub fn bootstrap_diff_upper(
    a: &[f64],
    b_vals: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    level: f64,
    b: usize,
    seed: &SeedSpec,
) -> Result<f64> {
    let stats = bootstrap_diff_stats(a, b_vals, &statistic, level, b, seed)?;
    Ok(percentile(&stats, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedSpec;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn variance_hand_values() {
        assert_eq!(sample_variance(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(sample_variance(&[0.0, 2.0]).unwrap(), 2.0);
        assert_eq!(
            sample_variance(&[1.0]),
            Err(Error::TooFewValues {
                context: "sample variance",
                got: 1,
                need: 2
            })
        );
    }

    // Independent oracle for the normal CDF: composite Simpson quadrature
    // of the density from 0 to x.
    fn phi_by_quadrature(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut s = normal_pdf(0.0) + normal_pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * normal_pdf(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn normal_cdf_matches_quadrature_oracle() {
        for &x in &[-3.0, -1.5, -0.3, 0.0, 0.2, 0.5, 1.0, 1.96, 2.5, 3.7] {
            let want = phi_by_quadrature(x);
            let got = normal_cdf(x);
            assert!(
                (got - want).abs() < 1e-12,
                "Phi({x}): got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn normal_cdf_known_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145705).abs() < 1e-13);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = normal_quantile(p).unwrap();
            assert!(
                (normal_cdf(x) - p).abs() < 1e-12,
                "round trip failed at p={p}"
            );
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn erf_half_reference() {
        // erf(0.5) to 16 digits (Abramowitz-Stegun style reference value).
        assert!((erf(0.5) - 0.5204998778130465).abs() < 1e-14);
    }

    #[test]
    fn ks_on_plotting_positions_is_half_over_n() {
        let n = 40;
        let vals: Vec<f64> = (1..=n)
            .map(|i| normal_quantile((i as f64 - 0.5) / n as f64).unwrap())
            .collect();
        let ks = ks_statistic(&vals);
        assert!(
            (ks - 0.5 / n as f64).abs() < 1e-10,
            "ks = {ks}, want {}",
            0.5 / n as f64
        );
    }

    #[test]
    fn ks_single_zero_is_half() {
        assert!((ks_statistic(&[0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_far_right_tail_approaches_one() {
        let ks = ks_statistic(&[10.0]);
        assert!(ks >= 1.0 - 1e-12, "ks = {ks}");
    }

    #[test]
    fn kolmogorov_quantiles_match_tables() {
        // Classical critical constants: K^{-1}(0.95) = 1.3581, K^{-1}(0.99) = 1.6276.
        let k95 = kolmogorov_critical(1, 0.05);
        let k99 = kolmogorov_critical(1, 0.01);
        assert!((k95 - 1.3581).abs() < 2e-3, "k95 = {k95}");
        assert!((k99 - 1.6276).abs() < 2e-3, "k99 = {k99}");
    }

    #[test]
    fn skew_kurtosis_of_symmetric_two_point_mass() {
        let xs = [-1.0, 1.0, -1.0, 1.0];
        assert!(skewness(&xs).abs() < 1e-14);
        // Two-point symmetric mass has kurtosis 1, excess -2.
        assert!((excess_kurtosis(&xs) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn bootstrap_constant_values_give_zero_interval() {
        let vals = vec![3.0; 50];
        let seed = SeedSpec::new(7);
        let (lo, hi) = bootstrap_ci(
            &vals,
            |v| sample_variance(v).unwrap(),
            0.95,
            1000,
            &seed,
        )
        .unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
    }

    #[test]
    fn bootstrap_rejects_too_few_resamples() {
        let vals = vec![1.0, 2.0, 3.0];
        let r = bootstrap_ci(&vals, mean, 0.95, 10, &SeedSpec::new(1));
        assert!(matches!(
            r,
            Err(Error::TooFewValues {
                context: "bootstrap resamples",
                ..
            })
        ));
    }

    #[test]
    fn bootstrap_mean_coverage_oracle() {
        // Meta-trial coverage of the percentile interval for the mean of
        // standard normal draws. 200 trials, 10^4 draws each; nominal 95%,
        // require >= 93%.
        let mut covered = 0;
        for trial in 0..200u64 {
            let spec = SeedSpec::new(9001).with_replicate(trial);
            let mut rng = spec.rng();
            let draws: Vec<f64> = (0..10_000)
                .map(|_| normal_quantile(rng.random::<f64>().max(1e-300)).unwrap())
                .collect();
            let (lo, hi) = bootstrap_ci(
                &draws,
                mean,
                0.95,
                1000,
                &spec.with_extra(1),
            )
            .unwrap();
            if lo <= 0.0 && 0.0 <= hi {
                covered += 1;
            }
        }
        assert!(covered >= 186, "covered only {covered}/200 trials");
    }
}
