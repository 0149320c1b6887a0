//! Point sets in [0,1)^d from combinatorial designs, plus the simple
//! random sampling and plain Latin hypercube baselines, exact
//! stratification checks, and the coupled digit generator that realizes a
//! randomized-array sample and an OA-based Latin hypercube sample from
//! shared digit streams.

use crate::error::{Error, Result};
use crate::oa::{OrthogonalArray, Stage};
use crate::randomize::expand_to_latin;
use crate::seed::{uniform_permutation, SeedSpec, StreamRole};
use rand::Rng;
use std::fmt;

/// Marks the substream feeding the explicit second base-q digit of the
/// coupled generator, so it never collides with the shared tail jitter.
const SECOND_DIGIT_STREAM: u64 = 1 << 32;

/// Sampling design that produced a [`UnitSample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Design {
    Oas,
    Oalh,
    OalhTang,
    Srs,
    Lhs,
}

impl Design {
    pub const ALL: [Design; 5] = [
        Design::Oas,
        Design::Oalh,
        Design::OalhTang,
        Design::Srs,
        Design::Lhs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Design::Oas => "oas",
            Design::Oalh => "oalh",
            Design::OalhTang => "oalh_tang",
            Design::Srs => "srs",
            Design::Lhs => "lhs",
        }
    }

    pub fn parse(s: &str) -> Result<Design> {
        match s {
            "oas" => Ok(Design::Oas),
            "oalh" => Ok(Design::Oalh),
            "oalh_tang" => Ok(Design::OalhTang),
            "srs" => Ok(Design::Srs),
            "lhs" => Ok(Design::Lhs),
            other => Err(Error::UnknownDesign(other.to_string())),
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// n points in [0,1)^d with their design provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSample {
    points: Vec<f64>, // row-major n * d
    n: usize,
    d: usize,
    design: Design,
    q: u32, // 0 for SRS / LHS
    seed: SeedSpec,
}

impl UnitSample {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn seed(&self) -> &SeedSpec {
        &self.seed
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.points[row * self.d + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.points[row * self.d..(row + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    /// CSV export: a `#` header carrying provenance, then one row per
    /// point at 17 significant digits (exact f64 round trip).
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# design={} q={} d={} seed={}\n",
            self.design,
            self.q,
            self.d,
            self.seed.canonical()
        );
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

// Largest f64 strictly below 1. Jitter is drawn from [0,1), but the final
// (symbol + jitter) / scale division can round up to 1.0 at the very top
// of a cell; the clamp keeps every coordinate inside [0,1).
fn clamp_unit(x: f64) -> f64 {
    x.min(1.0_f64.next_down())
}

fn jitter_matrix(n: usize, d: usize, seed: &SeedSpec) -> Vec<f64> {
    let mut u = vec![0.0f64; n * d];
    for j in 0..d {
        let mut rng = seed
            .with_column(j as u32)
            .with_role(StreamRole::Jitter)
            .rng();
        for i in 0..n {
            u[i * d + j] = rng.random::<f64>();
        }
    }
    u
}

fn require_stage(a: &OrthogonalArray, expected: Stage) -> Result<()> {
    if a.stage() != expected {
        return Err(Error::WrongStage {
            expected,
            got: a.stage(),
        });
    }
    Ok(())
}

fn sample_from_array(
    a: &OrthogonalArray,
    seed: &SeedSpec,
    design: Design,
    jitter: &[f64],
) -> UnitSample {
    let scale = a.symbol_count() as f64;
    let (n, d) = (a.n(), a.d());
    let mut points = vec![0.0f64; n * d];
    for i in 0..n {
        for j in 0..d {
            points[i * d + j] = clamp_unit((a.get(i, j) as f64 + jitter[i * d + j]) / scale);
        }
    }
    UnitSample {
        points,
        n,
        d,
        design,
        q: a.q(),
        seed: *seed,
    }
}

/// Randomized orthogonal array sample: point (i,j) = (a*_ij + U_ij) / q.
pub fn sample_oas(a_star: &OrthogonalArray, seed: &SeedSpec) -> Result<UnitSample> {
    require_stage(a_star, Stage::Randomized)?;
    if a_star.t() != 2 {
        return Err(Error::WrongStrength {
            expected: 2,
            got: a_star.t(),
        });
    }
    let u = jitter_matrix(a_star.n(), a_star.d(), seed);
    Ok(sample_from_array(a_star, seed, Design::Oas, &u))
}

#[cfg(test)]
pub(crate) fn sample_oas_with_jitter(
    a_star: &OrthogonalArray,
    seed: &SeedSpec,
    jitter: &[f64],
) -> Result<UnitSample> {
    require_stage(a_star, Stage::Randomized)?;
    Ok(sample_from_array(a_star, seed, Design::Oas, jitter))
}

/// OA-based Latin hypercube sample: point (i,j) = (a**_ij + U_ij) / q^2.
pub fn sample_oalh(a_dd: &OrthogonalArray, seed: &SeedSpec) -> Result<UnitSample> {
    require_stage(a_dd, Stage::Expanded)?;
    let u = jitter_matrix(a_dd.n(), a_dd.d(), seed);
    Ok(sample_from_array(a_dd, seed, Design::Oalh, &u))
}

#[cfg(test)]
pub(crate) fn sample_oalh_with_jitter(
    a_dd: &OrthogonalArray,
    seed: &SeedSpec,
    jitter: &[f64],
) -> Result<UnitSample> {
    require_stage(a_dd, Stage::Expanded)?;
    Ok(sample_from_array(a_dd, seed, Design::Oalh, jitter))
}

/// Tang-variant Latin hypercube sample: point (i,j) = (a***_ij + U_ij) / q^2.
pub fn sample_oalh_tang(a_ddd: &OrthogonalArray, seed: &SeedSpec) -> Result<UnitSample> {
    require_stage(a_ddd, Stage::Tang)?;
    let u = jitter_matrix(a_ddd.n(), a_ddd.d(), seed);
    Ok(sample_from_array(a_ddd, seed, Design::OalhTang, &u))
}

fn check_size(n: usize, d: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::TooFewValues {
            context: "sample size",
            got: n,
            need: 1,
        });
    }
    if d < 1 {
        return Err(Error::DimensionTooSmall { d, min: 1 });
    }
    Ok(())
}

/// n iid uniform points.
pub fn sample_srs(n: usize, d: usize, seed: &SeedSpec) -> Result<UnitSample> {
    check_size(n, d)?;
    let points = jitter_matrix(n, d, seed);
    Ok(UnitSample {
        points,
        n,
        d,
        design: Design::Srs,
        q: 0,
        seed: *seed,
    })
}

/// Plain Latin hypercube: one point per 1/n bin per column, bins assigned
/// by a uniform permutation, jittered within bins.
pub fn sample_lhs(n: usize, d: usize, seed: &SeedSpec) -> Result<UnitSample> {
    check_size(n, d)?;
    let u = jitter_matrix(n, d, seed);
    let mut points = vec![0.0f64; n * d];
    for j in 0..d {
        let perm = uniform_permutation(
            &seed.with_column(j as u32).with_role(StreamRole::ColPerm),
            n,
        )?;
        for i in 0..n {
            points[i * d + j] =
                clamp_unit((perm.apply(i as u32) as f64 + u[i * d + j]) / n as f64);
        }
    }
    Ok(UnitSample {
        points,
        n,
        d,
        design: Design::Lhs,
        q: 0,
        seed: *seed,
    })
}

/// Builds a randomized-array sample X and an OA-based Latin hypercube
/// sample Y from shared digit streams: the first base-q digit of both is
/// the randomized symbol, Y's second digit is the within-symbol fine
/// level, X's second digit is a fresh uniform digit, and all deeper digits
/// are a shared uniform jitter. Guarantees max |X - Y| <= (q-1)/q^2.
pub fn coupled_digit_samples(
    a_star: &OrthogonalArray,
    seed: &SeedSpec,
) -> Result<(UnitSample, UnitSample)> {
    require_stage(a_star, Stage::Randomized)?;
    let a_dd = expand_to_latin(a_star, seed)?;
    let (n, d, q) = (a_star.n(), a_star.d(), a_star.q());
    let scale = (q * q) as f64;
    let tail = jitter_matrix(n, d, seed);
    let mut x = vec![0.0f64; n * d];
    let mut y = vec![0.0f64; n * d];
    for j in 0..d {
        let mut digit_rng = seed
            .with_column(j as u32)
            .with_role(StreamRole::Jitter)
            .with_extra(seed.extra | SECOND_DIGIT_STREAM)
            .rng();
        for i in 0..n {
            let v = tail[i * d + j];
            let x2 = digit_rng.random_range(0..q);
            let x_fine = q * a_star.get(i, j) + x2;
            x[i * d + j] = clamp_unit((x_fine as f64 + v) / scale);
            y[i * d + j] = clamp_unit((a_dd.get(i, j) as f64 + v) / scale);
        }
    }
    let xs = UnitSample {
        points: x,
        n,
        d,
        design: Design::Oas,
        q,
        seed: *seed,
    };
    let ys = UnitSample {
        points: y,
        n,
        d,
        design: Design::Oalh,
        q,
        seed: *seed,
    };
    Ok((xs, ys))
}

// Bin index of x among `bins` equal cells of [0,1). The min() guards the
// one-ulp product rounding at the upper cell boundary.
fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor() as usize).min(bins - 1)
}

/// Exact bivariate stratification: true iff for every column pair and
/// every q x q cell the occupancy is exactly n / q^2.
pub fn check_bivariate_stratification(s: &UnitSample, q: u32) -> Result<bool> {
    let cells = (q * q) as usize;
    if q == 0 || !s.n().is_multiple_of(cells) {
        return Err(Error::BadBinCount {
            bins: cells,
            n: s.n(),
        });
    }
    let expected = (s.n() / cells) as u32;
    let qb = q as usize;
    let mut counts = vec![0u32; cells];
    for k in 0..s.d() {
        for l in k + 1..s.d() {
            counts.fill(0);
            for i in 0..s.n() {
                let a = bin_of(s.get(i, k), qb);
                let b = bin_of(s.get(i, l), qb);
                counts[a * qb + b] += 1;
            }
            if counts.iter().any(|&c| c != expected) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact univariate stratification: true iff every column has exactly
/// n / bins points in every bin.
pub fn check_univariate_latin(s: &UnitSample, bins: usize) -> Result<bool> {
    if bins == 0 || !s.n().is_multiple_of(bins) {
        return Err(Error::BadBinCount { bins, n: s.n() });
    }
    let expected = (s.n() / bins) as u32;
    let mut counts = vec![0u32; bins];
    for j in 0..s.d() {
        counts.fill(0);
        for i in 0..s.n() {
            counts[bin_of(s.get(i, j), bins)] += 1;
        }
        if counts.iter().any(|&c| c != expected) {
            return Ok(false);
        }
    }
    Ok(true)
}
