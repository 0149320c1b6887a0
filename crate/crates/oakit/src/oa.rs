//! Strength-2 orthogonal arrays over prime symbol sets: construction,
//! verification, and the plain-text interchange format.

use crate::error::{Error, Result};
use std::fmt;

/// Where an array sits in the randomization pipeline. The symbol domain is
/// `{0..q}` for `Base`/`Randomized` and `{0..q^2}` for `Expanded`/`Tang`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Base,
    Randomized,
    Expanded,
    Tang,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Base => "BASE",
            Stage::Randomized => "RANDOMIZED",
            Stage::Expanded => "EXPANDED",
            Stage::Tang => "TANG",
        }
    }

    pub fn parse(s: &str) -> Result<Stage> {
        match s {
            "BASE" => Ok(Stage::Base),
            "RANDOMIZED" => Ok(Stage::Randomized),
            "EXPANDED" => Ok(Stage::Expanded),
            "TANG" => Ok(Stage::Tang),
            other => Err(Error::Parse(format!("unknown stage {other:?}"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An n x d symbol matrix with its design metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalArray {
    entries: Vec<u32>, // row-major, n * d
    n: usize,
    d: usize,
    q: u32,
    t: u32,
    stage: Stage,
}

impl OrthogonalArray {
    /// Builds an array from raw parts, validating shape and entry ranges.
    pub fn new(
        entries: Vec<u32>,
        n: usize,
        d: usize,
        q: u32,
        t: u32,
        stage: Stage,
    ) -> Result<Self> {
        if entries.len() != n * d {
            return Err(Error::Parse(format!(
                "entry count {} does not match {n} x {d}",
                entries.len()
            )));
        }
        let a = OrthogonalArray {
            entries,
            n,
            d,
            q,
            t,
            stage,
        };
        let domain = a.symbol_count();
        if let Some(&bad) = a.entries.iter().find(|&&e| e >= domain) {
            return Err(Error::Parse(format!(
                "entry {bad} outside symbol domain 0..{domain}"
            )));
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Size of the per-cell symbol domain at the current stage.
    pub fn symbol_count(&self) -> u32 {
        match self.stage {
            Stage::Base | Stage::Randomized => self.q,
            Stage::Expanded | Stage::Tang => self.q * self.q,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.d + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row * self.d..(row + 1) * self.d]
    }

    pub(crate) fn map_entries(&self, stage: Stage, f: impl Fn(usize, usize, u32) -> u32) -> Self {
        let mut entries = Vec::with_capacity(self.n * self.d);
        for i in 0..self.n {
            for j in 0..self.d {
                entries.push(f(i, j, self.get(i, j)));
            }
        }
        OrthogonalArray {
            entries,
            n: self.n,
            d: self.d,
            q: self.q,
            t: self.t,
            stage,
        }
    }

    /// Collapses an expanded array back onto its q-symbol skeleton
    /// (entry / q), giving the stage the fine levels were built from.
    pub fn project_to_base(&self) -> Result<OrthogonalArray> {
        match self.stage {
            Stage::Expanded | Stage::Tang => Ok(self.map_entries(Stage::Randomized, |_, _, e| e / self.q)),
            got => Err(Error::WrongStage {
                expected: Stage::Expanded,
                got,
            }),
        }
    }

    /// Plain-text format: header `oa n d q t stage`, then n rows of d
    /// whitespace-separated symbols. Round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("oa {} {} {} {} {}\n", self.n, self.d, self.q, self.t, self.stage);
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<OrthogonalArray> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "oa" {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let n: usize = parse_field(fields[1], "n")?;
        let d: usize = parse_field(fields[2], "d")?;
        let q: u32 = parse_field(fields[3], "q")?;
        let t: u32 = parse_field(fields[4], "t")?;
        let stage = Stage::parse(fields[5])?;
        let mut entries = Vec::with_capacity(n * d);
        for (i, line) in lines.enumerate() {
            if i >= n {
                return Err(Error::Parse(format!("more than {n} data rows")));
            }
            for tok in line.split_whitespace() {
                entries.push(parse_field(tok, "entry")?);
            }
        }
        OrthogonalArray::new(entries, n, d, q, t, stage)
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {tok:?}")))
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= q {
        if q.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Bose construction of OA(q^2, d, q, 2) for prime q and 2 <= d <= q+1.
///
/// Rows are indexed by (alpha, beta) in {0..q}^2 in lexicographic order.
/// Column j < q holds (alpha*j + beta) mod q; the optional column q
/// (present only when d = q+1) holds alpha. Deterministic.
pub fn construct_bose_oa(q: u32, d: usize) -> Result<OrthogonalArray> {
    if !is_prime(q) {
        return Err(Error::NonPrimeQ(q));
    }
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    if d > q as usize + 1 {
        return Err(Error::DimensionTooLarge {
            d,
            max: q as usize + 1,
        });
    }
    let n = (q * q) as usize;
    let mut entries = Vec::with_capacity(n * d);
    for alpha in 0..q {
        for beta in 0..q {
            for j in 0..d as u32 {
                let e = if j < q { (alpha * j + beta) % q } else { alpha };
                entries.push(e);
            }
        }
    }
    OrthogonalArray::new(entries, n, d, q, 2, Stage::Base)
}

/// True iff every n x t column-subset submatrix contains each of the
/// s^t possible rows exactly n / s^t times, where s is the symbol domain
/// size at the array's stage. Exact integer counting.
pub fn verify_strength(a: &OrthogonalArray, t: u32) -> Result<bool> {
    if t as usize > a.d() {
        return Err(Error::StrengthExceedsDimension { t, d: a.d() });
    }
    if t == 0 {
        return Ok(true);
    }
    let s = a.symbol_count() as usize;
    let mut tuples = 1usize;
    for _ in 0..t {
        match tuples.checked_mul(s) {
            Some(v) => tuples = v,
            None => return Ok(false),
        }
    }
    if !a.n().is_multiple_of(tuples) {
        return Ok(false);
    }
    let expected = (a.n() / tuples) as u32;
    let mut counts = vec![0u32; tuples];
    let mut cols = vec![0usize; t as usize];
    balanced_over_subsets(a, &mut cols, 0, 0, s, expected, &mut counts)
}

fn balanced_over_subsets(
    a: &OrthogonalArray,
    cols: &mut [usize],
    depth: usize,
    start: usize,
    s: usize,
    expected: u32,
    counts: &mut [u32],
) -> Result<bool> {
    if depth == cols.len() {
        counts.fill(0);
        for i in 0..a.n() {
            let mut key = 0usize;
            for &c in cols.iter() {
                key = key * s + a.get(i, c) as usize;
            }
            counts[key] += 1;
        }
        return Ok(counts.iter().all(|&c| c == expected));
    }
    for c in start..=a.d() - (cols.len() - depth) {
        cols[depth] = c;
        if !balanced_over_subsets(a, cols, depth + 1, c + 1, s, expected, counts)? {
            return Ok(false);
        }
    }
    Ok(true)
}
