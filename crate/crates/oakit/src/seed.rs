//! Deterministic, keyed randomness streams.
//!
//! Every random draw in the crate flows through a [`SeedSpec`]: a master
//! seed plus a stream key (replicate, column, role, extra). Distinct keys
//! give independent ChaCha12 substreams, so replicates and columns can be
//! generated in any order, on any number of threads, with identical
//! results.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Which permutation or jitter family a substream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamRole {
    /// Symbol permutation applied to an entire column.
    ColPerm,
    /// Within-symbol level permutation for the carried symbol.
    WithinSymbolPerm(u32),
    /// Uniform [0,1) jitter within cells.
    Jitter,
    /// Extra per-column level re-randomization (Tang variant), keyed by symbol.
    TangExtra(u32),
}

impl StreamRole {
    fn name(&self) -> &'static str {
        match self {
            StreamRole::ColPerm => "col_perm",
            StreamRole::WithinSymbolPerm(_) => "within_symbol_perm",
            StreamRole::Jitter => "jitter",
            StreamRole::TangExtra(_) => "tang_extra",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            StreamRole::ColPerm => 0,
            StreamRole::WithinSymbolPerm(_) => 1,
            StreamRole::Jitter => 2,
            StreamRole::TangExtra(_) => 3,
        }
    }

    fn symbol(&self) -> Option<u32> {
        match self {
            StreamRole::WithinSymbolPerm(s) | StreamRole::TangExtra(s) => Some(*s),
            _ => None,
        }
    }
}

/// Full key of one randomness substream.
///
/// Pipeline operations treat a `SeedSpec` as a template: they keep
/// `master_seed`, `replicate` and `extra` and overwrite `column` and
/// `role` for each substream they draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate: u64,
    pub column: u32,
    pub role: StreamRole,
    pub extra: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            replicate: 0,
            column: 0,
            role: StreamRole::ColPerm,
            extra: 0,
        }
    }

    pub fn for_replicate(master_seed: u64, replicate: u64) -> Self {
        SeedSpec::new(master_seed).with_replicate(replicate)
    }

    pub fn with_replicate(mut self, replicate: u64) -> Self {
        self.replicate = replicate;
        self
    }

    pub fn with_column(mut self, column: u32) -> Self {
        self.column = column;
        self
    }

    pub fn with_role(mut self, role: StreamRole) -> Self {
        self.role = role;
        self
    }

    pub fn with_extra(mut self, extra: u64) -> Self {
        self.extra = extra;
        self
    }

    /// Canonical audit string:
    /// `seed=<u64>;rep=<i>;col=<j>;role=<name>[;sym=<k>];extra=<e>`.
    pub fn canonical(&self) -> String {
        match self.role.symbol() {
            Some(sym) => format!(
                "seed={};rep={};col={};role={};sym={};extra={}",
                self.master_seed,
                self.replicate,
                self.column,
                self.role.name(),
                sym,
                self.extra
            ),
            None => format!(
                "seed={};rep={};col={};role={};extra={}",
                self.master_seed,
                self.replicate,
                self.column,
                self.role.name(),
                self.extra
            ),
        }
    }

    /// The keyed substream for this spec. Identical specs always produce
    /// the identical byte stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut h = 0x9e37_79b9_7f4a_7c15u64;
        for field in [
            self.master_seed,
            self.replicate,
            (self.column as u64) << 32
                | self.role.tag() << 16
                | self.role.symbol().unwrap_or(0) as u64,
            self.extra,
        ] {
            h = splitmix64(h ^ field);
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            h = splitmix64(h);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A permutation of {0, ..., m-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation((0..m as u32).collect())
    }

    /// Validates that `mapping` is a bijection on {0, .., len-1}.
    pub fn from_vec(mapping: Vec<u32>) -> Result<Self> {
        if mapping.is_empty() {
            return Err(Error::ZeroLength);
        }
        let mut seen = vec![false; mapping.len()];
        for &v in &mapping {
            let idx = v as usize;
            if idx >= mapping.len() || seen[idx] {
                return Err(Error::InvalidPermutation);
            }
            seen[idx] = true;
        }
        Ok(Permutation(mapping))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of symbol `s`. Panics if `s` is outside {0, .., len-1}.
    pub fn apply(&self, s: u32) -> u32 {
        self.0[s as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }
}

/// Uniformly random permutation of {0, ..., m-1} via Fisher-Yates on the
/// keyed substream. Deterministic given the spec.
pub fn uniform_permutation(seed: &SeedSpec, m: usize) -> Result<Permutation> {
    if m == 0 {
        return Err(Error::ZeroLength);
    }
    let mut rng = seed.rng();
    let mut v: Vec<u32> = (0..m as u32).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    Ok(Permutation(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_permutation_is_identity() {
        let p = uniform_permutation(&SeedSpec::new(1), 1).unwrap();
        assert_eq!(p.as_slice(), &[0]);
        assert!(p.is_identity());
    }

    #[test]
    fn zero_length_is_an_error() {
        assert_eq!(uniform_permutation(&SeedSpec::new(1), 0), Err(Error::ZeroLength));
    }

    #[test]
    fn same_spec_reproduces_permutation() {
        let spec = SeedSpec::new(77).with_replicate(3).with_column(2);
        let a = uniform_permutation(&spec, 5).unwrap();
        let b = uniform_permutation(&spec, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_keys_give_different_streams() {
        let base = SeedSpec::new(5);
        let a = uniform_permutation(&base, 32).unwrap();
        let b = uniform_permutation(&base.with_replicate(1), 32).unwrap();
        let c = uniform_permutation(&base.with_column(1), 32).unwrap();
        let d = uniform_permutation(&base.with_role(StreamRole::Jitter), 32).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    // Lehmer code of a permutation of 4 -> index in 0..24.
    fn perm4_index(p: &Permutation) -> usize {
        let v = p.as_slice();
        let factorial = [6usize, 2, 1];
        let mut idx = 0usize;
        for i in 0..3 {
            let smaller = v[i + 1..].iter().filter(|&&x| x < v[i]).count();
            idx += smaller * factorial[i];
        }
        idx
    }

    #[test]
    fn permutations_of_four_are_uniform_chi_square() {
        let n = 100_000u64;
        let mut counts = [0u64; 24];
        for k in 0..n {
            let p = uniform_permutation(&SeedSpec::new(33).with_extra(k), 4).unwrap();
            counts[perm4_index(&p)] += 1;
        }
        let expected = n as f64 / 24.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 0.999 quantile of chi-square with 23 degrees of freedom.
        assert!(chi2 < 49.728, "chi2 = {chi2}");
    }

    #[test]
    fn replicate_streams_are_uncorrelated() {
        // First element of a permutation of 16 drawn from replicate 0 and
        // replicate 1 streams; Pearson correlation over 10^4 draws.
        let n = 10_000u64;
        let mut xs = Vec::with_capacity(n as usize);
        let mut ys = Vec::with_capacity(n as usize);
        for k in 0..n {
            let a = uniform_permutation(&SeedSpec::new(2).with_extra(k), 16).unwrap();
            let b = uniform_permutation(
                &SeedSpec::new(2).with_replicate(1).with_extra(k),
                16,
            )
            .unwrap();
            xs.push(a.apply(0) as f64);
            ys.push(b.apply(0) as f64);
        }
        let mx = crate::stats::mean(&xs);
        let my = crate::stats::mean(&ys);
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for i in 0..xs.len() {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        let rho = sxy / (sxx * syy).sqrt();
        assert!(rho.abs() < 0.05, "rho = {rho}");
    }

    #[test]
    fn canonical_string_format() {
        let s = SeedSpec::new(42).with_replicate(3).with_column(1);
        assert_eq!(s.canonical(), "seed=42;rep=3;col=1;role=col_perm;extra=0");
        let w = s.with_role(StreamRole::WithinSymbolPerm(2)).with_extra(9);
        assert_eq!(
            w.canonical(),
            "seed=42;rep=3;col=1;role=within_symbol_perm;sym=2;extra=9"
        );
        let t = s.with_role(StreamRole::TangExtra(4));
        assert_eq!(t.canonical(), "seed=42;rep=3;col=1;role=tang_extra;sym=4;extra=0");
    }

    #[test]
    fn from_vec_validates_bijection() {
        assert!(Permutation::from_vec(vec![2, 0, 1]).is_ok());
        assert_eq!(
            Permutation::from_vec(vec![0, 0, 1]),
            Err(Error::InvalidPermutation)
        );
        assert_eq!(
            Permutation::from_vec(vec![0, 3]),
            Err(Error::InvalidPermutation)
        );
        assert_eq!(Permutation::from_vec(vec![]), Err(Error::ZeroLength));
    }
}
