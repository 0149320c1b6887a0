//! Base-q Haar multiresolution layer: the piecewise-constant basis
//! functions psi_{k,t,c}, tensor-product inner products against an
//! integrand, and the cell-anchored nu coefficients that discretize the
//! ANOVA decomposition digit by digit.

use crate::error::{Error, Result};
use crate::integrand::{for_each_node, BlockSum, Integrand, MAX_TENSOR_DIM};
use std::collections::BTreeMap;

/// Default truncation for nu coefficients: the first two base-q digits.
pub const DEFAULT_NU_TRUNCATION: u32 = 2;

/// Univariate basis index: level k >= 0, shift t in {0..q^k}, digit c in
/// {0..q}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HaarIndex {
    pub level: u32,
    pub shift: u64,
    pub digit: u32,
}

impl HaarIndex {
    pub fn new(level: u32, shift: u64, digit: u32) -> Self {
        HaarIndex {
            level,
            shift,
            digit,
        }
    }
}

/// Multivariate product index: column -> univariate index, each column at
/// most once (guaranteed by the map).
pub type ProductHaarIndex = BTreeMap<usize, HaarIndex>;

/// Truncation pattern for a nu coefficient: per column j, the leading
/// base-q digits (c_{j,1}, .., c_{j,u_j}) of the anchored cell. An empty
/// digit list means the column is unconstrained (u_j = 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuIndex {
    digits: Vec<Vec<u32>>,
}

impl NuIndex {
    pub fn new(digits: Vec<Vec<u32>>) -> Self {
        NuIndex { digits }
    }

    pub fn d(&self) -> usize {
        self.digits.len()
    }

    /// Truncation level u_j of column j.
    pub fn level(&self, j: usize) -> u32 {
        self.digits[j].len() as u32
    }

    pub fn digits(&self, j: usize) -> &[u32] {
        &self.digits[j]
    }

    /// Columns with u_j >= 1.
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.d()).filter(|&j| self.level(j) > 0).collect()
    }

    /// Left endpoint of the anchored interval in column j:
    /// sum_k c_{j,k} q^{-k}.
    pub fn anchor(&self, j: usize, q: u32) -> f64 {
        let mut a = 0.0;
        let mut scale = 1.0;
        for &c in &self.digits[j] {
            scale /= q as f64;
            a += c as f64 * scale;
        }
        a
    }

    /// Midpoint of the anchored cell in column j, from integer digit
    /// arithmetic. Basis functions at levels below u_j are constant on
    /// the cell, so this evaluation point gives the anchor's basis value
    /// without putting a float product exactly on a cell boundary.
    pub fn cell_midpoint(&self, j: usize, q: u32) -> f64 {
        let mut m = 0u64;
        for &c in &self.digits[j] {
            m = m * q as u64 + c as u64;
        }
        (m as f64 + 0.5) / (q as u64).pow(self.level(j)) as f64
    }

    fn validate(&self, q: u32, d: usize, max_level: u32) -> Result<()> {
        if self.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.d(),
            });
        }
        for j in 0..d {
            if self.level(j) > max_level {
                return Err(Error::TruncationExceeded {
                    level: self.level(j),
                    max: max_level,
                });
            }
            for &c in self.digits(j) {
                if c >= q {
                    return Err(Error::IndexOutOfRange {
                        what: "digit",
                        got: c as u64,
                        max: (q - 1) as u64,
                    });
                }
            }
        }
        Ok(())
    }
}

/// The two-indicator basis function:
/// psi(x) = q^((k+1)/2) on [(qt+c)/q^(k+1), (qt+c+1)/q^(k+1))
/// minus q^((k-1)/2) on [t/q^k, (t+1)/q^k), zero elsewhere.
pub fn haar_psi(q: u32, idx: &HaarIndex, x: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::IndexOutOfRange {
            what: "q",
            got: q as u64,
            max: u64::MAX,
        });
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::IndexOutOfRange {
            what: "x",
            got: x as u64,
            max: 1,
        });
    }
    let shifts = (q as u64).checked_pow(idx.level).ok_or(Error::IndexOutOfRange {
        what: "level",
        got: idx.level as u64,
        max: 40,
    })?;
    if idx.shift >= shifts {
        return Err(Error::IndexOutOfRange {
            what: "shift",
            got: idx.shift,
            max: shifts - 1,
        });
    }
    if idx.digit >= q {
        return Err(Error::IndexOutOfRange {
            what: "digit",
            got: idx.digit as u64,
            max: (q - 1) as u64,
        });
    }
    let k = idx.level as f64;
    let qf = q as f64;
    let coarse_cell = (x * shifts as f64).floor() as u64;
    if coarse_cell != idx.shift {
        return Ok(0.0);
    }
    let fine_cell = (x * (shifts * q as u64) as f64).floor() as u64;
    let mut v = -qf.powf((k - 1.0) / 2.0);
    if fine_cell == idx.shift * q as u64 + idx.digit as u64 {
        v += qf.powf((k + 1.0) / 2.0);
    }
    Ok(v)
}

/// Cell-averaged view of an integrand on an aligned grid: the midpoint
/// quadrature of f collapsed onto q^depth cells per axis. All Haar and nu
/// quantities up to that depth are exact functionals of this tensor.
#[derive(Clone, Debug)]
pub struct HaarAnalyzer {
    q: u32,
    d: usize,
    depth: u32,
    res: usize, // q^depth cells per axis
    cells: Vec<f64>,
    mu: f64,
}

impl HaarAnalyzer {
    /// Builds the cell-mean tensor with an m-per-axis midpoint walk;
    /// `m` must be a multiple of q^depth so grid cells align with Haar
    /// breakpoints.
    pub fn new(f: &Integrand, q: u32, depth: u32, m: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::NonPrimeQ(q));
        }
        let d = f.dim();
        if d > MAX_TENSOR_DIM {
            return Err(Error::DimensionTooLarge {
                d,
                max: MAX_TENSOR_DIM,
            });
        }
        if depth == 0 {
            return Err(Error::TruncationExceeded { level: 0, max: 0 });
        }
        let res = (q as usize).pow(depth);
        if m == 0 || !m.is_multiple_of(res) {
            return Err(Error::GridMisaligned { m, required: res });
        }
        let per_cell = (m / res).pow(d as u32) as f64;
        // Plain accumulation per cell: each cell only ever receives
        // (m/res)^d terms, so round-off stays far below the identity
        // tolerances.
        let mut sums = vec![0.0f64; res.pow(d as u32)];
        let shrink = m / res;
        for_each_node(d, m, |x, idx| {
            let mut cell = 0usize;
            for &i in idx {
                cell = cell * res + i / shrink;
            }
            sums[cell] += f.eval(x);
        });
        let cells: Vec<f64> = sums.iter().map(|s| s / per_cell).collect();
        let mu = crate::stats::pairwise_sum(&cells) / cells.len() as f64;
        Ok(HaarAnalyzer {
            q,
            d,
            depth,
            res,
            cells,
            mu,
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn cell_anchor(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.res as f64
    }

    /// Tensor inner product of f against the product basis function.
    pub fn coefficient(&self, idx: &ProductHaarIndex) -> Result<f64> {
        for (col, hi) in idx {
            if *col >= self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: col + 1,
                });
            }
            if hi.level + 1 > self.depth {
                return Err(Error::GridMisaligned {
                    m: self.res,
                    required: (self.q as usize).pow(hi.level + 1),
                });
            }
        }
        // Per active column, tabulate psi on the res cells; zeros keep the
        // sum sparse.
        let mut tables: Vec<(usize, Vec<f64>)> = Vec::with_capacity(idx.len());
        for (col, hi) in idx {
            let tab: Result<Vec<f64>> = (0..self.res)
                .map(|i| haar_psi(self.q, hi, self.cell_anchor(i)))
                .collect();
            tables.push((*col, tab?));
        }
        let mut acc = BlockSum::new();
        let mut cell_idx = vec![0usize; self.d];
        for flat in 0..self.cells.len() {
            let mut rem = flat;
            for slot in cell_idx.iter_mut().rev() {
                *slot = rem % self.res;
                rem /= self.res;
            }
            let mut w = 1.0;
            for (col, tab) in &tables {
                w *= tab[cell_idx[*col]];
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                acc.add(w * self.cells[flat]);
            }
        }
        Ok(acc.total() / self.cells.len() as f64)
    }

    /// Mean of f over the anchored box prod_j [anchor_j, anchor_j + q^-u_j).
    pub fn box_mean(&self, idx: &NuIndex) -> Result<f64> {
        idx.validate(self.q, self.d, self.depth)?;
        // Per column, the half-open cell range covered by the box.
        let ranges: Vec<(usize, usize)> = (0..self.d)
            .map(|j| {
                let mut lo = 0usize;
                for &c in idx.digits(j) {
                    lo = lo * self.q as usize + c as usize;
                }
                let width = self.res / (self.q as usize).pow(idx.level(j));
                (lo * width, lo * width + width)
            })
            .collect();
        let mut acc = BlockSum::new();
        let mut count = 0usize;
        let mut cell_idx = vec![0usize; self.d];
        self.walk_box(&ranges, 0, &mut cell_idx, &mut acc, &mut count);
        Ok(acc.total() / count as f64)
    }

    fn walk_box(
        &self,
        ranges: &[(usize, usize)],
        axis: usize,
        cell_idx: &mut [usize],
        acc: &mut BlockSum,
        count: &mut usize,
    ) {
        if axis == self.d {
            let mut flat = 0usize;
            for &i in cell_idx.iter() {
                flat = flat * self.res + i;
            }
            acc.add(self.cells[flat]);
            *count += 1;
            return;
        }
        for i in ranges[axis].0..ranges[axis].1 {
            cell_idx[axis] = i;
            self.walk_box(ranges, axis + 1, cell_idx, acc, count);
        }
    }

    /// Closed-form nu coefficient: the sum over basis indices at levels
    /// u_j - 1 of (inner product) x (basis value at the cell anchor).
    pub fn nu(&self, idx: &NuIndex) -> Result<f64> {
        idx.validate(self.q, self.d, self.depth)?;
        let active = idx.active_columns();
        if active.is_empty() {
            return Ok(self.mu);
        }
        // The basis factor vanishes unless the shift pins the anchor's
        // coarse cell, so only the digit sums survive; iterate the full
        // (shift, digit) space and skip zero factors.
        let mut total = 0.0;
        let mut choice: Vec<(u64, u32)> = vec![(0, 0); active.len()];
        self.nu_sum(idx, &active, 0, &mut choice, 1.0, &mut total)?;
        Ok(total)
    }

    fn nu_sum(
        &self,
        idx: &NuIndex,
        active: &[usize],
        pos: usize,
        choice: &mut Vec<(u64, u32)>,
        basis_so_far: f64,
        total: &mut f64,
    ) -> Result<()> {
        if pos == active.len() {
            let mut product_idx = ProductHaarIndex::new();
            for (slot, &col) in active.iter().enumerate() {
                product_idx.insert(
                    col,
                    HaarIndex::new(idx.level(col) - 1, choice[slot].0, choice[slot].1),
                );
            }
            *total += self.coefficient(&product_idx)? * basis_so_far;
            return Ok(());
        }
        let col = active[pos];
        let level = idx.level(col) - 1;
        let anchor = idx.cell_midpoint(col, self.q);
        for shift in 0..(self.q as u64).pow(level) {
            for digit in 0..self.q {
                let hi = HaarIndex::new(level, shift, digit);
                let factor = haar_psi(self.q, &hi, anchor)?;
                if factor == 0.0 {
                    continue;
                }
                choice[pos] = (shift, digit);
                self.nu_sum(idx, active, pos + 1, choice, basis_so_far * factor, total)?;
            }
        }
        Ok(())
    }
}

/// One-shot inner product <f, prod psi> on a fresh aligned grid.
pub fn haar_coefficient(
    f: &Integrand,
    q: u32,
    idx: &ProductHaarIndex,
    m: usize,
) -> Result<f64> {
    let depth = idx.values().map(|hi| hi.level + 1).max().unwrap_or(1);
    let analyzer = HaarAnalyzer::new(f, q, depth, m)?;
    analyzer.coefficient(idx)
}

/// One-shot closed-form nu coefficient with the default digit truncation.
pub fn nu_coefficient(f: &Integrand, q: u32, idx: &NuIndex, m: usize) -> Result<f64> {
    for j in 0..idx.d() {
        if idx.level(j) > DEFAULT_NU_TRUNCATION {
            return Err(Error::TruncationExceeded {
                level: idx.level(j),
                max: DEFAULT_NU_TRUNCATION,
            });
        }
    }
    let analyzer = HaarAnalyzer::new(f, q, DEFAULT_NU_TRUNCATION, m)?;
    analyzer.nu(idx)
}
