//! The randomization pipeline A -> A* -> A** -> A***.
//!
//! Stage 1 permutes the symbols of each column independently. Stage 2
//! expands each symbol into q distinct fine levels, turning the strength-2
//! array over q symbols into a strength-1 array over q^2 symbols (a Latin
//! hypercube skeleton). Stage 3 re-randomizes the within-symbol level
//! assignment per column with fresh permutations, preserving both the
//! Latin property and the projection back onto A*.

use crate::error::{Error, Result};
use crate::oa::{OrthogonalArray, Stage};
use crate::seed::{uniform_permutation, Permutation, SeedSpec, StreamRole};

fn require_stage(a: &OrthogonalArray, expected: Stage) -> Result<()> {
    if a.stage() != expected {
        return Err(Error::WrongStage {
            expected,
            got: a.stage(),
        });
    }
    Ok(())
}

/// A -> A*: applies an independent uniform symbol permutation to each
/// column. The result is again a strength-2 array.
pub fn randomize_symbols(a: &OrthogonalArray, seed: &SeedSpec) -> Result<OrthogonalArray> {
    require_stage(a, Stage::Base)?;
    let perms: Vec<Permutation> = (0..a.d())
        .map(|j| {
            uniform_permutation(
                &seed.with_column(j as u32).with_role(StreamRole::ColPerm),
                a.q() as usize,
            )
        })
        .collect::<Result<_>>()?;
    randomize_symbols_with(a, &perms)
}

pub(crate) fn randomize_symbols_with(
    a: &OrthogonalArray,
    perms: &[Permutation],
) -> Result<OrthogonalArray> {
    require_stage(a, Stage::Base)?;
    if perms.len() != a.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: perms.len(),
        });
    }
    Ok(a.map_entries(Stage::Randomized, |_, j, e| perms[j].apply(e)))
}

/// Per column, the row indices carrying each symbol, in row order.
fn symbol_groups(a: &OrthogonalArray, col: usize) -> Result<Vec<Vec<usize>>> {
    let q = a.q() as usize;
    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(q); q];
    for i in 0..a.n() {
        groups[a.get(i, col) as usize / (a.symbol_count() as usize / q)].push(i);
    }
    for (sym, g) in groups.iter().enumerate() {
        if g.len() != a.n() / q {
            return Err(Error::UnbalancedColumn {
                col,
                sym: sym as u32,
                got: g.len(),
                want: a.n() / q,
            });
        }
    }
    Ok(groups)
}

/// A* -> A**: for each column and each symbol k, the q positions carrying
/// k receive a uniformly random arrangement of {kq, .., (k+1)q - 1}. Every
/// column of the result is a permutation of {0, .., q^2 - 1} and
/// floor(A** / q) recovers A*.
pub fn expand_to_latin(a_star: &OrthogonalArray, seed: &SeedSpec) -> Result<OrthogonalArray> {
    require_stage(a_star, Stage::Randomized)?;
    if a_star.t() != 2 {
        return Err(Error::WrongStrength {
            expected: 2,
            got: a_star.t(),
        });
    }
    let perms = draw_level_perms(a_star, seed, StreamRole::WithinSymbolPerm)?;
    expand_to_latin_with(a_star, &perms)
}

pub(crate) fn expand_to_latin_with(
    a_star: &OrthogonalArray,
    perms: &[Vec<Permutation>],
) -> Result<OrthogonalArray> {
    require_stage(a_star, Stage::Randomized)?;
    let q = a_star.q();
    let mut entries = vec![0u32; a_star.n() * a_star.d()];
    for j in 0..a_star.d() {
        let groups = symbol_groups(a_star, j)?;
        for (sym, rows) in groups.iter().enumerate() {
            for (pos, &i) in rows.iter().enumerate() {
                entries[i * a_star.d() + j] =
                    sym as u32 * q + perms[j][sym].apply(pos as u32);
            }
        }
    }
    OrthogonalArray::new(entries, a_star.n(), a_star.d(), q, a_star.t(), Stage::Expanded)
}

/// A** -> A***: per column and symbol group, composes a fresh uniform
/// permutation onto the within-symbol level assignment. Latin columns and
/// the floor(A*** / q) = A* projection both survive.
pub fn tang_randomize(a_dd: &OrthogonalArray, seed: &SeedSpec) -> Result<OrthogonalArray> {
    require_stage(a_dd, Stage::Expanded)?;
    let perms = draw_level_perms(a_dd, seed, StreamRole::TangExtra)?;
    tang_randomize_with(a_dd, &perms)
}

pub(crate) fn tang_randomize_with(
    a_dd: &OrthogonalArray,
    perms: &[Vec<Permutation>],
) -> Result<OrthogonalArray> {
    require_stage(a_dd, Stage::Expanded)?;
    let q = a_dd.q();
    Ok(a_dd.map_entries(Stage::Tang, |_, j, e| {
        let sym = e / q;
        sym * q + perms[j][sym as usize].apply(e % q)
    }))
}

fn draw_level_perms(
    a: &OrthogonalArray,
    seed: &SeedSpec,
    role: impl Fn(u32) -> StreamRole,
) -> Result<Vec<Vec<Permutation>>> {
    (0..a.d())
        .map(|j| {
            (0..a.q())
                .map(|sym| {
                    uniform_permutation(
                        &seed.with_column(j as u32).with_role(role(sym)),
                        a.q() as usize,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}
