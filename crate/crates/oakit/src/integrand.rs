//! Test integrands on [0,1)^d and the reference means: tensor midpoint
//! quadrature for d <= 4 and a plain Monte Carlo fallback.

use crate::error::{Error, Result};
use crate::sampler::sample_srs;
use crate::seed::SeedSpec;
use crate::stats;
use std::fmt;
use std::sync::Arc;

/// Highest dimension the tensor quadrature walks exhaustively.
pub const MAX_TENSOR_DIM: usize = 4;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A pure real-valued function on [0,1)^d plus metadata.
///
/// `smooth` is an attestation that the function has the regularity the
/// normal-limit experiments assume; it is carried, not verified.
#[derive(Clone)]
pub struct Integrand {
    id: String,
    dim: usize,
    known_mu: Option<f64>,
    additive: bool,
    smooth: bool,
    eval: EvalFn,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("known_mu", &self.known_mu)
            .field("additive", &self.additive)
            .field("smooth", &self.smooth)
            .finish()
    }
}

impl Integrand {
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Integrand {
            id: id.into(),
            dim,
            known_mu: None,
            additive: false,
            smooth: false,
            eval: Arc::new(eval),
        }
    }

    pub fn with_known_mu(mut self, mu: f64) -> Self {
        self.known_mu = Some(mu);
        self
    }

    pub fn additive(mut self, yes: bool) -> Self {
        self.additive = yes;
        self
    }

    pub fn smooth(mut self, yes: bool) -> Self {
        self.smooth = yes;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_mu(&self) -> Option<f64> {
        self.known_mu
    }

    pub fn is_additive(&self) -> bool {
        self.additive
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Registered families. `product` is Prod x_j, `additive` is
    /// Sum x_j^2, `centered_product` is Prod (x_j - 1/2), `gaussian_bump`
    /// is exp(-Sum (x_j - 1/2)^2), and `indicator` is the (non-smooth)
    /// corner box Prod 1{x_j < 1/2}.
    pub fn by_id(id: &str, d: usize) -> Result<Integrand> {
        if d == 0 {
            return Err(Error::DimensionTooSmall { d, min: 1 });
        }
        match id {
            "product" => Ok(Integrand::new(id, d, |x: &[f64]| x.iter().product())
                .with_known_mu(0.5f64.powi(d as i32))
                .smooth(true)),
            "additive" => Ok(
                Integrand::new(id, d, |x: &[f64]| x.iter().map(|v| v * v).sum())
                    .with_known_mu(d as f64 / 3.0)
                    .additive(true)
                    .smooth(true),
            ),
            "centered_product" => Ok(Integrand::new(id, d, |x: &[f64]| {
                x.iter().map(|v| v - 0.5).product()
            })
            .with_known_mu(0.0)
            .smooth(true)),
            "gaussian_bump" => {
                // Integral of exp(-(x - 1/2)^2) over [0,1) is sqrt(pi) erf(1/2).
                let axis = std::f64::consts::PI.sqrt() * stats::erf(0.5);
                Ok(Integrand::new(id, d, |x: &[f64]| {
                    (-x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>()).exp()
                })
                .with_known_mu(axis.powi(d as i32))
                .smooth(true))
            }
            "indicator" => Ok(Integrand::new(id, d, |x: &[f64]| {
                if x.iter().all(|&v| v < 0.5) {
                    1.0
                } else {
                    0.0
                }
            })
            .with_known_mu(0.5f64.powi(d as i32))),
            other => Err(Error::UnknownIntegrand(other.to_string())),
        }
    }

    pub fn registry_ids() -> &'static [&'static str] {
        &[
            "product",
            "additive",
            "centered_product",
            "gaussian_bump",
            "indicator",
        ]
    }
}

/// Walks the tensor midpoint grid with m points per axis, calling `visit`
/// with each node. Nodes are ((i_1 + 1/2)/m, ..., (i_d + 1/2)/m).
pub(crate) fn for_each_node(d: usize, m: usize, mut visit: impl FnMut(&[f64], &[usize])) {
    let mut idx = vec![0usize; d];
    let node = |i: usize| (i as f64 + 0.5) / m as f64;
    let mut x: Vec<f64> = idx.iter().map(|&i| node(i)).collect();
    loop {
        visit(&x, &idx);
        // Odometer increment over the last axis.
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < m {
                x[axis] = node(idx[axis]);
                break;
            }
            idx[axis] = 0;
            x[axis] = node(0);
        }
    }
}

/// Tensor midpoint approximation of mu = integral of f over [0,1)^d.
/// Error is O(m^-2) for twice-differentiable f.
pub fn mu_quadrature(f: &Integrand, m: usize) -> Result<f64> {
    if f.dim() > MAX_TENSOR_DIM {
        return Err(Error::DimensionTooLarge {
            d: f.dim(),
            max: MAX_TENSOR_DIM,
        });
    }
    if m == 0 {
        return Err(Error::TooFewValues {
            context: "quadrature points per axis",
            got: 0,
            need: 1,
        });
    }
    let mut acc = BlockSum::new();
    for_each_node(f.dim(), m, |x, _| acc.add(f.eval(x)));
    Ok(acc.total() / (m as f64).powi(f.dim() as i32))
}

/// Monte Carlo mean of f over n iid uniform points: (estimate, standard error).
pub fn mu_mc(f: &Integrand, n: usize, seed: &SeedSpec) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::TooFewValues {
            context: "monte carlo sample",
            got: n,
            need: 2,
        });
    }
    let s = sample_srs(n, f.dim(), seed)?;
    let vals: Vec<f64> = s.rows().map(|r| f.eval(r)).collect();
    let mean = stats::mean(&vals);
    let var = stats::sample_variance(&vals)?;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Streaming accumulator that folds fixed-size blocks through pairwise
/// summation, bounding round-off on very long node walks.
pub(crate) struct BlockSum {
    block: Vec<f64>,
    partials: Vec<f64>,
}

impl BlockSum {
    const BLOCK: usize = 4096;

    pub fn new() -> Self {
        BlockSum {
            block: Vec::new(),
            partials: Vec::new(),
        }
    }

    pub fn add(&mut self, v: f64) {
        self.block.push(v);
        if self.block.len() == Self::BLOCK {
            self.partials.push(stats::pairwise_sum(&self.block));
            self.block.clear();
        }
    }

    pub fn total(&self) -> f64 {
        stats::pairwise_sum(&self.partials) + stats::pairwise_sum(&self.block)
    }
}
