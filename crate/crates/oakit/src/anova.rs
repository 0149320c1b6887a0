//! ANOVA decomposition f = mu + sum f_j + sum f_{k,l} + f_rem on a tensor
//! midpoint grid, with the remainder L2 norm that the variance sweep
//! tracks.
//!
//! Main and bivariate effects are tabulated on the grid and interpolated
//! piecewise constantly; the remainder is evaluated by subtraction, so the
//! decomposition identity holds pointwise by construction.

use crate::error::{Error, Result};
use crate::integrand::{for_each_node, BlockSum, Integrand, MAX_TENSOR_DIM};

/// Decomposition of an integrand into grand mean, main effects, bivariate
/// effects, and remainder, all tabulated at m cells per axis.
#[derive(Clone, Debug)]
pub struct AnovaDecomposition {
    integrand: Integrand,
    d: usize,
    m: usize,
    mu: f64,
    main: Vec<Vec<f64>>,      // d tables of length m
    pair: Vec<Vec<f64>>,      // d(d-1)/2 tables of length m*m, pair-major
    main_l2: Vec<f64>,        // integral of f_j^2
    pair_l2: Vec<f64>,        // integral of f_{k,l}^2
    frem_l2: f64,             // integral of f_rem^2
    var_f: f64,               // integral of (f - mu)^2
}

fn pair_slot(k: usize, l: usize, d: usize) -> usize {
    debug_assert!(k < l && l < d);
    // Position of (k,l) in the lexicographic list of ordered pairs.
    k * d - k * (k + 1) / 2 + (l - k - 1)
}

fn bin(x: f64, m: usize) -> usize {
    ((x * m as f64).floor() as usize).min(m - 1)
}

/// Decomposes `f` on an m-point-per-axis midpoint grid. Requires
/// 3 <= d <= 4.
pub fn decompose(f: &Integrand, m: usize) -> Result<AnovaDecomposition> {
    let d = f.dim();
    if d < 3 {
        return Err(Error::DimensionTooSmall { d, min: 3 });
    }
    if d > MAX_TENSOR_DIM {
        return Err(Error::DimensionTooLarge {
            d,
            max: MAX_TENSOR_DIM,
        });
    }
    if m < 2 {
        return Err(Error::TooFewValues {
            context: "grid points per axis",
            got: m,
            need: 2,
        });
    }
    let cells = (m as f64).powi(d as i32);
    let pairs = d * (d - 1) / 2;

    // Pass 1: grand mean plus marginal sums for every column and pair.
    let mut total = BlockSum::new();
    let mut main_sum = vec![vec![0.0f64; m]; d];
    let mut pair_sum = vec![vec![0.0f64; m * m]; pairs];
    for_each_node(d, m, |x, idx| {
        let v = f.eval(x);
        total.add(v);
        for j in 0..d {
            main_sum[j][idx[j]] += v;
        }
        for k in 0..d {
            for l in k + 1..d {
                pair_sum[pair_slot(k, l, d)][idx[k] * m + idx[l]] += v;
            }
        }
    });
    let mu = total.total() / cells;

    let per_main = cells / m as f64;
    let main: Vec<Vec<f64>> = main_sum
        .iter()
        .map(|col| col.iter().map(|s| s / per_main - mu).collect())
        .collect();

    let per_pair = cells / (m * m) as f64;
    let mut pair = vec![vec![0.0f64; m * m]; pairs];
    for k in 0..d {
        for l in k + 1..d {
            let slot = pair_slot(k, l, d);
            for a in 0..m {
                for b in 0..m {
                    pair[slot][a * m + b] = pair_sum[slot][a * m + b] / per_pair
                        - mu
                        - main[k][a]
                        - main[l][b];
                }
            }
        }
    }

    // Pass 2: L2 norms of variance, effects, and remainder.
    let mut rem_sq = BlockSum::new();
    let mut var_sq = BlockSum::new();
    for_each_node(d, m, |x, idx| {
        let v = f.eval(x);
        var_sq.add((v - mu) * (v - mu));
        let mut r = v - mu;
        for j in 0..d {
            r -= main[j][idx[j]];
        }
        for k in 0..d {
            for l in k + 1..d {
                r -= pair[pair_slot(k, l, d)][idx[k] * m + idx[l]];
            }
        }
        rem_sq.add(r * r);
    });
    let frem_l2 = rem_sq.total() / cells;
    let var_f = var_sq.total() / cells;

    let main_l2: Vec<f64> = main
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>() / m as f64)
        .collect();
    let pair_l2: Vec<f64> = pair
        .iter()
        .map(|tab| tab.iter().map(|v| v * v).sum::<f64>() / (m * m) as f64)
        .collect();

    Ok(AnovaDecomposition {
        integrand: f.clone(),
        d,
        m,
        mu,
        main,
        pair,
        main_l2,
        pair_l2,
        frem_l2,
        var_f,
    })
}

/// Remainder L2 norm of an existing decomposition.
pub fn frem_l2(dec: &AnovaDecomposition) -> f64 {
    dec.frem_l2()
}

impl AnovaDecomposition {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn frem_l2(&self) -> f64 {
        self.frem_l2
    }

    pub fn var_f(&self) -> f64 {
        self.var_f
    }

    /// Quadrature tolerance for identity checks at this grid: 1/m^2.
    /// The constant is sized against the product integrand, whose
    /// remainder norm misses its closed form by about 0.002/m^2, leaving
    /// two orders of margin.
    pub fn tolerance(&self) -> f64 {
        1.0 / (self.m * self.m) as f64
    }

    /// Main effect f_j at x (piecewise constant on the grid).
    pub fn eval_main(&self, j: usize, x: f64) -> f64 {
        self.main[j][bin(x, self.m)]
    }

    /// Bivariate effect f_{k,l}; accepts either argument order.
    pub fn eval_pair(&self, k: usize, l: usize, xk: f64, xl: f64) -> f64 {
        let (k, l, xk, xl) = if k < l { (k, l, xk, xl) } else { (l, k, xl, xk) };
        self.pair[pair_slot(k, l, self.d)][bin(xk, self.m) * self.m + bin(xl, self.m)]
    }

    /// Remainder by subtraction: f(x) - mu - sum f_j - sum f_{k,l}.
    pub fn eval_remainder(&self, x: &[f64]) -> f64 {
        let mut r = self.integrand.eval(x) - self.mu;
        for (j, &xj) in x.iter().enumerate() {
            r -= self.eval_main(j, xj);
        }
        for k in 0..self.d {
            for l in k + 1..self.d {
                r -= self.eval_pair(k, l, x[k], x[l]);
            }
        }
        r
    }

    pub fn main_l2(&self, j: usize) -> f64 {
        self.main_l2[j]
    }

    pub fn pair_l2(&self, k: usize, l: usize) -> f64 {
        let (k, l) = if k < l { (k, l) } else { (l, k) };
        self.pair_l2[pair_slot(k, l, self.d)]
    }

    /// JSON summary: mean, remainder norm, grid size, and the
    /// per-component L2 norms. Grids themselves are not serialized.
    pub fn to_json(&self) -> String {
        let pairs: Vec<serde_json::Value> = (0..self.d)
            .flat_map(|k| (k + 1..self.d).map(move |l| (k, l)))
            .map(|(k, l)| {
                serde_json::json!({
                    "cols": [k, l],
                    "l2": self.pair_l2(k, l),
                })
            })
            .collect();
        let v = serde_json::json!({
            "integrand": self.integrand.id(),
            "d": self.d,
            "m": self.m,
            "mu": self.mu,
            "frem_l2": self.frem_l2,
            "var_f": self.var_f,
            "main_l2": self.main_l2,
            "pair_l2": pairs,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("static json");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::mu_quadrature;

    const FREM_PRODUCT_D3: f64 = 1.0 / 1728.0;

    #[test]
    fn additive_integrand_has_no_interactions() {
        let f = Integrand::by_id("additive", 3).unwrap();
        let dec = decompose(&f, 64).unwrap();
        let tol = dec.tolerance();
        for k in 0..3 {
            for l in k + 1..3 {
                assert!(dec.pair_l2(k, l) < tol * tol, "pair ({k},{l})");
            }
        }
        assert!(dec.frem_l2() <= 1e-10, "frem_l2 = {}", dec.frem_l2());
        // Sup of the remainder over the decomposition's own grid nodes
        // (the tables are grid objects; off-node evaluation carries the
        // piecewise-constant interpolation error).
        let mut sup = 0.0f64;
        for_each_node(3, 64, |x, _| sup = sup.max(dec.eval_remainder(x).abs()));
        assert!(sup <= tol, "sup |f_rem| = {sup}");
    }

    #[test]
    fn product_remainder_matches_closed_form() {
        // For f = x1 x2 x3 the remainder is (x1-1/2)(x2-1/2)(x3-1/2) and
        // its squared norm is (1/12)^3 = 1/1728.
        let f = Integrand::by_id("product", 3).unwrap();
        let dec = decompose(&f, 128).unwrap();
        assert!(
            (dec.frem_l2() - FREM_PRODUCT_D3).abs() < 1e-6,
            "frem_l2 = {}",
            dec.frem_l2()
        );
        // Pointwise check at grid nodes, where the tables are exact.
        let node = |i: usize| (i as f64 + 0.5) / 128.0;
        let x = [node(38), node(89), node(115)];
        let want: f64 = x.iter().map(|v| v - 0.5).product();
        assert!((dec.eval_remainder(&x) - want).abs() < 10.0 * dec.tolerance());
    }

    #[test]
    fn constant_integrand_decomposes_to_zero() {
        let f = Integrand::new("const", 3, |_| 0.25);
        let dec = decompose(&f, 32).unwrap();
        assert!((dec.mu() - 0.25).abs() < 1e-14);
        for j in 0..3 {
            assert!(dec.main_l2(j) < 1e-28);
        }
        assert!(dec.frem_l2() < 1e-28);
        assert!(dec.var_f() < 1e-28);
    }

    #[test]
    fn scaling_the_remainder_scales_its_norm_quadratically() {
        let f = Integrand::new("centered2", 3, |x: &[f64]| {
            2.0 * x.iter().map(|v| v - 0.5).product::<f64>()
        });
        let dec = decompose(&f, 64).unwrap();
        let base = decompose(&Integrand::by_id("centered_product", 3).unwrap(), 64).unwrap();
        assert!(
            (dec.frem_l2() - 4.0 * base.frem_l2()).abs() < 1e-12,
            "{} vs 4 x {}",
            dec.frem_l2(),
            base.frem_l2()
        );
    }

    #[test]
    fn component_integrals_vanish_on_the_grid() {
        let f = Integrand::by_id("gaussian_bump", 3).unwrap();
        let dec = decompose(&f, 36).unwrap();
        let m = 36;
        let tol = dec.tolerance();
        for j in 0..3 {
            let s: f64 = (0..m).map(|a| dec.main[j][a]).sum::<f64>() / m as f64;
            assert!(s.abs() < tol, "main {j} integrates to {s}");
        }
        // Each bivariate effect integrates to zero in each argument.
        for k in 0..3 {
            for l in k + 1..3 {
                for a in 0..m {
                    let row: f64 = (0..m)
                        .map(|b| dec.eval_pair(k, l, (a as f64 + 0.5) / m as f64, (b as f64 + 0.5) / m as f64))
                        .sum::<f64>()
                        / m as f64;
                    assert!(row.abs() < tol, "pair ({k},{l}) row {a}: {row}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_and_pythagoras_on_the_grid() {
        for id in ["product", "additive", "centered_product", "gaussian_bump"] {
            let f = Integrand::by_id(id, 3).unwrap();
            let m = 48;
            let dec = decompose(&f, m).unwrap();
            let tol = 10.0 * dec.tolerance();

            // Pythagoras: var_f = sum of component norms.
            let mut total: f64 = dec.frem_l2();
            for j in 0..3 {
                total += dec.main_l2(j);
            }
            for k in 0..3 {
                for l in k + 1..3 {
                    total += dec.pair_l2(k, l);
                }
            }
            assert!(
                (dec.var_f() - total).abs() < tol,
                "{id}: var {} vs components {total}",
                dec.var_f()
            );

            // Orthogonality of distinct main effects and main vs pair.
            let mut dot_mains = 0.0f64;
            let mut dot_main_pair = 0.0f64;
            let mut dot_pair_rem = 0.0f64;
            for_each_node(3, m, |x, _| {
                dot_mains += dec.eval_main(0, x[0]) * dec.eval_main(1, x[1]);
                dot_main_pair += dec.eval_main(0, x[0]) * dec.eval_pair(0, 1, x[0], x[1]);
                dot_pair_rem += dec.eval_pair(0, 1, x[0], x[1]) * dec.eval_remainder(x);
            });
            let cells = (m * m * m) as f64;
            assert!((dot_mains / cells).abs() < tol, "{id}: <f_0, f_1>");
            assert!((dot_main_pair / cells).abs() < tol, "{id}: <f_0, f_01>");
            assert!((dot_pair_rem / cells).abs() < tol, "{id}: <f_01, f_rem>");
        }
    }

    #[test]
    fn remainder_norm_converges_at_second_order() {
        for id in ["product", "gaussian_bump"] {
            let f = Integrand::by_id(id, 3).unwrap();
            let v32 = decompose(&f, 32).unwrap().frem_l2();
            let v64 = decompose(&f, 64).unwrap().frem_l2();
            let v128 = decompose(&f, 128).unwrap().frem_l2();
            let d1 = (v32 - v64).abs();
            let d2 = (v64 - v128).abs();
            assert!(
                d1 >= 3.0 * d2,
                "{id}: diffs {d1} then {d2} shrink slower than 3x"
            );
        }
    }

    #[test]
    fn decompose_rejects_bad_dimensions() {
        let f2 = Integrand::new("f2", 2, |x: &[f64]| x[0] + x[1]);
        assert!(matches!(
            decompose(&f2, 8),
            Err(Error::DimensionTooSmall { .. })
        ));
        let f5 = Integrand::new("f5", 5, |_| 1.0);
        assert!(matches!(
            decompose(&f5, 8),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn quadrature_and_decomposition_agree_on_mu() {
        let f = Integrand::by_id("gaussian_bump", 3).unwrap();
        let dec = decompose(&f, 64).unwrap();
        let mu = mu_quadrature(&f, 64).unwrap();
        assert!((dec.mu() - mu).abs() < 1e-13);
    }

    #[test]
    fn json_summary_has_the_stable_fields() {
        let f = Integrand::by_id("product", 3).unwrap();
        let dec = decompose(&f, 16).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&dec.to_json()).unwrap();
        for key in ["integrand", "d", "m", "mu", "frem_l2", "var_f", "main_l2", "pair_l2"] {
            assert!(parsed.get(key).is_some(), "missing {key}");
        }
        assert_eq!(parsed["main_l2"].as_array().unwrap().len(), 3);
        assert_eq!(parsed["pair_l2"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn d4_decomposition_works_at_small_grids() {
        let f = Integrand::by_id("product", 4).unwrap();
        let dec = decompose(&f, 24).unwrap();
        // Remainder norm for Prod x_j at d=4 keeps only interactions of
        // order >= 3: (1/3)^4 - closed-form lower terms. Compare against a
        // direct oracle: integral of (Prod(x_j - 1/2) + cross terms)^2 is
        // dominated by (1/12)^4 plus the four order-3 terms (1/12)^3 (1/4).
        let want = (1.0f64 / 12.0).powi(4) + 4.0 * (1.0f64 / 12.0).powi(3) * 0.25;
        assert!(
            (dec.frem_l2() - want).abs() < 1e-5,
            "frem_l2 = {}, want {want}",
            dec.frem_l2()
        );
    }
}
