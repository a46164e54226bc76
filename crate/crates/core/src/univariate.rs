//! One-variable Bleimann-Butzer-Hahn operators: classical, q- and (p,q)-.
//!
//! The (p,q)-operator evaluates `f` at the nodes
//! `u_k = p^(n-k+1) [k] / ([n-k+1] q^k)` with weights
//! `p^((n-k)(n-k-1)/2) q^(k(k-1)/2) [n k] x^k / prod_{s<n} (p^s + q^s x)`.
//! Nodes near `k = n` are large (the `q^k` in the denominator) and may be
//! `+inf` for extreme parameters; the corresponding weights are then zero.

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, neumaier_sum, ratio};
use crate::pq::{log_binomial_row, log_integers, log_reduced_integer, PqParams};

/// Nodes and normalized weights of one operator at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeightTable {
    pub n: usize,
    pub params: PqParams,
    pub x: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeWeightTable {
    /// `sum_k g(u_k) w_k` with the nodes and weights of this table.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        weighted_sum(&f, &self.nodes, &self.weights)
    }
}

fn check_point(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "evaluation point must be finite and >= 0, got {x}"
        )))
    }
}

fn check_index(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::Domain(format!("node index k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// Log numerator and log denominator of every node:
/// `ln(p^(n-k+1) [k])` and `ln(q^k [n-k+1])`.
///
/// The generalized operator shifts both parts, so they are kept separate.
pub(crate) fn node_log_parts(n: usize, params: PqParams) -> Vec<(f64, f64)> {
    let log_ints = log_integers(n + 1, params);
    let (ln_p, ln_q) = (params.p().ln(), params.q().ln());
    (0..=n)
        .map(|k| {
            let num = (n - k + 1) as f64 * ln_p + log_ints[k];
            let den = k as f64 * ln_q + log_ints[n - k + 1];
            (num, den)
        })
        .collect()
}

/// All nodes `u_{n,k}`, `k = 0..=n`.
pub fn nodes(n: usize, params: PqParams) -> Vec<f64> {
    node_log_parts(n, params)
        .into_iter()
        .map(|(num, den)| (num - den).exp())
        .collect()
}

/// `u_{n,k} = p^(n-k+1) [k] / ([n-k+1] q^k)`; zero at `k = 0`.
pub fn node(n: usize, k: usize, params: PqParams) -> Result<f64> {
    check_index(n, k)?;
    Ok(nodes(n, params)[k])
}

/// `u/(1+u)` at the k-th node, which simplifies to `p^(n-k+1) [k] / [n+1]`.
pub fn transformed_node(n: usize, k: usize, params: PqParams) -> Result<f64> {
    Ok(ratio(node(n, k, params)?))
}

/// Normalized weights `w_k(x)`.
///
/// Every Euler term and the normalizer share the factor `p^(n(n-1)/2)`; it is
/// cancelled before exponentiation, which leaves the same expressions in the
/// single ratio `r = q/p`:
/// `w_k = r^(k(k-1)/2) [n k]_{1,r} x^k / prod_{s<n} (1 + r^s x)`.
pub(crate) fn normalized_weights(n: usize, params: PqParams, x: f64) -> Vec<f64> {
    let ln_r = params.ln_ratio();
    let ln_x = x.ln();
    let reduced: Vec<f64> = (0..=n).map(|j| log_reduced_integer(j, ln_r)).collect();
    let row = log_binomial_row(n, &reduced);
    let log_norm: f64 = (0..n)
        .map(|s| log_add_exp(0.0, s as f64 * ln_r + ln_x))
        .sum();
    (0..=n)
        .map(|k| {
            if k == 0 {
                return (-log_norm).exp();
            }
            let tri = (k * (k - 1) / 2) as f64;
            (tri * ln_r + row[k] + k as f64 * ln_x - log_norm).exp()
        })
        .collect()
}

/// Node/weight table of the (p,q)-operator of degree `n` at `x`.
pub fn weights(n: usize, params: PqParams, x: f64) -> Result<NodeWeightTable> {
    check_point(x)?;
    Ok(NodeWeightTable {
        n,
        params,
        x,
        nodes: nodes(n, params),
        weights: normalized_weights(n, params, x),
    })
}

pub(crate) fn weighted_sum<F: Fn(f64) -> f64>(
    f: &F,
    nodes: &[f64],
    weights: &[f64],
) -> Result<f64> {
    let mut terms = Vec::with_capacity(nodes.len());
    for (k, (&u, &w)) in nodes.iter().zip(weights).enumerate() {
        let value = f(u);
        if !value.is_finite() {
            return Err(Error::Evaluation {
                location: format!("k = {k}, u = {u}"),
                value,
            });
        }
        terms.push(value * w);
    }
    Ok(neumaier_sum(terms))
}

/// The (p,q)-BBH operator `L_n^{(p,q)}(f; x)`.
pub fn pq_apply<F: Fn(f64) -> f64>(f: F, n: usize, params: PqParams, x: f64) -> Result<f64> {
    check_point(x)?;
    let nodes = nodes(n, params);
    let weights = normalized_weights(n, params, x);
    weighted_sum(&f, &nodes, &weights)
}

/// The q-BBH operator, evaluated directly in the linear domain.
///
/// Shares no code with [`pq_apply`]; the two must agree at `p = 1`. The
/// normalizer `prod (1 + q^s x)` is formed explicitly, so very large `n x`
/// overflows and is reported as such.
pub fn q_apply<F: Fn(f64) -> f64>(f: F, n: usize, q: f64, x: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParams(format!(
            "require 0 < q < 1, got q = {q}"
        )));
    }
    check_point(x)?;

    // [j]_q = 1 + q + ... + q^(j-1)
    let mut q_int = vec![0.0; n + 2];
    let mut q_pow = vec![1.0; n + 2];
    for j in 1..n + 2 {
        q_pow[j] = q_pow[j - 1] * q;
        q_int[j] = q_int[j - 1] + q_pow[j - 1];
    }

    let normalizer: f64 = q_pow[..n].iter().map(|qs| 1.0 + qs * x).product();
    if !normalizer.is_finite() {
        return Err(Error::Overflow {
            quantity: "q-BBH normalizer",
            n,
        });
    }

    // T_0 = 1, T_{k+1} = T_k q^k [n-k] / [k+1] x
    let mut term = 1.0;
    let mut acc = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let u = q_int[k] / (q_int[n - k + 1] * q_pow[k]);
        let value = f(u);
        if !value.is_finite() {
            return Err(Error::Evaluation {
                location: format!("k = {k}, u = {u}"),
                value,
            });
        }
        acc.push(value * term / normalizer);
        if k < n {
            term *= q_pow[k] * q_int[n - k] / q_int[k + 1] * x;
        }
    }
    Ok(neumaier_sum(acc))
}

/// The classical BBH operator
/// `(1+x)^(-n) sum_k f(k/(n-k+1)) C(n,k) x^k`.
pub fn classical_apply<F: Fn(f64) -> f64>(f: F, n: usize, x: f64) -> Result<f64> {
    check_point(x)?;
    let ln_x = x.ln();
    let log_norm = n as f64 * x.ln_1p();
    let mut log_binom = 0.0;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for k in 0..=n {
        nodes.push(k as f64 / (n - k + 1) as f64);
        let log_w = if k == 0 {
            -log_norm
        } else {
            log_binom + k as f64 * ln_x - log_norm
        };
        weights.push(log_w.exp());
        if k < n {
            log_binom += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    weighted_sum(&f, &nodes, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::{euler_log_weights, euler_product, pq_integer};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pq(p: f64, q: f64) -> PqParams {
        PqParams::new(p, q).unwrap()
    }

    fn params_strategy() -> impl Strategy<Value = PqParams> {
        (0.05f64..=1.0, 0.01f64..0.99).prop_map(|(p, frac)| pq(p, p * frac))
    }

    #[test]
    fn node_examples() {
        assert_eq!(node(5, 0, pq(0.9, 0.8)).unwrap(), 0.0);
        assert_relative_eq!(
            node(1, 1, pq(1.0, 0.999)).unwrap(),
            1.0 / 0.999,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            node(3, 3, pq(1.0, 0.5)).unwrap(),
            14.0,
            max_relative = 1e-13
        );
        assert!(node(3, 4, pq(1.0, 0.5)).is_err());
    }

    #[test]
    fn weight_examples() {
        let params = pq(0.9, 0.8);
        let table = weights(2, params, 1.0).unwrap();
        for (w, e) in table.weights.iter().zip([0.9, 1.7, 0.8]) {
            assert_relative_eq!(*w, e / 3.4, max_relative = 1e-13);
        }
        let at_zero = weights(6, params, 0.0).unwrap();
        assert_eq!(at_zero.weights[0], 1.0);
        assert!(at_zero.weights[1..].iter().all(|&w| w == 0.0));
        assert_eq!(at_zero.nodes[0], 0.0);
        assert!(weights(3, params, -1.0).is_err());
    }

    #[test]
    fn reduced_weights_match_direct_euler_route() {
        for &(p, q) in &[(0.9, 0.8), (0.99, 0.3), (0.6, 0.55), (1.0, 0.7)] {
            let params = pq(p, q);
            for n in [1, 5, 17, 40] {
                for x in [0.3, 1.0, 4.0, 24.0] {
                    let table = weights(n, params, x).unwrap();
                    let norm = euler_product(n, params, x);
                    for (k, lw) in euler_log_weights(n, params).into_iter().enumerate() {
                        let direct = lw.value() * x.powi(k as i32) / norm;
                        if direct < f64::MIN_POSITIVE {
                            // the direct route has underflowed; only the log route is meaningful
                            continue;
                        }
                        assert!(
                            (table.weights[k] - direct).abs() <= 1e-12 * direct.max(1e-300),
                            "p={p} q={q} n={n} x={x} k={k} w={} direct={direct}",
                            table.weights[k]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn apply_examples() {
        let params = pq(0.95, 0.9);
        assert_relative_eq!(
            pq_apply(|_| 3.5, 12, params, 2.0).unwrap(),
            3.5,
            max_relative = 1e-14
        );
        assert_eq!(
            pq_apply(|u| (u + 2.0).sin(), 12, params, 0.0).unwrap(),
            2.0_f64.sin()
        );
        let err = pq_apply(|u| if u > 1.0 { f64::NAN } else { u }, 4, params, 1.0).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn first_moment_closed_form() {
        for &(p, q) in &[(0.95, 0.9), (0.7, 0.2), (1.0, 0.5)] {
            let params = pq(p, q);
            for n in [1, 2, 8, 33, 100] {
                let factor = p * pq_integer(n, params) / pq_integer(n + 1, params);
                for x in [0.0, 0.25, 1.0, 7.0, 24.0] {
                    let got = pq_apply(ratio, n, params, x).unwrap();
                    let want = factor * ratio(x);
                    assert!((got - want).abs() <= 1e-10 * want.abs(), "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn q_apply_matches_pq_apply_at_p_one() {
        let fs: [fn(f64) -> f64; 4] = [
            |u| ratio(u),
            |u| ratio(u).powi(2),
            |u| (-u).exp(),
            |u| (std::f64::consts::PI * ratio(u)).sin(),
        ];
        for q in [0.3, 0.8, 0.97] {
            for n in [1, 4, 16, 32] {
                for x in [0.0, 0.5, 3.0, 24.0] {
                    for f in fs {
                        let a = q_apply(f, n, q, x).unwrap();
                        let b = pq_apply(f, n, pq(1.0, q), x).unwrap();
                        assert!(
                            (a - b).abs() <= 1e-12 * a.abs().max(1e-300),
                            "q={q} n={n} x={x}"
                        );
                    }
                }
            }
        }
        assert_relative_eq!(
            q_apply(|_| 1.0, 9, 0.4, 2.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_apply_is_close_to_classical_near_q_one() {
        let q_value = q_apply(ratio, 16, 0.999, 1.0).unwrap();
        let classical = classical_apply(ratio, 16, 1.0).unwrap();
        assert!((q_value - classical).abs() < 1e-2);
    }

    #[test]
    fn classical_examples() {
        assert_relative_eq!(
            classical_apply(|_| 1.0, 20, 3.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let f = |u: f64| (3.0 * u).cos();
        let avg = (f(0.0) + f(1.0)) / 2.0;
        assert_relative_eq!(
            classical_apply(f, 1, 1.0).unwrap(),
            avg,
            max_relative = 1e-14
        );
    }

    #[test]
    fn classical_first_moment_against_brute_force() {
        // Oracle: integer binomials in plain floating point.
        for n in [1usize, 5, 12, 30] {
            for x in [0.0f64, 0.5, 2.0, 9.0] {
                let mut num = 0.0;
                let mut binom = 1.0;
                for k in 0..=n {
                    let u = k as f64 / (n - k + 1) as f64;
                    num += u / (1.0 + u) * binom * x.powi(k as i32);
                    binom = binom * (n - k) as f64 / (k + 1) as f64;
                }
                let brute = num / (1.0 + x).powi(n as i32);
                let closed = n as f64 / (n + 1) as f64 * ratio(x);
                assert_relative_eq!(brute, closed, max_relative = 1e-12, epsilon = 1e-300);
                assert_relative_eq!(
                    classical_apply(ratio, n, x).unwrap(),
                    closed,
                    max_relative = 1e-12,
                    epsilon = 1e-300
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn partition_of_unity(params in params_strategy(), n in 0usize..=128, x in 0.0f64..50.0) {
            let table = weights(n, params, x).unwrap();
            let total: f64 = neumaier_sum(table.weights.iter().copied());
            prop_assert!((total - 1.0).abs() <= 1e-12, "sum = {}", total);
            prop_assert!(table.weights.iter().all(|&w| w >= 0.0));
            prop_assert_eq!(table.nodes[0], 0.0);
        }

        #[test]
        fn transformed_node_simplifies(params in params_strategy(), n in 1usize..=64, kf in 0.0f64..1.0) {
            let k = ((n as f64) * kf).round() as usize;
            let t = transformed_node(n, k, params).unwrap();
            let want = params.p().powi((n - k + 1) as i32) * pq_integer(k, params) / pq_integer(n + 1, params);
            prop_assert!((t - want).abs() <= 1e-12 * want.max(1e-300), "t={} want={}", t, want);
        }

        #[test]
        fn positive_and_monotone(params in params_strategy(), n in 1usize..=40, x in 0.0f64..30.0, shift in 0.0f64..2.0) {
            let f = |u: f64| (ratio(u) * 5.0).sin().abs();
            let g = |u: f64| f(u) + shift * ratio(u);
            let lf = pq_apply(f, n, params, x).unwrap();
            let lg = pq_apply(g, n, params, x).unwrap();
            prop_assert!(lf >= 0.0);
            prop_assert!(lf <= lg + 1e-15);
        }

        #[test]
        fn linear_in_f(params in params_strategy(), n in 1usize..=40, x in 0.0f64..30.0, a in -3.0f64..3.0) {
            let f = |u: f64| ratio(u);
            let g = |u: f64| (-u).exp();
            let combined = pq_apply(|u| a * f(u) + g(u), n, params, x).unwrap();
            let separate = a * pq_apply(f, n, params, x).unwrap() + pq_apply(g, n, params, x).unwrap();
            prop_assert!((combined - separate).abs() <= 1e-13);
        }
    }
}
