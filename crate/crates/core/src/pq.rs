//! (p,q)-integers, factorials, binomial coefficients and the (p,q)-Euler identity.
//!
//! Every quantity here has a log-domain counterpart. The Euler weights
//! `p^((n-k)(n-k-1)/2) q^(k(k-1)/2) [n k]_{p,q}` decay quadratically in the
//! exponent and underflow long before the degrees used by the operators, so the
//! log route is the authoritative one and the linear-domain functions are thin
//! wrappers over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, log_sum_exp, neumaier_sum};

/// A validated parameter pair with `0 < q < p <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PqParams {
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: f64,
    q: f64,
}

impl TryFrom<RawParams> for PqParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        PqParams::new(raw.p, raw.q)
    }
}

impl From<PqParams> for RawParams {
    fn from(params: PqParams) -> Self {
        RawParams {
            p: params.p,
            q: params.q,
        }
    }
}

impl PqParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParams(format!(
                "p and q must be finite (p = {p}, q = {q})"
            )));
        }
        if !(q > 0.0 && q < p && p <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "require 0 < q < p <= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(PqParams { p, q })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `ln(q / p)`, computed from the exact difference `q - p` so that it keeps
    /// full relative accuracy when `q` is close to `p`.
    #[inline]
    pub(crate) fn ln_ratio(&self) -> f64 {
        ((self.q - self.p) / self.p).ln_1p()
    }
}

/// Natural log of a strictly positive weight.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogWeight(f64);

impl LogWeight {
    pub fn from_ln(ln: f64) -> Self {
        LogWeight(ln)
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    /// The represented weight; may underflow to zero even when the log is finite.
    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

/// `ln [m]_{1,r}` where `ln_r = ln r < 0`, i.e. the log of `1 + r + ... + r^(m-1)`.
#[inline]
pub(crate) fn log_reduced_integer(m: usize, ln_r: f64) -> f64 {
    match m {
        0 => f64::NEG_INFINITY,
        1 => 0.0,
        _ => ((m as f64 * ln_r).exp_m1() / ln_r.exp_m1()).ln(),
    }
}

/// `ln [n]_{p,q}`; `-inf` for `n = 0`.
///
/// Uses `[n]_{p,q} = p^(n-1) (1 - r^n) / (1 - r)` with `r = q/p`, evaluated with
/// `expm1` so there is no cancellation when `q` approaches `p`.
pub fn log_pq_integer(n: usize, params: PqParams) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    (n - 1) as f64 * params.p.ln() + log_reduced_integer(n, params.ln_ratio())
}

/// `[n]_{p,q} = (p^n - q^n) / (p - q)`, with `[0] = 0`.
pub fn pq_integer(n: usize, params: PqParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let ln_r = params.ln_ratio();
    let geometric = if n == 1 {
        1.0
    } else {
        (n as f64 * ln_r).exp_m1() / ln_r.exp_m1()
    };
    powi(params.p, n - 1) * geometric
}

/// `ln [j]_{p,q}` for `j = 0..=n`.
pub(crate) fn log_integers(n: usize, params: PqParams) -> Vec<f64> {
    (0..=n).map(|j| log_pq_integer(j, params)).collect()
}

/// `ln [n]_{p,q}!`, always finite.
pub fn log_pq_factorial(n: usize, params: PqParams) -> f64 {
    (1..=n).map(|j| log_pq_integer(j, params)).sum()
}

/// `[n]_{p,q}! = [1][2]...[n]`. Fails when the product leaves the double range.
pub fn pq_factorial(n: usize, params: PqParams) -> Result<f64> {
    let value: f64 = (1..=n).map(|j| pq_integer(j, params)).product();
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Overflow {
            quantity: "[n]_{p,q}!",
            n,
        })
    }
}

/// `ln [n k]_{p,q}` via the multiplicative recurrence `prod [n-k+j] / [j]`.
pub fn log_pq_binomial(n: usize, k: usize, params: PqParams) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!(
            "binomial index k = {k} exceeds n = {n}"
        )));
    }
    let k = k.min(n - k);
    Ok((1..=k)
        .map(|j| log_pq_integer(n - k + j, params) - log_pq_integer(j, params))
        .sum())
}

/// `[n k]_{p,q} = [n]! / ([k]! [n-k]!)`.
pub fn pq_binomial(n: usize, k: usize, params: PqParams) -> Result<f64> {
    let value = log_pq_binomial(n, k, params)?.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            quantity: "[n k]_{p,q}",
            n,
        })
    }
}

/// The full row `ln [n k]` for `k = 0..=n`, given `ln [j]` for `j = 0..=n`.
pub(crate) fn log_binomial_row(n: usize, log_ints: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    row.push(acc);
    for k in 0..n {
        acc += log_ints[n - k] - log_ints[k + 1];
        row.push(acc);
    }
    // The recurrence drifts by a few ulps; pin the symmetric end exactly.
    row[n] = 0.0;
    row
}

#[inline]
fn triangular(m: usize) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

/// `ln( p^((n-k)(n-k-1)/2) q^(k(k-1)/2) [n k]_{p,q} )`, the k-th Euler weight.
pub fn euler_weight_log(n: usize, k: usize, params: PqParams) -> Result<LogWeight> {
    let log_binom = log_pq_binomial(n, k, params)?;
    Ok(LogWeight(
        triangular(n - k) * params.p.ln() + triangular(k) * params.q.ln() + log_binom,
    ))
}

/// All Euler weights of degree `n`.
pub fn euler_log_weights(n: usize, params: PqParams) -> Vec<LogWeight> {
    let log_ints = log_integers(n, params);
    let row = log_binomial_row(n, &log_ints);
    let (ln_p, ln_q) = (params.p.ln(), params.q.ln());
    (0..=n)
        .map(|k| LogWeight(triangular(n - k) * ln_p + triangular(k) * ln_q + row[k]))
        .collect()
}

/// `prod_{s=0}^{n-1} (p^s + q^s x)`, the operator normalizer. Equals 1 for `n = 0`.
pub fn euler_product(n: usize, params: PqParams, x: f64) -> f64 {
    let (mut ps, mut qs) = (1.0, 1.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= ps + qs * x;
        ps *= params.p;
        qs *= params.q;
    }
    acc
}

/// `ln` of [`euler_product`], finite for every `n` and `x >= 0`.
pub fn log_euler_product(n: usize, params: PqParams, x: f64) -> f64 {
    let (ln_p, ln_q, ln_x) = (params.p.ln(), params.q.ln(), x.ln());
    (0..n)
        .map(|s| log_add_exp(s as f64 * ln_p, s as f64 * ln_q + ln_x))
        .sum()
}

fn euler_log_terms(n: usize, params: PqParams, x: f64) -> Vec<f64> {
    let ln_x = x.ln();
    euler_log_weights(n, params)
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            if k == 0 {
                w.ln()
            } else {
                w.ln() + k as f64 * ln_x
            }
        })
        .collect()
}

/// `sum_k p^((n-k)(n-k-1)/2) q^(k(k-1)/2) [n k]_{p,q} x^k`.
///
/// Terms are exponentiated from their logs and accumulated largest first with
/// compensated summation. Equal to [`euler_product`] by the (p,q)-Euler identity.
pub fn euler_sum(n: usize, params: PqParams, x: f64) -> f64 {
    let mut terms: Vec<f64> = euler_log_terms(n, params, x)
        .into_iter()
        .map(f64::exp)
        .collect();
    terms.sort_by(|a, b| b.total_cmp(a));
    neumaier_sum(terms)
}

/// `ln` of [`euler_sum`], finite for every `n` and `x >= 0`.
pub fn log_euler_sum(n: usize, params: PqParams, x: f64) -> f64 {
    log_sum_exp(&euler_log_terms(n, params, x))
}

/// `q^k [n-k+1] - ([n+1] - p^(n-k+1) [k])`, which vanishes identically.
pub fn relation_16_residual(n: usize, k: usize, params: PqParams) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!(
            "relation index k = {k} exceeds n = {n}"
        )));
    }
    let lhs = powi(params.q, k) * pq_integer(n - k + 1, params);
    let rhs = pq_integer(n + 1, params) - powi(params.p, n - k + 1) * pq_integer(k, params);
    Ok(lhs - rhs)
}

/// Both evaluations of the (p,q)-power `(ax + by)^n_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProduct {
    /// `prod_{s<n} (p^s a x + q^s b y)`
    pub product: f64,
    /// The expanded binomial sum.
    pub sum: f64,
    /// `|product - sum|` relative to the sum of absolute expansion terms.
    pub discrepancy: f64,
}

/// `(ax + by)^n_{p,q}` in product form, with the expansion computed alongside.
pub fn pq_power_product(
    n: usize,
    params: PqParams,
    a: f64,
    b: f64,
    x: f64,
    y: f64,
) -> PowerProduct {
    let (ax, by) = (a * x, b * y);
    let (mut ps, mut qs) = (1.0, 1.0);
    let mut product = 1.0;
    for _ in 0..n {
        product *= ps * ax + qs * by;
        ps *= params.p;
        qs *= params.q;
    }

    let weights = euler_log_weights(n, params);
    let terms: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(k, w)| w.value() * powi(ax, n - k) * powi(by, k))
        .collect();
    let scale = neumaier_sum(terms.iter().map(|t| t.abs()));
    let sum = neumaier_sum(terms.iter().copied());
    let discrepancy = if scale == 0.0 {
        (product - sum).abs()
    } else {
        (product - sum).abs() / scale
    };
    PowerProduct {
        product,
        sum,
        discrepancy,
    }
}

#[inline]
pub(crate) fn powi(base: f64, exp: usize) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}
