//! Exact rational re-implementation of the identities, used as zero-tolerance
//! ground truth at small degrees.
//!
//! Everything here is deliberately naive: products are expanded literally and
//! binomials come from factorial quotients, so that the code shares no
//! algorithmic shortcut with the floating-point path it is checking.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bivariate::MomentIndex;
use crate::error::{Error, Result};
use crate::pq::PqParams;

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Largest univariate degree accepted by [`exact_identity_check`].
pub const MAX_UNIVARIATE_DEGREE: usize = 10;
/// Largest per-axis degree for the bivariate identities.
pub const MAX_BIVARIATE_DEGREE: usize = 6;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

/// Nearest double to an exact rational.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact parameters with `0 < q < p <= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactParams {
    p: Rational,
    q: Rational,
}

impl ExactParams {
    pub fn new(p: Rational, q: Rational) -> Result<Self> {
        if !(q.is_positive() && q < p && p <= Rational::one()) {
            return Err(Error::InvalidParams(format!(
                "require 0 < q < p <= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(ExactParams { p, q })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    /// The nearest double-precision parameters.
    pub fn to_float(&self) -> Result<PqParams> {
        PqParams::new(to_f64(&self.p), to_f64(&self.q))
    }
}

impl fmt::Display for ExactParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p = {}, q = {})", self.p, self.q)
    }
}

/// `[n] = sum_{j<n} p^(n-1-j) q^j`, which equals `(p^n - q^n)/(p - q)`.
pub fn exact_pq_integer(n: usize, params: &ExactParams) -> Rational {
    (0..n).fold(Rational::zero(), |acc, j| {
        acc + pow(&params.p, n - 1 - j) * pow(&params.q, j)
    })
}

pub fn exact_pq_factorial(n: usize, params: &ExactParams) -> Rational {
    (1..=n).fold(Rational::one(), |acc, j| acc * exact_pq_integer(j, params))
}

/// `[n]! / ([k]! [n-k]!)`; zero for `k > n`.
pub fn exact_pq_binomial(n: usize, k: usize, params: &ExactParams) -> Rational {
    if k > n {
        return Rational::zero();
    }
    exact_pq_factorial(n, params)
        / (exact_pq_factorial(k, params) * exact_pq_factorial(n - k, params))
}

/// The unnormalized Euler coefficient `p^((n-k)(n-k-1)/2) q^(k(k-1)/2) [n k]`.
pub fn exact_euler_coefficient(n: usize, k: usize, params: &ExactParams) -> Rational {
    let tri = |m: usize| m * m.saturating_sub(1) / 2;
    pow(&params.p, tri(n - k)) * pow(&params.q, tri(k)) * exact_pq_binomial(n, k, params)
}

/// `prod_{s<n} (p^s + q^s x)`.
pub fn exact_euler_product(n: usize, params: &ExactParams, x: &Rational) -> Rational {
    (0..n).fold(Rational::one(), |acc, s| {
        acc * (pow(&params.p, s) + pow(&params.q, s) * x)
    })
}

/// The expanded side of the Euler identity.
pub fn exact_euler_sum(n: usize, params: &ExactParams, x: &Rational) -> Rational {
    (0..=n).fold(Rational::zero(), |acc, k| {
        acc + exact_euler_coefficient(n, k, params) * pow(x, k)
    })
}

/// Nodes `p^(n-k+1) [k] / ([n-k+1] q^k)`.
pub fn exact_nodes(n: usize, params: &ExactParams) -> Vec<Rational> {
    (0..=n)
        .map(|k| {
            pow(&params.p, n - k + 1) * exact_pq_integer(k, params)
                / (exact_pq_integer(n - k + 1, params) * pow(&params.q, k))
        })
        .collect()
}

/// Normalized weights at `x`.
pub fn exact_weights(n: usize, params: &ExactParams, x: &Rational) -> Vec<Rational> {
    let norm = exact_euler_product(n, params, x);
    (0..=n)
        .map(|k| exact_euler_coefficient(n, k, params) * pow(x, k) / &norm)
        .collect()
}

/// The univariate operator over the rationals.
pub fn exact_apply<F>(f: F, n: usize, params: &ExactParams, x: &Rational) -> Rational
where
    F: Fn(&Rational) -> Rational,
{
    let nodes = exact_nodes(n, params);
    exact_weights(n, params, x)
        .iter()
        .zip(&nodes)
        .fold(Rational::zero(), |acc, (w, u)| acc + w * f(u))
}

/// Degrees and parameters of an exact bivariate operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSpec {
    pub n1: usize,
    pub n2: usize,
    pub params1: ExactParams,
    pub params2: ExactParams,
}

/// The bivariate double sum over the rationals.
pub fn exact_apply2<F>(f: F, spec: &ExactSpec, x: &Rational, y: &Rational) -> Rational
where
    F: Fn(&Rational, &Rational) -> Rational,
{
    let (u, v) = (
        exact_nodes(spec.n1, &spec.params1),
        exact_nodes(spec.n2, &spec.params2),
    );
    let (w1, w2) = (
        exact_weights(spec.n1, &spec.params1, x),
        exact_weights(spec.n2, &spec.params2, y),
    );
    let mut acc = Rational::zero();
    for (uk, wu) in u.iter().zip(&w1) {
        for (vk, wv) in v.iter().zip(&w2) {
            acc += f(uk, vk) * wu * wv;
        }
    }
    acc
}

/// `A_{n1}^x (B_{n2}^y f)` when `x_outer` is set, otherwise `B_{n2}^y (A_{n1}^x f)`,
/// built from [`exact_apply`] on each axis.
pub fn exact_apply2_composed<F>(
    f: F,
    spec: &ExactSpec,
    x: &Rational,
    y: &Rational,
    x_outer: bool,
) -> Rational
where
    F: Fn(&Rational, &Rational) -> Rational,
{
    if x_outer {
        exact_apply(
            |u| exact_apply(|v| f(u, v), spec.n2, &spec.params2, y),
            spec.n1,
            &spec.params1,
            x,
        )
    } else {
        exact_apply(
            |v| exact_apply(|u| f(u, v), spec.n1, &spec.params1, x),
            spec.n2,
            &spec.params2,
            y,
        )
    }
}

/// `(u/(1+u))^i (v/(1+v))^j`.
pub fn exact_test_function(i: u32, j: u32, u: &Rational, v: &Rational) -> Rational {
    let one = Rational::one();
    pow(&(u / (&one + u)), i as usize) * pow(&(v / (&one + v)), j as usize)
}

/// A non-separable rational function used for the tensor-composition identity.
pub fn exact_probe_function(u: &Rational, v: &Rational) -> Rational {
    (u * v + int(2) * u + int(1)) / (int(1) + u + v * v)
}

/// Which statement of the closed-form moments to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentForm {
    /// The identities that actually hold.
    Corrected,
    /// The statement as typeset: no leading `p` in the first moment, `[n2+1]`
    /// in its denominator, and `p q^2` in the second-moment coefficient.
    Printed,
}

fn exact_first_moment(n: usize, params: &ExactParams, x: &Rational) -> Rational {
    params.p.clone() * exact_pq_integer(n, params) / exact_pq_integer(n + 1, params)
        * (x / (int(1) + x))
}

fn exact_second_moment(
    n: usize,
    params: &ExactParams,
    x: &Rational,
    lead_p_power: usize,
) -> Rational {
    let (p, q) = (&params.p, &params.q);
    let int_n = exact_pq_integer(n, params);
    let int_nm1 = if n == 0 {
        Rational::zero()
    } else {
        exact_pq_integer(n - 1, params)
    };
    let int_n1_sq = pow(&exact_pq_integer(n + 1, params), 2);
    let t = x / (int(1) + x);
    let lead = pow(p, lead_p_power) * q * q * &int_n * int_nm1 / &int_n1_sq;
    let tail = pow(p, n + 1) * int_n / int_n1_sq;
    lead * (&t * x / (p + q * x)) + tail * t
}

/// Closed-form moment values over the rationals.
pub fn exact_moment_closed(
    spec: &ExactSpec,
    index: MomentIndex,
    form: MomentForm,
    x: &Rational,
    y: &Rational,
) -> Rational {
    let printed = form == MomentForm::Printed;
    let lead = if printed { 1 } else { 2 };
    match index {
        MomentIndex::E00 => Rational::one(),
        MomentIndex::E10 if printed => {
            exact_pq_integer(spec.n1, &spec.params1) / exact_pq_integer(spec.n2 + 1, &spec.params1)
                * (x / (int(1) + x))
        }
        MomentIndex::E01 if printed => {
            exact_pq_integer(spec.n2, &spec.params2) / exact_pq_integer(spec.n2 + 1, &spec.params2)
                * (y / (int(1) + y))
        }
        MomentIndex::E10 => exact_first_moment(spec.n1, &spec.params1, x),
        MomentIndex::E01 => exact_first_moment(spec.n2, &spec.params2, y),
        MomentIndex::E20 => exact_second_moment(spec.n1, &spec.params1, x, lead),
        MomentIndex::E02 => exact_second_moment(spec.n2, &spec.params2, y, lead),
    }
}

/// Identities checked by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityId {
    /// `prod (p^s + q^s x) = sum of Euler coefficients times x^k`
    Euler15,
    /// `q^k [n-k+1] = [n+1] - p^(n-k+1) [k]`
    Relation16,
    /// Closed-form moments of the bivariate operator.
    Moment(MomentIndex),
    /// Both composition orders equal the double sum.
    Tensor22,
}

impl IdentityId {
    pub const ALL: [IdentityId; 8] = [
        IdentityId::Euler15,
        IdentityId::Relation16,
        IdentityId::Moment(MomentIndex::E00),
        IdentityId::Moment(MomentIndex::E10),
        IdentityId::Moment(MomentIndex::E01),
        IdentityId::Moment(MomentIndex::E20),
        IdentityId::Moment(MomentIndex::E02),
        IdentityId::Tensor22,
    ];

    pub fn is_bivariate(self) -> bool {
        matches!(self, IdentityId::Moment(_) | IdentityId::Tensor22)
    }

    pub fn degree_limit(self) -> usize {
        if self.is_bivariate() {
            MAX_BIVARIATE_DEGREE
        } else {
            MAX_UNIVARIATE_DEGREE
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityId::Euler15 => f.write_str("euler_15"),
            IdentityId::Relation16 => f.write_str("relation_16"),
            IdentityId::Moment(m) => {
                let (i, j) = m.pair();
                write!(f, "moment_{i}{j}")
            }
            IdentityId::Tensor22 => f.write_str("tensor_22"),
        }
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_15" => Ok(IdentityId::Euler15),
            "relation_16" => Ok(IdentityId::Relation16),
            "tensor_22" => Ok(IdentityId::Tensor22),
            _ => {
                let digits = s.strip_prefix("moment_").filter(|d| d.len() == 2);
                let index = digits.and_then(|d| {
                    let mut it = d.chars().map(|c| c.to_digit(10));
                    match (it.next().flatten(), it.next().flatten()) {
                        (Some(i), Some(j)) => MomentIndex::from_pair(i, j).ok(),
                        _ => None,
                    }
                });
                index
                    .map(IdentityId::Moment)
                    .ok_or_else(|| Error::Domain(format!("unknown identity id '{s}'")))
            }
        }
    }
}

/// One exact input. Univariate identities read `n1`, `k`, `params1` and `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityInput {
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub params1: ExactParams,
    pub params2: ExactParams,
    pub x: Rational,
    pub y: Rational,
}

impl IdentityInput {
    pub fn univariate(n: usize, k: usize, params: ExactParams, x: Rational) -> Self {
        IdentityInput {
            n1: n,
            n2: n,
            k,
            params1: params.clone(),
            params2: params,
            x: x.clone(),
            y: x,
        }
    }

    pub fn bivariate(spec: ExactSpec, x: Rational, y: Rational) -> Self {
        IdentityInput {
            n1: spec.n1,
            n2: spec.n2,
            k: 0,
            params1: spec.params1,
            params2: spec.params2,
            x,
            y,
        }
    }

    pub fn spec(&self) -> ExactSpec {
        ExactSpec {
            n1: self.n1,
            n2: self.n2,
            params1: self.params1.clone(),
            params2: self.params2.clone(),
        }
    }
}

impl fmt::Display for IdentityInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n1 = {}, n2 = {}, k = {}, params1 = {}, params2 = {}, x = {}, y = {}",
            self.n1, self.n2, self.k, self.params1, self.params2, self.x, self.y
        )
    }
}

/// Outcome of one exact check. On failure both sides are kept for the report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Witness {
    fn compare(lhs: Rational, rhs: Rational) -> Self {
        Witness {
            holds: lhs == rhs,
            lhs,
            rhs,
        }
    }
}

fn check_limits(id: IdentityId, input: &IdentityInput) -> Result<()> {
    let limit = id.degree_limit();
    let degrees_ok = if id.is_bivariate() {
        (1..=limit).contains(&input.n1) && (1..=limit).contains(&input.n2)
    } else {
        input.n1 <= limit
    };
    if !degrees_ok {
        return Err(Error::Precondition(format!(
            "{id}: degrees must lie in [1, {limit}], got {input}"
        )));
    }
    if id == IdentityId::Relation16 && input.k > input.n1 {
        return Err(Error::Precondition(format!(
            "{id}: k = {} exceeds n = {}",
            input.k, input.n1
        )));
    }
    if input.x.is_negative() || input.y.is_negative() {
        return Err(Error::Precondition(format!(
            "{id}: points must be >= 0, got {input}"
        )));
    }
    Ok(())
}

/// Evaluates both sides of `id` exactly.
pub fn exact_identity_check(id: IdentityId, input: &IdentityInput) -> Result<Witness> {
    check_identity_with(id, input, MomentForm::Corrected)
}

/// As [`exact_identity_check`], but with the moment statement chosen by `form`.
pub fn check_identity_with(
    id: IdentityId,
    input: &IdentityInput,
    form: MomentForm,
) -> Result<Witness> {
    check_limits(id, input)?;
    let IdentityInput {
        n1: n,
        k,
        params1: params,
        x,
        y,
        ..
    } = input;
    let witness = match id {
        IdentityId::Euler15 => Witness::compare(
            exact_euler_product(*n, params, x),
            exact_euler_sum(*n, params, x),
        ),
        IdentityId::Relation16 => {
            let lhs = pow(&params.q, *k) * exact_pq_integer(n - k + 1, params);
            let rhs = exact_pq_integer(n + 1, params)
                - pow(&params.p, n - k + 1) * exact_pq_integer(*k, params);
            Witness::compare(lhs, rhs)
        }
        IdentityId::Moment(index) => {
            let spec = input.spec();
            let (i, j) = index.pair();
            let lhs = exact_apply2(|u, v| exact_test_function(i, j, u, v), &spec, x, y);
            Witness::compare(lhs, exact_moment_closed(&spec, index, form, x, y))
        }
        IdentityId::Tensor22 => {
            let spec = input.spec();
            let lhs = exact_apply2(exact_probe_function, &spec, x, y);
            let a_over_b = exact_apply2_composed(exact_probe_function, &spec, x, y, true);
            let rhs = if a_over_b == lhs {
                exact_apply2_composed(exact_probe_function, &spec, x, y, false)
            } else {
                a_over_b
            };
            Witness::compare(lhs, rhs)
        }
    };
    Ok(witness)
}

fn random_params<R: Rng>(rng: &mut R) -> ExactParams {
    // small denominators keep the expanded sums tractable
    let d = rng.random_range(2..=12i64);
    let pn = rng.random_range(2..=d);
    let qn = rng.random_range(1..pn);
    ExactParams::new(rational(pn, d), rational(qn, d)).expect("sampled 0 < q < p <= 1")
}

fn random_point<R: Rng>(rng: &mut R) -> Rational {
    rational(rng.random_range(0..=24), rng.random_range(1..=6))
}

/// A pseudo-random input within the limits of `id`.
pub fn random_input<R: Rng>(id: IdentityId, rng: &mut R) -> IdentityInput {
    if id.is_bivariate() {
        let n1 = rng.random_range(1..=MAX_BIVARIATE_DEGREE);
        let n2 = rng.random_range(1..=MAX_BIVARIATE_DEGREE);
        let spec = ExactSpec {
            n1,
            n2,
            params1: random_params(rng),
            params2: random_params(rng),
        };
        IdentityInput::bivariate(spec, random_point(rng), random_point(rng))
    } else {
        let n = rng.random_range(0..=MAX_UNIVARIATE_DEGREE);
        let k = rng.random_range(0..=n);
        IdentityInput::univariate(n, k, random_params(rng), random_point(rng))
    }
}
