//! The bivariate (p,q)-BBH operator, its moments, and the shifted family.
//!
//! The operator is a tensor product of two univariate operators, one per axis,
//! each with its own degree and `(p, q)`. Per-axis nodes are materialized once
//! when a [`BivariateOperator`] is built; `f` is evaluated on the node lattice
//! on demand.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, neumaier_sum, ratio};
use crate::pq::{powi, pq_integer, PqParams};
use crate::univariate::{node_log_parts, normalized_weights};

/// Degrees and per-axis parameters of one bivariate operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub n1: usize,
    pub n2: usize,
    pub params1: PqParams,
    pub params2: PqParams,
}

impl OperatorSpec {
    pub fn new(n1: usize, n2: usize, params1: PqParams, params2: PqParams) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParams(format!(
                "degrees must be >= 1, got ({n1}, {n2})"
            )));
        }
        Ok(OperatorSpec {
            n1,
            n2,
            params1,
            params2,
        })
    }

    /// Same degree and parameters on both axes.
    pub fn symmetric(n: usize, params: PqParams) -> Result<Self> {
        Self::new(n, n, params, params)
    }

    pub fn axis(&self, axis: Axis) -> (usize, PqParams) {
        match axis {
            Axis::X => (self.n1, self.params1),
            Axis::Y => (self.n2, self.params2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// An [`OperatorSpec`] with node shifts `gamma` and the b-rule
/// `b_{n,k} = q^k [n-k+1] + beta` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedSpec {
    pub base: OperatorSpec,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl GeneralizedSpec {
    pub fn new(base: OperatorSpec, gamma: (f64, f64), beta: (f64, f64)) -> Result<Self> {
        for (name, v) in [("gamma1", gamma.0), ("gamma2", gamma.1)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        for (name, v) in [("beta1", beta.0), ("beta2", beta.1)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(GeneralizedSpec {
            base,
            gamma1: gamma.0,
            gamma2: gamma.1,
            beta1: beta.0,
            beta2: beta.1,
        })
    }

    /// The plain operator viewed as a generalized one (`gamma = beta = 0`).
    pub fn unshifted(base: OperatorSpec) -> Self {
        GeneralizedSpec {
            base,
            gamma1: 0.0,
            gamma2: 0.0,
            beta1: 0.0,
            beta2: 0.0,
        }
    }

    pub fn gamma(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.gamma1,
            Axis::Y => self.gamma2,
        }
    }

    pub fn beta(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.beta1,
            Axis::Y => self.beta2,
        }
    }

    /// `c_n = [n+1] + beta` for the default b-rule.
    pub fn c_n(&self, axis: Axis) -> f64 {
        let (n, params) = self.base.axis(axis);
        pq_integer(n + 1, params) + self.beta(axis)
    }
}

/// One axis of the tensor product: degree, parameters and cached nodes.
#[derive(Debug, Clone)]
pub struct AxisOperator {
    n: usize,
    params: PqParams,
    nodes: Vec<f64>,
    shifted: bool,
}

impl AxisOperator {
    fn standard(n: usize, params: PqParams) -> Self {
        Self::shifted(n, params, 0.0, 0.0).expect("unshifted nodes are never degenerate")
    }

    /// Nodes `(p^(n-k+1) [k] + gamma) / (q^k [n-k+1] + beta)`.
    ///
    /// Numerator and denominator are formed in the log domain, so with
    /// `gamma = beta = 0` the nodes are bitwise identical to the plain ones.
    fn shifted(n: usize, params: PqParams, gamma: f64, beta: f64) -> Result<Self> {
        if gamma < 0.0 {
            // the k = 0 node would be gamma / b < 0, outside the domain of f
            return Err(Error::DegenerateSpec(format!(
                "gamma = {gamma} yields a negative node"
            )));
        }
        let (ln_gamma, ln_beta) = (gamma.ln(), beta.ln());
        let mut nodes = Vec::with_capacity(n + 1);
        for (k, (num, den)) in node_log_parts(n, params).into_iter().enumerate() {
            let den = log_add_exp(den, ln_beta);
            if den == f64::NEG_INFINITY {
                return Err(Error::DegenerateSpec(format!(
                    "b_(n,k) = 0 at n = {n}, k = {k}"
                )));
            }
            nodes.push((log_add_exp(num, ln_gamma) - den).exp());
        }
        Ok(AxisOperator {
            n,
            params,
            nodes,
            shifted: gamma != 0.0 || beta != 0.0,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> PqParams {
        self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Normalized weights at `x >= 0`.
    pub fn weights(&self, x: f64) -> Vec<f64> {
        normalized_weights(self.n, self.params, x)
    }

    /// Whether `gamma` or `beta` moves the nodes off the plain ones.
    pub fn is_shifted(&self) -> bool {
        self.shifted
    }

    /// `sum_k w_k(x) (u_k/(1+u_k) - x/(1+x))^2`, summed directly over the nodes.
    pub fn second_central_moment(&self, x: f64) -> f64 {
        let t = ratio(x);
        neumaier_sum(
            self.weights(x)
                .into_iter()
                .zip(&self.nodes)
                .map(|(w, &u)| w * (ratio(u) - t).powi(2)),
        )
    }
}

/// Which univariate operator is applied outermost in the composed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositionOrder {
    /// `A_{n1}^x ( B_{n2}^y f )`: the y-operator acts first.
    AOverB,
    /// `B_{n2}^y ( A_{n1}^x f )`: the x-operator acts first.
    BOverA,
}

/// Values of `f` on the node lattice, row-major in `k1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    cols: usize,
    values: Vec<f64>,
}

impl Lattice {
    pub fn get(&self, k1: usize, k2: usize) -> f64 {
        self.values[k1 * self.cols + k2]
    }

    fn row(&self, k1: usize) -> &[f64] {
        &self.values[k1 * self.cols..(k1 + 1) * self.cols]
    }
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "evaluation point must be finite with x, y >= 0, got ({x}, {y})"
        )))
    }
}

fn eval_checked<F>(f: &F, k1: usize, k2: usize, u: f64, v: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let value = f(u, v);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            location: format!("(k1, k2) = ({k1}, {k2}), (u, v) = ({u}, {v})"),
            value,
        })
    }
}

/// A materialized bivariate operator (plain or generalized).
#[derive(Debug, Clone)]
pub struct BivariateOperator {
    spec: OperatorSpec,
    axis1: AxisOperator,
    axis2: AxisOperator,
}

impl BivariateOperator {
    pub fn new(spec: OperatorSpec) -> Self {
        BivariateOperator {
            spec,
            axis1: AxisOperator::standard(spec.n1, spec.params1),
            axis2: AxisOperator::standard(spec.n2, spec.params2),
        }
    }

    /// The shifted operator with nodes `(p^(n+1-k) [k] + gamma) / b_{n,k}` per axis.
    pub fn generalized(gspec: &GeneralizedSpec) -> Result<Self> {
        let spec = gspec.base;
        Ok(BivariateOperator {
            spec,
            axis1: AxisOperator::shifted(spec.n1, spec.params1, gspec.gamma1, gspec.beta1)?,
            axis2: AxisOperator::shifted(spec.n2, spec.params2, gspec.gamma2, gspec.beta2)?,
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn axis(&self, axis: Axis) -> &AxisOperator {
        match axis {
            Axis::X => &self.axis1,
            Axis::Y => &self.axis2,
        }
    }

    /// The double sum at `(x, y)`.
    ///
    /// Rows `k1` are reduced in parallel and then combined in index order, so
    /// the result does not depend on the thread count.
    pub fn apply<F>(&self, f: F, x: f64, y: f64) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        check_point(x, y)?;
        let w1 = self.axis1.weights(x);
        let w2 = self.axis2.weights(y);
        let rows: Vec<f64> = (0..=self.spec.n1)
            .into_par_iter()
            .map(|k1| {
                let u = self.axis1.nodes[k1];
                let mut terms = Vec::with_capacity(w2.len());
                for (k2, (&v, &wv)) in self.axis2.nodes.iter().zip(&w2).enumerate() {
                    terms.push(eval_checked(&f, k1, k2, u, v)? * w1[k1] * wv);
                }
                Ok(neumaier_sum(terms))
            })
            .collect::<Result<_>>()?;
        Ok(neumaier_sum(rows))
    }

    /// The same value computed as a composition of the two univariate operators.
    pub fn apply_composed<F>(&self, f: F, x: f64, y: f64, order: CompositionOrder) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        check_point(x, y)?;
        let w1 = self.axis1.weights(x);
        let w2 = self.axis2.weights(y);
        let (outer_nodes, outer_w, inner_nodes, inner_w) = match order {
            CompositionOrder::AOverB => (&self.axis1.nodes, &w1, &self.axis2.nodes, &w2),
            CompositionOrder::BOverA => (&self.axis2.nodes, &w2, &self.axis1.nodes, &w1),
        };
        let mut outer_terms = Vec::with_capacity(outer_nodes.len());
        for (i, (&a, &wa)) in outer_nodes.iter().zip(outer_w).enumerate() {
            let mut inner_terms = Vec::with_capacity(inner_nodes.len());
            for (j, (&b, &wb)) in inner_nodes.iter().zip(inner_w).enumerate() {
                let value = match order {
                    CompositionOrder::AOverB => eval_checked(&f, i, j, a, b)?,
                    CompositionOrder::BOverA => eval_checked(&f, j, i, b, a)?,
                };
                inner_terms.push(value * wb);
            }
            outer_terms.push(neumaier_sum(inner_terms) * wa);
        }
        Ok(neumaier_sum(outer_terms))
    }

    /// `f` on every lattice point `(u_{k1}, v_{k2})`.
    pub fn lattice<F>(&self, f: F) -> Result<Lattice>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let cols = self.spec.n2 + 1;
        let rows: Vec<Vec<f64>> = (0..=self.spec.n1)
            .into_par_iter()
            .map(|k1| {
                let u = self.axis1.nodes[k1];
                self.axis2
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(k2, &v)| eval_checked(&f, k1, k2, u, v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Lattice {
            cols,
            values: rows.concat(),
        })
    }

    /// The operator applied to precomputed lattice values with precomputed weights.
    pub fn apply_lattice(&self, lattice: &Lattice, w1: &[f64], w2: &[f64]) -> f64 {
        let rows = (0..=self.spec.n1).map(|k1| {
            let row = lattice.row(k1);
            neumaier_sum(row.iter().zip(w2).map(|(v, w)| v * w)) * w1[k1]
        });
        neumaier_sum(rows)
    }
}

/// `L(f; x, y)` for the plain operator.
pub fn apply2<F>(f: F, spec: &OperatorSpec, x: f64, y: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    BivariateOperator::new(*spec).apply(f, x, y)
}

/// `L(f; x, y)` via composition of the univariate operators in the given order.
pub fn apply2_composed<F>(
    f: F,
    spec: &OperatorSpec,
    x: f64,
    y: f64,
    order: CompositionOrder,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    BivariateOperator::new(*spec).apply_composed(f, x, y, order)
}

/// The generalized operator at `(x, y)`.
pub fn generalized_apply2<F>(f: F, gspec: &GeneralizedSpec, x: f64, y: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    BivariateOperator::generalized(gspec)?.apply(f, x, y)
}

/// The test functions `e_ij(u, v) = (u/(1+u))^i (v/(1+v))^j`.
pub fn test_function(i: u32, j: u32, u: f64, v: f64) -> f64 {
    ratio(u).powi(i as i32) * ratio(v).powi(j as i32)
}

/// Test-function indices with closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MomentIndex {
    E00,
    E10,
    E01,
    E20,
    E02,
}

impl MomentIndex {
    pub const ALL: [MomentIndex; 5] = [
        MomentIndex::E00,
        MomentIndex::E10,
        MomentIndex::E01,
        MomentIndex::E20,
        MomentIndex::E02,
    ];

    pub fn from_pair(i: u32, j: u32) -> Result<Self> {
        match (i, j) {
            (0, 0) => Ok(MomentIndex::E00),
            (1, 0) => Ok(MomentIndex::E10),
            (0, 1) => Ok(MomentIndex::E01),
            (2, 0) => Ok(MomentIndex::E20),
            (0, 2) => Ok(MomentIndex::E02),
            _ => Err(Error::Domain(format!("no closed-form moment for e_{i}{j}"))),
        }
    }

    pub fn pair(self) -> (u32, u32) {
        match self {
            MomentIndex::E00 => (0, 0),
            MomentIndex::E10 => (1, 0),
            MomentIndex::E01 => (0, 1),
            MomentIndex::E20 => (2, 0),
            MomentIndex::E02 => (0, 2),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            MomentIndex::E00 => "e00",
            MomentIndex::E10 => "e10",
            MomentIndex::E01 => "e01",
            MomentIndex::E20 => "e20",
            MomentIndex::E02 => "e02",
        }
    }
}

/// `p [n] / [n+1]`, the first-moment factor of one axis.
pub fn first_moment_factor(n: usize, params: PqParams) -> f64 {
    params.p() * pq_integer(n, params) / pq_integer(n + 1, params)
}

/// Univariate first moment `L(u/(1+u); x) = p [n]/[n+1] * x/(1+x)`.
pub fn first_moment(n: usize, params: PqParams, x: f64) -> f64 {
    first_moment_factor(n, params) * ratio(x)
}

/// Univariate second moment
/// `L((u/(1+u))^2; x) = p^2 q^2 [n][n-1]/[n+1]^2 * x^2/((1+x)(p+qx)) + p^(n+1) [n]/[n+1]^2 * x/(1+x)`.
pub fn second_moment(n: usize, params: PqParams, x: f64) -> f64 {
    let (p, q) = (params.p(), params.q());
    let (int_n, int_n1) = (pq_integer(n, params), pq_integer(n + 1, params));
    let int_nm1 = if n == 0 {
        0.0
    } else {
        pq_integer(n - 1, params)
    };
    let t = ratio(x);
    let lead = p * p * q * q * int_n * int_nm1 / (int_n1 * int_n1);
    let tail = powi(p, n + 1) * int_n / (int_n1 * int_n1);
    lead * t * (x / (p + q * x)) + tail * t
}

/// Closed-form moments of the bivariate operator.
pub fn moment_closed(spec: &OperatorSpec, index: MomentIndex, x: f64, y: f64) -> f64 {
    match index {
        MomentIndex::E00 => 1.0,
        MomentIndex::E10 => first_moment(spec.n1, spec.params1, x),
        MomentIndex::E01 => first_moment(spec.n2, spec.params2, y),
        MomentIndex::E20 => second_moment(spec.n1, spec.params1, x),
        MomentIndex::E02 => second_moment(spec.n2, spec.params2, y),
    }
}

/// `L(e_ij; x, y)` by direct summation, for any `i, j <= 2`.
pub fn moment_direct(spec: &OperatorSpec, i: u32, j: u32, x: f64, y: f64) -> Result<f64> {
    if i > 2 || j > 2 {
        return Err(Error::Domain(format!(
            "test function e_{i}{j} is outside i, j <= 2"
        )));
    }
    apply2(|u, v| test_function(i, j, u, v), spec, x, y)
}

/// One row of [`c_n_consistency`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub c_n: f64,
    /// `max_k |p^(n-k+1)[k] + b_{n,k} - c_n| / c_n`
    pub max_relative_residual: f64,
    /// `[n] / c_n`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnReport {
    pub beta: f64,
    pub rows: Vec<CnRow>,
}

impl CnReport {
    pub fn max_relative_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_relative_residual)
            .fold(0.0, f64::max)
    }

    /// `[n]/c_n` strictly increasing down the rows.
    pub fn ratio_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio > w[0].ratio)
    }
}

/// Checks `p^(n-k+1)[k] + b_{n,k} = c_n` for every `k <= n` under the default
/// b-rule, for each `n` with parameters supplied by `params_for`.
pub fn c_n_consistency<S>(beta: f64, params_for: S, n_list: &[usize]) -> Result<CnReport>
where
    S: Fn(usize) -> Result<PqParams>,
{
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let params = params_for(n)?;
        let (p, q) = (params.p(), params.q());
        let c_n = pq_integer(n + 1, params) + beta;
        let max_residual = (0..=n)
            .map(|k| {
                let b = powi(q, k) * pq_integer(n - k + 1, params) + beta;
                (powi(p, n - k + 1) * pq_integer(k, params) + b - c_n).abs()
            })
            .fold(0.0, f64::max);
        rows.push(CnRow {
            n,
            p,
            q,
            c_n,
            max_relative_residual: max_residual / c_n,
            ratio: pq_integer(n, params) / c_n,
        });
    }
    Ok(CnReport { beta, rows })
}
