//! Randomized identity suites: exact over the rationals at small degree, and in
//! double precision at larger degree.
//!
//! Inputs are drawn sequentially from one seeded ChaCha stream per identity and
//! checked in parallel; results are gathered in draw order, so reports do not
//! depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivariate::{
    apply2, apply2_composed, moment_closed, moment_direct, CompositionOrder, MomentIndex,
    OperatorSpec,
};
use crate::error::Result;
use crate::exact::{
    exact_identity_check, exact_moment_closed, random_input, to_f64, IdentityId, IdentityInput,
    MomentForm, Rational, Witness,
};
use crate::numeric::rel_diff;
use crate::pq::{euler_product, euler_sum, powi, pq_integer, PqParams};

/// Largest univariate degree drawn by the floating-point suite.
pub const FLOAT_MAX_UNIVARIATE: usize = 64;
/// Largest per-axis degree drawn by the floating-point suite.
pub const FLOAT_MAX_BIVARIATE: usize = 32;

/// A deliberate defect, used to confirm that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Flip the sign of the `p^(n-k+1) [k]` term in the relation check.
    Relation16Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub exact_trials: usize,
    pub float_trials: usize,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_160_101,
            exact_trials: 500,
            float_trials: 200,
            fault: None,
        }
    }
}

/// The first failing input of an identity, with both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureWitness {
    pub input: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest residual seen. Exact: `|lhs - rhs|` as a double. Float: relative
    /// residual as defined per identity.
    pub max_residual: f64,
    /// Float suite only: the tolerance applied at the worst trial.
    pub tolerance: Option<f64>,
    /// Exact suite only: largest relative gap between the double-precision
    /// evaluation at the rounded inputs and the exact left side.
    pub float_agreement: Option<f64>,
    /// Exact moment identities only: trials on which the moment statement as
    /// typeset fails. Informational.
    pub printed_form_failures: Option<usize>,
    pub witness: Option<FailureWitness>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub exact: Vec<IdentityReport>,
    pub float: Vec<IdentityReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.exact
            .iter()
            .chain(&self.float)
            .all(IdentityReport::passed)
    }

    pub fn total_failures(&self) -> usize {
        self.exact
            .iter()
            .chain(&self.float)
            .map(|r| r.failures)
            .sum()
    }
}

fn stream(seed: u64, id: IdentityId, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = IdentityId::ALL
        .iter()
        .position(|&i| i == id)
        .expect("listed identity") as u64;
    rng.set_stream(salt * 64 + index);
    rng
}

struct ExactTrial {
    witness: Witness,
    float_gap: f64,
    printed_fails: bool,
}

fn float_probe(u: f64, v: f64) -> f64 {
    (u * v + 2.0 * u + 1.0) / (1.0 + u + v * v)
}

/// Double-precision value of the exact left side, at the rounded inputs.
fn float_lhs(id: IdentityId, input: &IdentityInput) -> Result<f64> {
    let params = input.params1.to_float()?;
    let (x, y) = (to_f64(&input.x), to_f64(&input.y));
    let n = input.n1;
    Ok(match id {
        IdentityId::Euler15 => euler_product(n, params, x),
        IdentityId::Relation16 => powi(params.q(), input.k) * pq_integer(n - input.k + 1, params),
        IdentityId::Moment(m) => {
            let spec = OperatorSpec::new(input.n1, input.n2, params, input.params2.to_float()?)?;
            let (i, j) = m.pair();
            moment_direct(&spec, i, j, x, y)?
        }
        IdentityId::Tensor22 => {
            let spec = OperatorSpec::new(input.n1, input.n2, params, input.params2.to_float()?)?;
            apply2(float_probe, &spec, x, y)?
        }
    })
}

fn exact_trial(id: IdentityId, input: &IdentityInput, fault: Option<Fault>) -> Result<ExactTrial> {
    let mut witness = exact_identity_check(id, input)?;
    if id == IdentityId::Relation16 && fault == Some(Fault::Relation16Sign) {
        let (n, k, params) = (input.n1, input.k, &input.params1);
        let flipped = crate::exact::exact_pq_integer(n + 1, params)
            + num_traits::pow(params.p().clone(), n - k + 1)
                * crate::exact::exact_pq_integer(k, params);
        witness = Witness {
            holds: witness.lhs == flipped,
            lhs: witness.lhs,
            rhs: flipped,
        };
    }
    let printed_fails = match id {
        IdentityId::Moment(m) => {
            exact_moment_closed(&input.spec(), m, MomentForm::Printed, &input.x, &input.y)
                != witness.lhs
        }
        _ => false,
    };
    let float_gap = rel_diff(float_lhs(id, input)?, to_f64(&witness.lhs));
    Ok(ExactTrial {
        witness,
        float_gap,
        printed_fails,
    })
}

fn abs_gap(a: &Rational, b: &Rational) -> f64 {
    to_f64(&(a - b)).abs()
}

/// Every identity on `config.exact_trials` random rational inputs, zero tolerance.
pub fn run_exact_suite(config: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    IdentityId::ALL
        .iter()
        .map(|&id| {
            let mut rng = stream(config.seed, id, 0);
            let inputs: Vec<IdentityInput> = (0..config.exact_trials)
                .map(|_| random_input(id, &mut rng))
                .collect();
            let trials: Vec<ExactTrial> = inputs
                .par_iter()
                .map(|input| exact_trial(id, input, config.fault))
                .collect::<Result<_>>()?;
            let failures = trials.iter().filter(|t| !t.witness.holds).count();
            let witness = inputs
                .iter()
                .zip(&trials)
                .find(|(_, t)| !t.witness.holds)
                .map(|(input, t)| FailureWitness {
                    input: input.to_string(),
                    lhs: t.witness.lhs.to_string(),
                    rhs: t.witness.rhs.to_string(),
                });
            Ok(IdentityReport {
                identity: id.to_string(),
                trials: trials.len(),
                failures,
                max_residual: trials
                    .iter()
                    .map(|t| abs_gap(&t.witness.lhs, &t.witness.rhs))
                    .fold(0.0, f64::max),
                tolerance: None,
                float_agreement: Some(trials.iter().map(|t| t.float_gap).fold(0.0, f64::max)),
                printed_form_failures: matches!(id, IdentityId::Moment(_))
                    .then(|| trials.iter().filter(|t| t.printed_fails).count()),
                witness,
            })
        })
        .collect()
}

/// Relative tolerance of the floating-point suite at degree `n`.
pub fn float_tolerance(n: usize) -> f64 {
    if n <= 32 {
        1e-12
    } else {
        1e-9
    }
}

/// One floating-point draw.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FloatInput {
    n: usize,
    k: usize,
    params1: PqParams,
    params2: PqParams,
    x: f64,
    y: f64,
}

fn random_float_params<R: Rng>(rng: &mut R) -> PqParams {
    // p >= 0.8 keeps p^(n(n-1)/2) inside double range at n = 64
    let p = rng.random_range(0.8..=1.0);
    PqParams::new(p, p * rng.random_range(0.05..0.99)).expect("0 < q < p <= 1")
}

fn random_float_point<R: Rng>(rng: &mut R) -> f64 {
    let t: f64 = rng.random_range(0.0..0.96);
    t / (1.0 - t)
}

fn random_float_input<R: Rng>(id: IdentityId, rng: &mut R) -> FloatInput {
    let max = if id.is_bivariate() {
        FLOAT_MAX_BIVARIATE
    } else {
        FLOAT_MAX_UNIVARIATE
    };
    let n = rng.random_range(1..=max);
    let k = rng.random_range(0..=n);
    let (params1, params2) = (random_float_params(rng), random_float_params(rng));
    FloatInput {
        n,
        k,
        params1,
        params2,
        x: random_float_point(rng),
        y: random_float_point(rng),
    }
}

/// `(lhs, rhs, residual)` for one floating-point draw.
fn float_residual(
    id: IdentityId,
    input: &FloatInput,
    fault: Option<Fault>,
) -> Result<(f64, f64, f64)> {
    let FloatInput {
        n,
        k,
        params1: params,
        x,
        y,
        ..
    } = *input;
    Ok(match id {
        IdentityId::Euler15 => {
            let (lhs, rhs) = (euler_product(n, params, x), euler_sum(n, params, x));
            (lhs, rhs, rel_diff(lhs, rhs))
        }
        IdentityId::Relation16 => {
            let sign = if fault == Some(Fault::Relation16Sign) {
                -1.0
            } else {
                1.0
            };
            let lhs = powi(params.q(), k) * pq_integer(n - k + 1, params);
            let rhs = pq_integer(n + 1, params)
                - sign * powi(params.p(), n - k + 1) * pq_integer(k, params);
            (lhs, rhs, (lhs - rhs).abs() / pq_integer(n + 1, params))
        }
        IdentityId::Moment(m) => {
            let spec = OperatorSpec::new(n, n, params, input.params2)?;
            let (i, j) = m.pair();
            let (lhs, rhs) = (
                moment_direct(&spec, i, j, x, y)?,
                moment_closed(&spec, m, x, y),
            );
            (lhs, rhs, rel_diff(lhs, rhs))
        }
        IdentityId::Tensor22 => {
            let spec = OperatorSpec::new(n, n, params, input.params2)?;
            let lhs = apply2(float_probe, &spec, x, y)?;
            let a = apply2_composed(float_probe, &spec, x, y, CompositionOrder::AOverB)?;
            let b = apply2_composed(float_probe, &spec, x, y, CompositionOrder::BOverA)?;
            let rhs = if rel_diff(lhs, a) >= rel_diff(lhs, b) {
                a
            } else {
                b
            };
            (lhs, rhs, rel_diff(lhs, rhs))
        }
    })
}

fn float_report<I>(
    name: String,
    draws: I,
    fault: Option<Fault>,
    id: IdentityId,
) -> Result<IdentityReport>
where
    I: IntoParallelIterator<Item = FloatInput>,
    I::Iter: IndexedParallelIterator,
{
    let results: Vec<(FloatInput, (f64, f64, f64))> = draws
        .into_par_iter()
        .map(|d| Ok((d, float_residual(id, &d, fault)?)))
        .collect::<Result<_>>()?;
    let fails =
        |(d, (_, _, r)): &&(FloatInput, (f64, f64, f64))| r.is_nan() || *r > float_tolerance(d.n);
    let worst = results.iter().max_by(|a, b| {
        (a.1 .2 / float_tolerance(a.0.n)).total_cmp(&(b.1 .2 / float_tolerance(b.0.n)))
    });
    Ok(IdentityReport {
        identity: name,
        trials: results.len(),
        failures: results.iter().filter(fails).count(),
        max_residual: results.iter().map(|r| r.1 .2).fold(0.0, f64::max),
        tolerance: worst.map(|w| float_tolerance(w.0.n)),
        float_agreement: None,
        printed_form_failures: None,
        witness: results
            .iter()
            .find(fails)
            .map(|(d, (lhs, rhs, _))| FailureWitness {
                input: format!(
                    "n = {}, k = {}, params1 = ({}, {}), params2 = ({}, {}), x = {}, y = {}",
                    d.n,
                    d.k,
                    d.params1.p(),
                    d.params1.q(),
                    d.params2.p(),
                    d.params2.q(),
                    d.x,
                    d.y
                ),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            }),
    })
}

/// Parameters used by the exhaustive relation sweep, besides the schedule.
const SWEEP_PARAMS: [(f64, f64); 4] = [(1.0, 0.5), (0.95, 0.9), (0.9, 0.3), (0.999, 0.998)];

/// Every identity on `config.float_trials` random draws, plus an exhaustive
/// `k` sweep of the relation at every `n <= 64`.
pub fn run_float_suite(config: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::with_capacity(IdentityId::ALL.len() + 1);
    for id in IdentityId::ALL {
        let mut rng = stream(config.seed, id, 1);
        let draws: Vec<FloatInput> = (0..config.float_trials)
            .map(|_| random_float_input(id, &mut rng))
            .collect();
        reports.push(float_report(id.to_string(), draws, config.fault, id)?);
    }

    let mut sweep = Vec::new();
    for n in 1..=FLOAT_MAX_UNIVARIATE {
        let mut params: Vec<PqParams> = SWEEP_PARAMS
            .iter()
            .map(|&(p, q)| PqParams::new(p, q))
            .collect::<Result<_>>()?;
        params.push(crate::analysis::default_schedule(n)?);
        for p in params {
            sweep.extend((0..=n).map(|k| FloatInput {
                n,
                k,
                params1: p,
                params2: p,
                x: 1.0,
                y: 1.0,
            }));
        }
    }
    reports.push(float_report(
        "relation_16_sweep".into(),
        sweep,
        config.fault,
        IdentityId::Relation16,
    )?);

    // partition of unity and the first moment at every degree, one fixed point each
    let unity: Vec<FloatInput> = (1..=FLOAT_MAX_UNIVARIATE)
        .map(|n| {
            let p = crate::analysis::default_schedule(n).expect("n >= 1");
            FloatInput {
                n: n.min(FLOAT_MAX_BIVARIATE),
                k: 0,
                params1: p,
                params2: p,
                x: 3.0,
                y: 0.5,
            }
        })
        .collect();
    reports.push(float_report(
        "moment_00_sweep".into(),
        unity,
        config.fault,
        IdentityId::Moment(MomentIndex::E00),
    )?);
    Ok(reports)
}

/// Both suites.
pub fn run_verify(config: &SuiteConfig) -> Result<SuiteReport> {
    Ok(SuiteReport {
        config: config.clone(),
        exact: run_exact_suite(config)?,
        float: run_float_suite(config)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            seed: 3,
            exact_trials: 25,
            float_trials: 40,
            fault: None,
        }
    }

    #[test]
    fn small_suites_pass() {
        let report = run_verify(&small()).unwrap();
        assert!(report.passed(), "{report:#?}");
        for r in &report.exact {
            assert!(
                r.float_agreement.unwrap() <= 1e-12,
                "{}: {:?}",
                r.identity,
                r.float_agreement
            );
        }
        let printed = report
            .exact
            .iter()
            .find(|r| r.identity == "moment_20")
            .unwrap();
        assert!(printed.printed_form_failures.unwrap() > 0);
        let unity = report
            .exact
            .iter()
            .find(|r| r.identity == "moment_00")
            .unwrap();
        assert_eq!(unity.printed_form_failures, Some(0));
    }

    #[test]
    fn injected_fault_is_caught() {
        let config = SuiteConfig {
            fault: Some(Fault::Relation16Sign),
            ..small()
        };
        let report = run_verify(&config).unwrap();
        assert!(!report.passed());
        let exact = report
            .exact
            .iter()
            .find(|r| r.identity == "relation_16")
            .unwrap();
        assert!(exact.failures > 0 && exact.witness.is_some());
        let others_clean = report
            .exact
            .iter()
            .filter(|r| r.identity != "relation_16")
            .all(IdentityReport::passed);
        assert!(others_clean);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_verify(&small()).unwrap();
        let b = run_verify(&small()).unwrap();
        assert_eq!(a, b);
    }
}
