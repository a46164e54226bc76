//! Second central moments and the modulus-of-continuity rate bound.

use serde::Serialize;

use super::corpus::CorpusFunction;
use super::grid::Grid2D;
use super::korovkin::operator_surface;
use super::modulus::ModulusTable;
use crate::bivariate::{first_moment, second_moment, Axis, AxisOperator, BivariateOperator};
use crate::error::Result;
use crate::numeric::ratio;
use crate::pq::{powi, pq_integer, PqParams};

/// Absolute slack allowed before a bound counts as violated, to absorb
/// rounding in the left side (the bound for a constant function is exactly 0).
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// `L((u/(1+u) - x/(1+x))^2; x)`, the second central moment, clamped at 0.
pub fn delta_n(n: usize, params: PqParams, x: f64) -> f64 {
    let t = ratio(x);
    let value = second_moment(n, params, x) - 2.0 * t * first_moment(n, params, x) + t * t;
    value.max(0.0)
}

/// The central-moment formula as typeset, with `p q^2` in place of `p^2 q^2` in
/// the leading coefficient. Kept for comparison only; it is not a moment.
pub fn delta_n_printed(n: usize, params: PqParams, x: f64) -> f64 {
    let (p, q) = (params.p(), params.q());
    let (int_n, int_n1) = (pq_integer(n, params), pq_integer(n + 1, params));
    let int_nm1 = if n == 0 {
        0.0
    } else {
        pq_integer(n - 1, params)
    };
    let t = ratio(x);
    let inner = p * q * q * int_n * int_nm1 / (int_n1 * int_n1) * (1.0 + x) / (p + q * x)
        - 2.0 * p * int_n / int_n1
        + 1.0;
    t * t * inner + powi(p, n + 1) * int_n / (int_n1 * int_n1) * t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub x: f64,
    pub y: f64,
    pub t_x: f64,
    pub t_y: f64,
    /// `|L f - f|`
    pub lhs: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// `4 w(f; sqrt(delta1), sqrt(delta2))` with the analytic modulus.
    pub bound: f64,
    pub slack: f64,
    /// `4 w(f; delta1, delta2)`, the bound read without square roots.
    pub literal_bound: f64,
    /// `4 w(f; sqrt(delta1), sqrt(delta2))` with the grid-estimated modulus.
    pub grid_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub function: CorpusFunction,
    pub points: Vec<RatePoint>,
    /// `max(lhs - bound)`; nonpositive when the bound holds everywhere.
    pub max_violation: f64,
    pub violations: usize,
    /// Points where the literal (no square root) bound fails. Reported only.
    pub literal_violations: usize,
}

/// Checks `|L f - f| <= 4 w(f; sqrt(delta_n1(x)), sqrt(delta_n2(y)))` at every grid point.
///
/// Plain axes use the closed-form `delta_n`. Shifted axes have no closed form,
/// so their second central moment is summed over the nodes; the bound only
/// needs positivity and `L(1) = 1`, which both operators share.
pub fn rate_bound_check(
    function: CorpusFunction,
    op: &BivariateOperator,
    grid: &Grid2D,
) -> Result<RateReport> {
    let f = |u: f64, v: f64| function.eval(u, v);
    let values = operator_surface(op, f, grid)?;
    let table = ModulusTable::new(f, grid)?;
    let deltas = |axis: &AxisOperator| -> Vec<f64> {
        grid.x()
            .iter()
            .map(|&x| {
                if axis.is_shifted() {
                    axis.second_central_moment(x)
                } else {
                    delta_n(axis.degree(), axis.params(), x)
                }
            })
            .collect()
    };
    let d1 = deltas(op.axis(Axis::X));
    let d2 = deltas(op.axis(Axis::Y));

    let mut points = Vec::with_capacity(values.len());
    for (i, (&x, &t_x)) in grid.x().iter().zip(grid.t()).enumerate() {
        for (j, (&y, &t_y)) in grid.x().iter().zip(grid.t()).enumerate() {
            let lhs = (values[grid.index(i, j)] - f(x, y)).abs();
            let (s1, s2) = (d1[i].sqrt(), d2[j].sqrt());
            let bound = 4.0 * function.analytic_modulus(s1, s2);
            points.push(RatePoint {
                x,
                y,
                t_x,
                t_y,
                lhs,
                delta1: d1[i],
                delta2: d2[j],
                bound,
                slack: bound - lhs,
                literal_bound: 4.0 * function.analytic_modulus(d1[i], d2[j]),
                grid_bound: 4.0 * table.modulus(s1, s2),
            });
        }
    }
    let max_violation = points
        .iter()
        .map(|p| p.lhs - p.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let violations = points
        .iter()
        .filter(|p| p.lhs > p.bound + BOUND_TOLERANCE)
        .count();
    let literal_violations = points
        .iter()
        .filter(|p| p.lhs > p.literal_bound + BOUND_TOLERANCE)
        .count();
    Ok(RateReport {
        function,
        points,
        max_violation,
        violations,
        literal_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::corpus::CORPUS;
    use crate::analysis::schedule::default_schedule;
    use crate::bivariate::{GeneralizedSpec, OperatorSpec};
    use crate::univariate::pq_apply;
    use proptest::prelude::*;

    fn brute_central_moment(n: usize, params: PqParams, x: f64) -> f64 {
        let t = ratio(x);
        pq_apply(|u| (ratio(u) - t).powi(2), n, params, x).unwrap()
    }

    #[test]
    fn delta_examples() {
        let params = PqParams::new(0.95, 0.9).unwrap();
        assert_eq!(delta_n(8, params, 0.0), 0.0);
        let brute = brute_central_moment(8, params, 1.0);
        assert!((delta_n(8, params, 1.0) - brute).abs() <= 1e-10);
        // the typeset coefficient drifts from the true moment once p < 1
        assert!((delta_n_printed(8, params, 1.0) - brute).abs() > 1e-3);
        let q_only = PqParams::new(1.0, 0.9).unwrap();
        assert!((delta_n_printed(8, q_only, 1.0) - delta_n(8, q_only, 1.0)).abs() <= 1e-12);

        let mut last = f64::INFINITY;
        for n in [8, 16, 32, 64, 128] {
            let d = delta_n(n, default_schedule(n).unwrap(), 1.0);
            assert!(d < last);
            last = d;
        }
    }

    proptest! {
        #[test]
        fn delta_matches_brute_force(n in 1usize..=48, p in 0.3f64..=1.0, frac in 0.05f64..0.99, t in 0.0f64..0.98) {
            let params = PqParams::new(p, p * frac).unwrap();
            let x = t / (1.0 - t);
            let d = delta_n(n, params, x);
            prop_assert!(d >= 0.0);
            prop_assert!((d - brute_central_moment(n, params, x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn rate_examples() {
        let grid = Grid2D::new(17, 0.96).unwrap();
        let op = BivariateOperator::new(
            OperatorSpec::symmetric(16, default_schedule(16).unwrap()).unwrap(),
        );
        let one = rate_bound_check(CorpusFunction::Monomial { i: 0, j: 0 }, &op, &grid).unwrap();
        assert_eq!(one.violations, 0);
        assert!(one.points.iter().all(|p| p.lhs <= 1e-12 && p.bound == 0.0));
        for f in CORPUS {
            let report = rate_bound_check(f, &op, &grid).unwrap();
            assert_eq!(
                report.violations, 0,
                "{f}: max violation {}",
                report.max_violation
            );
            assert!(report
                .points
                .iter()
                .all(|p| p.grid_bound <= p.bound + 1e-12));
        }
    }

    #[test]
    fn shifted_operators_use_their_own_moments() {
        let grid = Grid2D::new(17, 0.96).unwrap();
        let spec = OperatorSpec::symmetric(16, default_schedule(16).unwrap()).unwrap();
        let plain = BivariateOperator::new(spec);
        for &x in grid.x() {
            let direct = plain.axis(Axis::X).second_central_moment(x);
            assert!((direct - delta_n(16, spec.params1, x)).abs() <= 1e-12);
        }
        for (gamma, beta) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.0)] {
            let gspec = GeneralizedSpec::new(spec, (gamma, gamma), (beta, beta)).unwrap();
            let op = BivariateOperator::generalized(&gspec).unwrap();
            assert!(op.axis(Axis::X).is_shifted());
            for f in CORPUS {
                let report = rate_bound_check(f, &op, &grid).unwrap();
                assert_eq!(report.violations, 0, "{f} at gamma {gamma}, beta {beta}");
            }
        }
    }
}
