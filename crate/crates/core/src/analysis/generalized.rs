//! Rate components for the shifted operators.

use serde::Serialize;

use super::corpus::CorpusFunction;
use super::grid::Grid2D;
use super::korovkin::error_surface;
use super::schedule::ParamSchedule;
use crate::bivariate::{
    first_moment_factor, Axis, BivariateOperator, GeneralizedSpec, OperatorSpec,
};
use crate::error::{Error, Result};
use crate::pq::{pq_integer, PqParams};

/// The three terms inside the `3 M max(...)` convergence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateComponents {
    /// `prod_i ([n_i]/(c_i + g_i))^a_i (g_i/[n_i])^a_i`
    pub shift: f64,
    /// `prod_i |1 - [n_i+1]/(c_i + g_i)|^a_i (p_i [n_i]/[n_i+1])^a_i`
    pub scale: f64,
    /// `prod_i (1 - 2 p_i [n_i]/[n_i+1] + q_i [n_i][n_i-1]/[n_i+1]^2)`
    pub moment: f64,
}

impl RateComponents {
    pub fn max(&self) -> f64 {
        self.shift.max(self.scale).max(self.moment)
    }
}

fn axis_terms(n: usize, params: PqParams, gamma: f64, beta: f64, alpha: f64) -> (f64, f64, f64) {
    let int_n = pq_integer(n, params);
    let int_n1 = pq_integer(n + 1, params);
    let int_nm1 = if n == 0 {
        0.0
    } else {
        pq_integer(n - 1, params)
    };
    let c = int_n1 + beta;
    let shift = (int_n / (c + gamma)).powf(alpha) * (gamma / int_n).powf(alpha);
    let scale =
        (1.0 - int_n1 / (c + gamma)).abs().powf(alpha) * first_moment_factor(n, params).powf(alpha);
    let moment = 1.0 - 2.0 * first_moment_factor(n, params)
        + params.q() * int_n * int_nm1 / (int_n1 * int_n1);
    (shift, scale, moment)
}

/// Components for one shifted operator with exponents `alpha`.
pub fn rate_components(gspec: &GeneralizedSpec, alpha: (f64, f64)) -> RateComponents {
    let mut parts = [(0.0, 0.0, 0.0); 2];
    for (slot, (axis, a)) in parts
        .iter_mut()
        .zip([(Axis::X, alpha.0), (Axis::Y, alpha.1)])
    {
        let (n, params) = gspec.base.axis(axis);
        *slot = axis_terms(n, params, gspec.gamma(axis), gspec.beta(axis), a);
    }
    RateComponents {
        shift: parts[0].0 * parts[1].0,
        scale: parts[0].1 * parts[1].1,
        moment: parts[0].2 * parts[1].2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub components: RateComponents,
}

/// Components at each `n` with `n1 = n2 = n` and parameters from `schedule`.
pub fn generalized_rate_components(
    schedule: &ParamSchedule,
    gamma: (f64, f64),
    beta: (f64, f64),
    alpha: (f64, f64),
    n_list: &[usize],
) -> Result<Vec<ComponentRow>> {
    for a in [alpha.0, alpha.1] {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, 1], got {a}"
            )));
        }
    }
    n_list
        .iter()
        .map(|&n| {
            let params = schedule.params(n)?;
            let gspec = GeneralizedSpec::new(OperatorSpec::symmetric(n, params)?, gamma, beta)?;
            Ok(ComponentRow {
                n,
                p: params.p(),
                q: params.q(),
                components: rate_components(&gspec, alpha),
            })
        })
        .collect()
}

/// Grid sup error of the shifted operator next to `3 M max(components)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedBoundReport {
    pub function: CorpusFunction,
    pub components: RateComponents,
    pub sup_error: f64,
    pub bound: f64,
}

impl GeneralizedBoundReport {
    pub fn holds(&self) -> bool {
        self.sup_error <= self.bound
    }
}

/// Evaluates both sides of the shifted-operator bound. Nothing is asserted:
/// the bound is a limit statement and need not hold at any finite `n`.
pub fn generalized_bound_check(
    function: CorpusFunction,
    gspec: &GeneralizedSpec,
    m: f64,
    alpha: (f64, f64),
    grid: &Grid2D,
) -> Result<GeneralizedBoundReport> {
    let op = BivariateOperator::generalized(gspec)?;
    let sup_error = error_surface(&op, |u, v| function.eval(u, v), grid)?
        .into_iter()
        .fold(0.0, f64::max);
    let components = rate_components(gspec, alpha);
    Ok(GeneralizedBoundReport {
        function,
        components,
        sup_error,
        bound: 3.0 * m * components.max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unshifted_components_vanish() {
        let gspec = GeneralizedSpec::unshifted(
            OperatorSpec::symmetric(16, PqParams::new(0.9, 0.8).unwrap()).unwrap(),
        );
        let c = rate_components(&gspec, (1.0, 1.0));
        assert_eq!(c.shift, 0.0);
        assert_eq!(c.scale, 0.0);
    }

    #[test]
    fn moment_component_near_classical() {
        let n = 32;
        let gspec = GeneralizedSpec::unshifted(
            OperatorSpec::symmetric(n, PqParams::new(0.999, 0.998).unwrap()).unwrap(),
        );
        let c = rate_components(&gspec, (1.0, 1.0));
        let nf = n as f64;
        let classical = 1.0 - 2.0 * nf / (nf + 1.0) + nf * (nf - 1.0) / (nf + 1.0).powi(2);
        assert!(
            (c.moment.sqrt() - classical.abs()).abs() < 0.05,
            "{} vs {}",
            c.moment,
            classical * classical
        );
    }

    #[test]
    fn components_decrease_under_default_schedule() {
        let rows = generalized_rate_components(
            &ParamSchedule::default_rule(),
            (1.0, 1.0),
            (1.0, 1.0),
            (1.0, 1.0),
            &[8, 16, 32, 64],
        )
        .unwrap();
        for w in rows.windows(2) {
            let (a, b) = (w[0].components, w[1].components);
            assert!(
                b.shift < a.shift && b.scale < a.scale && b.moment < a.moment,
                "{a:?} -> {b:?}"
            );
        }
        assert!(generalized_rate_components(
            &ParamSchedule::default_rule(),
            (1.0, 1.0),
            (1.0, 1.0),
            (0.0, 1.0),
            &[8]
        )
        .is_err());
    }

    #[test]
    fn bound_report_is_populated() {
        let gspec = GeneralizedSpec::new(
            OperatorSpec::symmetric(8, PqParams::new(0.95, 0.9).unwrap()).unwrap(),
            (1.0, 1.0),
            (1.0, 1.0),
        )
        .unwrap();
        let grid = Grid2D::new(5, 0.9).unwrap();
        let r = generalized_bound_check(CorpusFunction::SumRatios, &gspec, 2.0, (1.0, 1.0), &grid)
            .unwrap();
        assert!(r.sup_error > 0.0 && r.bound > 0.0);
    }
}
