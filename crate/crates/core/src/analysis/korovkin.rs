//! Sup-norm errors on a grid and Korovkin-type convergence tables.

use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{CorpusFunction, KOROVKIN_SET};
use super::grid::Grid2D;
use super::schedule::ParamSchedule;
use crate::bivariate::{Axis, BivariateOperator, OperatorSpec};
use crate::error::{Error, Result};

/// `L f` at every grid point, row-major with the x index outermost.
///
/// `f` is evaluated once per lattice point and the per-coordinate weights once
/// per grid coordinate; each grid point is then a single weighted reduction.
pub fn operator_surface<F>(op: &BivariateOperator, f: F, grid: &Grid2D) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let lattice = op.lattice(&f)?;
    let w1: Vec<Vec<f64>> = grid
        .x()
        .par_iter()
        .map(|&x| op.axis(Axis::X).weights(x))
        .collect();
    let w2: Vec<Vec<f64>> = grid
        .x()
        .par_iter()
        .map(|&y| op.axis(Axis::Y).weights(y))
        .collect();
    let rows: Vec<Vec<f64>> = w1
        .par_iter()
        .map(|wx| {
            w2.iter()
                .map(|wy| op.apply_lattice(&lattice, wx, wy))
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// `|L f - f|` at every grid point.
pub fn error_surface<F>(op: &BivariateOperator, f: F, grid: &Grid2D) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let values = operator_surface(op, &f, grid)?;
    let xs = grid.x();
    Ok(values
        .iter()
        .enumerate()
        .map(|(idx, lf)| (lf - f(xs[idx / xs.len()], xs[idx % xs.len()])).abs())
        .collect())
}

/// `max_grid |L f - f|`.
pub fn sup_error<F>(op: &BivariateOperator, f: F, grid: &Grid2D) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    Ok(error_surface(op, f, grid)?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub function: CorpusFunction,
    pub sup_error: f64,
    /// Row-major `|L f - f|` over the grid, when requested.
    #[serde(skip)]
    pub surface: Option<Vec<f64>>,
}

/// Rows ordered by `n`, then by function in the order requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn column(&self, function: CorpusFunction) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.function == function)
            .map(|r| r.sup_error)
            .collect()
    }

    pub fn strictly_decreasing(&self, function: CorpusFunction) -> bool {
        self.column(function).windows(2).all(|w| w[1] < w[0])
    }
}

/// Sup errors of each function under `schedule` (same degree and parameters on
/// both axes) for every `n` in the strictly increasing `n_list`.
pub fn convergence_table(
    schedule: &ParamSchedule,
    n_list: &[usize],
    functions: &[CorpusFunction],
    grid: &Grid2D,
    keep_surfaces: bool,
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || !n_list.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParams(format!(
            "n_list must be nonempty and strictly increasing, got {n_list:?}"
        )));
    }
    let mut rows = Vec::with_capacity(n_list.len() * functions.len());
    for &n in n_list {
        let params = schedule.params(n)?;
        let op = BivariateOperator::new(OperatorSpec::symmetric(n, params)?);
        for &function in functions {
            let surface = error_surface(&op, |u, v| function.eval(u, v), grid)?;
            let sup_error = surface.iter().copied().fold(0.0, f64::max);
            rows.push(ConvergenceRow {
                n,
                p: params.p(),
                q: params.q(),
                function,
                sup_error,
                surface: keep_surfaces.then_some(surface),
            });
        }
    }
    Ok(ConvergenceTable { rows })
}

/// The table for `e00, e10, e01, e20, e02`.
pub fn korovkin_suite(
    schedule: &ParamSchedule,
    n_list: &[usize],
    grid: &Grid2D,
) -> Result<ConvergenceTable> {
    convergence_table(schedule, n_list, &KOROVKIN_SET, grid, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bivariate::{apply2, first_moment_factor};
    use crate::pq::PqParams;

    #[test]
    fn sup_error_examples() {
        let grid = Grid2D::new(9, 0.9).unwrap();
        let spec = OperatorSpec::new(
            12,
            7,
            PqParams::new(0.95, 0.9).unwrap(),
            PqParams::new(0.8, 0.5).unwrap(),
        )
        .unwrap();
        let op = BivariateOperator::new(spec);
        assert!(sup_error(&op, |_, _| 1.0, &grid).unwrap() <= 1e-12);
        let e10 = sup_error(
            &op,
            |u, v| CorpusFunction::Monomial { i: 1, j: 0 }.eval(u, v),
            &grid,
        )
        .unwrap();
        let want = (first_moment_factor(12, spec.params1) - 1.0).abs() * 0.9;
        assert!((e10 - want).abs() <= 1e-10, "{e10} vs {want}");
    }

    #[test]
    fn surface_matches_pointwise_apply() {
        let grid = Grid2D::new(5, 0.8).unwrap();
        let spec = OperatorSpec::symmetric(6, PqParams::new(0.9, 0.7).unwrap()).unwrap();
        let op = BivariateOperator::new(spec);
        let f = |u: f64, v: f64| CorpusFunction::SinRatio.eval(u, v);
        let surface = operator_surface(&op, f, &grid).unwrap();
        for (i, &x) in grid.x().iter().enumerate() {
            for (j, &y) in grid.x().iter().enumerate() {
                let direct = apply2(f, &spec, x, y).unwrap();
                assert!((surface[grid.index(i, j)] - direct).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn e10_decreases_when_n_doubles() {
        let grid = Grid2D::new(9, 0.96).unwrap();
        let table =
            korovkin_suite(&ParamSchedule::default_rule(), &[8, 16, 32, 64], &grid).unwrap();
        assert!(table.column(KOROVKIN_SET[0]).iter().all(|&e| e <= 1e-12));
        assert!(table.strictly_decreasing(KOROVKIN_SET[1]));
        assert_eq!(table.rows.len(), 20);
        assert!(korovkin_suite(&ParamSchedule::default_rule(), &[8, 8], &grid).is_err());
    }
}
