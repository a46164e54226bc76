//! Grid estimates of the bivariate modulus of continuity
//! `sup { |f(u,v) - f(x,y)| : |t_u - t_x| <= d1, |t_v - t_y| <= d2 }`.

use rayon::prelude::*;

use super::grid::Grid2D;
use crate::error::{Error, Result};

/// Maxima of `|f(a) - f(b)|` over grid pairs by index offset, prefix-maximized so
/// that a lookup for `(d1, d2)` is a single read.
///
/// Grid sampling only sees pairs at grid spacing, so the estimate is a lower
/// bound on the true modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusTable {
    size: usize,
    step: f64,
    table: Vec<f64>,
}

impl ModulusTable {
    pub fn new<F>(f: F, grid: &Grid2D) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let xs = grid.x();
        let values: Vec<f64> = xs
            .iter()
            .flat_map(|&x| xs.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                location: format!(
                    "grid point ({}, {})",
                    xs[pos / xs.len()],
                    xs[pos % xs.len()]
                ),
                value: values[pos],
            });
        }
        Ok(Self::from_values(&values, grid.len(), grid.step()))
    }

    /// Builds the table from row-major values on a `size x size` uniform grid.
    pub fn from_values(values: &[f64], size: usize, step: f64) -> Self {
        assert_eq!(values.len(), size * size, "values must cover the grid");
        let at = |i: usize, j: usize| values[i * size + j];
        let mut table: Vec<f64> = (0..size * size)
            .into_par_iter()
            .map(|off| {
                let (a, b) = (off / size, off % size);
                let mut best = 0.0_f64;
                for i in 0..size - a {
                    for j in 0..size - b {
                        best = best.max((at(i, j) - at(i + a, j + b)).abs());
                        best = best.max((at(i, j + b) - at(i + a, j)).abs());
                    }
                }
                best
            })
            .collect();
        for a in 0..size {
            for b in 0..size {
                let mut m = table[a * size + b];
                if a > 0 {
                    m = m.max(table[(a - 1) * size + b]);
                }
                if b > 0 {
                    m = m.max(table[a * size + b - 1]);
                }
                table[a * size + b] = m;
            }
        }
        ModulusTable { size, step, table }
    }

    fn offset(&self, delta: f64) -> usize {
        // a pair at exactly delta counts; the slack absorbs rounding in t_i
        let steps = (delta / self.step * (1.0 + 1e-9)).floor();
        if steps.is_nan() || steps < 0.0 {
            0
        } else {
            (steps as usize).min(self.size - 1)
        }
    }

    /// The estimate at `(d1, d2)`, both `>= 0`.
    pub fn modulus(&self, delta1: f64, delta2: f64) -> f64 {
        self.table[self.offset(delta1) * self.size + self.offset(delta2)]
    }
}

/// One-shot grid estimate of the modulus at `(delta1, delta2)`, both `> 0`.
pub fn modulus_bivariate<F>(f: F, delta1: f64, delta2: f64, grid: &Grid2D) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(delta1 > 0.0 && delta2 > 0.0) {
        return Err(Error::Domain(format!(
            "modulus needs delta1, delta2 > 0, got ({delta1}, {delta2})"
        )));
    }
    Ok(ModulusTable::new(f, grid)?.modulus(delta1, delta2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::corpus::{CorpusFunction, CORPUS};

    fn brute_force(f: &dyn Fn(f64, f64) -> f64, d1: f64, d2: f64, grid: &Grid2D) -> f64 {
        let (t, x) = (grid.t(), grid.x());
        let mut best = 0.0_f64;
        for a in 0..t.len() {
            for b in 0..t.len() {
                for c in 0..t.len() {
                    for d in 0..t.len() {
                        if (t[a] - t[c]).abs() <= d1 + 1e-12 && (t[b] - t[d]).abs() <= d2 + 1e-12 {
                            best = best.max((f(x[a], x[b]) - f(x[c], x[d])).abs());
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn table_matches_brute_force() {
        let grid = Grid2D::new(7, 0.9).unwrap();
        for func in [
            CorpusFunction::SinRatio,
            CorpusFunction::Monomial { i: 1, j: 1 },
            CorpusFunction::ExpDecay,
        ] {
            let f = |u: f64, v: f64| func.eval(u, v);
            let table = ModulusTable::new(f, &grid).unwrap();
            for &(d1, d2) in &[(0.15, 0.15), (0.3, 0.0), (0.45, 0.6), (1.0, 1.0)] {
                let want = brute_force(&f, d1, d2, &grid);
                assert!(
                    (table.modulus(d1, d2) - want).abs() <= 1e-15,
                    "{func} at ({d1}, {d2})"
                );
            }
        }
    }

    #[test]
    fn modulus_examples() {
        let grid = Grid2D::default();
        assert_eq!(modulus_bivariate(|_, _| 3.0, 0.1, 0.1, &grid).unwrap(), 0.0);
        let e10 = modulus_bivariate(
            |u, v| CorpusFunction::Monomial { i: 1, j: 0 }.eval(u, v),
            0.1,
            0.3,
            &grid,
        )
        .unwrap();
        assert!((e10 - 0.1).abs() <= grid.step());
        let sum = modulus_bivariate(|u, v| CorpusFunction::SumRatios.eval(u, v), 0.1, 0.1, &grid)
            .unwrap();
        assert!(sum <= 0.2 + 1e-12);
        assert!(modulus_bivariate(|_, _| 1.0, 0.0, 0.1, &grid).is_err());
    }

    #[test]
    fn monotone_and_vanishing() {
        let grid = Grid2D::default();
        for func in CORPUS {
            let table = ModulusTable::new(|u, v| func.eval(u, v), &grid).unwrap();
            let deltas = [0.2, 0.1, 0.05, 0.025];
            let values: Vec<f64> = deltas.iter().map(|&d| table.modulus(d, d)).collect();
            assert!(
                values.windows(2).all(|w| w[1] <= w[0]),
                "{func}: {values:?}"
            );
            assert!(values[3] <= func.analytic_modulus(0.025, 0.025) + 1e-12);
            assert!(table.modulus(0.0, 0.0) == 0.0);
            // subadditivity within one grid step of slack
            let (d1, d2) = (0.1, 0.05);
            let joint = table.modulus(d1 + d1, d2 + d2);
            assert!(
                joint <= 2.0 * table.modulus(d1 + grid.step(), d2 + grid.step()) + 1e-12,
                "{func}"
            );
        }
    }
}
