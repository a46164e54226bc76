//! The registered test-function corpus and its analytic moduli of continuity.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bivariate::test_function;
use crate::error::{Error, Result};
use crate::numeric::ratio;

/// A named bivariate function with a known modulus bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorpusFunction {
    /// `e_ij` for `i, j <= 2`.
    Monomial { i: u32, j: u32 },
    /// `u/(1+u) + v/(1+v)`
    SumRatios,
    /// `exp(-u - v)`
    ExpDecay,
    /// `sin(pi u/(1+u)) sin(pi v/(1+v))`
    SinRatio,
}

/// The eight functions every corpus-wide check runs over.
pub const CORPUS: [CorpusFunction; 8] = [
    CorpusFunction::Monomial { i: 1, j: 0 },
    CorpusFunction::Monomial { i: 0, j: 1 },
    CorpusFunction::Monomial { i: 2, j: 0 },
    CorpusFunction::Monomial { i: 0, j: 2 },
    CorpusFunction::Monomial { i: 1, j: 1 },
    CorpusFunction::SumRatios,
    CorpusFunction::ExpDecay,
    CorpusFunction::SinRatio,
];

/// The Korovkin test set `e00, e10, e01, e20, e02`.
pub const KOROVKIN_SET: [CorpusFunction; 5] = [
    CorpusFunction::Monomial { i: 0, j: 0 },
    CorpusFunction::Monomial { i: 1, j: 0 },
    CorpusFunction::Monomial { i: 0, j: 1 },
    CorpusFunction::Monomial { i: 2, j: 0 },
    CorpusFunction::Monomial { i: 0, j: 2 },
];

// sup |d/dt exp(-t/(1-t))| over [0, 1), attained at u = 1
const EXP_DECAY_LIPSCHITZ: f64 = 4.0 / E;

impl CorpusFunction {
    pub fn monomial(i: u32, j: u32) -> Result<Self> {
        if i > 2 || j > 2 {
            return Err(Error::Domain(format!(
                "test function e_{i}{j} is outside i, j <= 2"
            )));
        }
        Ok(CorpusFunction::Monomial { i, j })
    }

    pub fn eval(self, u: f64, v: f64) -> f64 {
        match self {
            CorpusFunction::Monomial { i, j } => test_function(i, j, u, v),
            CorpusFunction::SumRatios => ratio(u) + ratio(v),
            CorpusFunction::ExpDecay => (-u - v).exp(),
            CorpusFunction::SinRatio => (PI * ratio(u)).sin() * (PI * ratio(v)).sin(),
        }
    }

    /// An upper bound on the modulus of continuity in transformed coordinates,
    /// valid over all of `[0, inf)^2`.
    pub fn analytic_modulus(self, delta1: f64, delta2: f64) -> f64 {
        let axis = |lip: f64, d: f64| (lip * d).min(1.0);
        match self {
            CorpusFunction::Monomial { i, j } => {
                let a = if i > 0 {
                    axis(f64::from(i), delta1)
                } else {
                    0.0
                };
                let b = if j > 0 {
                    axis(f64::from(j), delta2)
                } else {
                    0.0
                };
                (a + b).min(1.0)
            }
            CorpusFunction::SumRatios => axis(1.0, delta1) + axis(1.0, delta2),
            CorpusFunction::ExpDecay => {
                (axis(EXP_DECAY_LIPSCHITZ, delta1) + axis(EXP_DECAY_LIPSCHITZ, delta2)).min(1.0)
            }
            CorpusFunction::SinRatio => (axis(PI, delta1) + axis(PI, delta2)).min(1.0),
        }
    }
}

impl fmt::Display for CorpusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusFunction::Monomial { i, j } => write!(f, "e{i}{j}"),
            CorpusFunction::SumRatios => f.write_str("f_sum_ratios"),
            CorpusFunction::ExpDecay => f.write_str("f_exp_decay"),
            CorpusFunction::SinRatio => f.write_str("f_sin_ratio"),
        }
    }
}

impl FromStr for CorpusFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f_sum_ratios" => Ok(CorpusFunction::SumRatios),
            "f_exp_decay" => Ok(CorpusFunction::ExpDecay),
            "f_sin_ratio" => Ok(CorpusFunction::SinRatio),
            _ => {
                let digits: Vec<u32> = s
                    .strip_prefix('e')
                    .unwrap_or("")
                    .chars()
                    .filter_map(|c| c.to_digit(10))
                    .collect();
                match digits.as_slice() {
                    [i, j] if s.len() == 3 => CorpusFunction::monomial(*i, *j),
                    _ => Err(Error::Domain(format!("unknown function id '{s}'"))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_function_examples() {
        let e = |i, j, u, v| CorpusFunction::monomial(i, j).unwrap().eval(u, v);
        assert_eq!(e(0, 0, 5.0, 7.0), 1.0);
        assert_eq!(e(1, 0, 1.0, 9.0), 0.5);
        assert_eq!(e(2, 2, 1.0, 3.0), 0.140625);
    }

    #[test]
    fn ids_round_trip() {
        for f in CORPUS.iter().chain(&KOROVKIN_SET) {
            assert_eq!(f.to_string().parse::<CorpusFunction>().unwrap(), *f);
        }
        for bad in ["e30", "e1", "e100", "sum", "x10"] {
            assert!(bad.parse::<CorpusFunction>().is_err(), "{bad}");
        }
    }

    #[test]
    fn analytic_moduli_dominate_sampled_differences() {
        // dense random pairs in t-coordinates; the bound must hold for every pair
        let ts: Vec<f64> = (0..=60).map(|i| i as f64 / 61.0).collect();
        let x = |t: f64| t / (1.0 - t);
        for f in CORPUS {
            for &a in &ts {
                for &b in ts.iter().step_by(7) {
                    for &(c, d) in &[(0.1, 0.9), (0.5, 0.5), (0.0, 0.3)] {
                        let diff = (f.eval(x(a), x(c)) - f.eval(x(b), x(d))).abs();
                        let bound = f.analytic_modulus((a - b).abs(), (c - d).abs());
                        assert!(diff <= bound + 1e-12, "{f}: {diff} > {bound}");
                    }
                }
            }
        }
    }
}
