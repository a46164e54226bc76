//! Lipschitz-type maximal-function bounds relative to a set `E`.
//!
//! Membership of `f` in the class with constants `(alpha1, alpha2, M)` means
//! `|f(u,v) - f(x,y)| <= M |t_u - t_x|^alpha1 |t_v - t_y|^alpha2` for `(u,v)`
//! in `E x E` and all `(x,y)`, with `t_z = z/(1+z)`. The right side is a product,
//! so it vanishes whenever one coordinate is held fixed: only functions that are
//! constant along each coordinate slice through `E x E` can satisfy it. The
//! membership pre-check reports exactly that.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::corpus::CorpusFunction;
use super::grid::Grid2D;
use super::korovkin::operator_surface;
use super::rate::{delta_n, BOUND_TOLERANCE};
use crate::bivariate::BivariateOperator;
use crate::error::{Error, Result};
use crate::numeric::ratio;

/// A finite union of closed intervals of `[0, inf]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if lo.is_nan() || hi.is_nan() || lo < 0.0 || lo > hi || lo.is_infinite() {
                return Err(Error::InvalidParams(format!(
                    "[{lo}, {hi}] is not a closed interval of [0, inf)"
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(IntervalUnion { intervals })
    }

    /// All of `[0, inf)`.
    pub fn half_line() -> Self {
        IntervalUnion {
            intervals: vec![(0.0, f64::INFINITY)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_half_line(&self) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| lo == 0.0 && hi == f64::INFINITY)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }
}

/// `inf { |x - y| : y in E }`.
pub fn distance_to_set(x: f64, e: &IntervalUnion) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::Domain("distance to an empty set".into()));
    }
    Ok(e.intervals
        .iter()
        .map(|&(lo, hi)| {
            if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min))
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals == [(0.0, f64::INFINITY)] {
            return f.write_str("R+");
        }
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(lo, hi)| format!("[{lo},{hi}]"))
            .collect();
        f.write_str(&parts.join("u"))
    }
}

/// Parses `R+` or `[a,b]u[c,d]...` (`inf` allowed as an upper end).
impl FromStr for IntervalUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("r+") {
            return Ok(Self::half_line());
        }
        let bad = || {
            Error::InvalidParams(format!(
                "cannot parse set '{s}' (expected R+ or [a,b]u[c,d])"
            ))
        };
        let intervals = s
            .split('u')
            .map(|part| {
                let inner = part
                    .trim()
                    .strip_prefix('[')
                    .and_then(|p| p.strip_suffix(']'))
                    .ok_or_else(bad)?;
                let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
                Ok((
                    lo.trim().parse().map_err(|_| bad())?,
                    hi.trim().parse().map_err(|_| bad())?,
                ))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        Self::new(intervals)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub m: f64,
    pub e: IntervalUnion,
}

impl LipschitzParams {
    pub fn new(alpha1: f64, alpha2: f64, m: f64, e: IntervalUnion) -> Result<Self> {
        for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in (0, 1], got {a}"
                )));
            }
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "M must be positive and finite, got {m}"
            )));
        }
        if e.is_empty() {
            return Err(Error::InvalidParams("E must be nonempty".into()));
        }
        Ok(LipschitzParams {
            alpha1,
            alpha2,
            m,
            e,
        })
    }

    /// `M (d1^(a1/2) d2^(a2/2) + d1^(a1/2) dx^a1 + d2^(a2/2) dy^a2 + 2 dx^a1 dy^a2)`.
    pub fn bound(&self, delta1: f64, delta2: f64, dist_x: f64, dist_y: f64) -> f64 {
        let (a1, a2) = (self.alpha1, self.alpha2);
        let (s1, s2) = (delta1.powf(a1 / 2.0), delta2.powf(a2 / 2.0));
        let (dx, dy) = (dist_x.powf(a1), dist_y.powf(a2));
        self.m * (s1 * s2 + s1 * dx + s2 * dy + 2.0 * dx * dy)
    }
}

/// The worst failure of the class inequality found on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipViolation {
    /// The point of `E x E`.
    pub anchor: (f64, f64),
    pub point: (f64, f64),
    pub difference: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipCheck {
    pub pairs_checked: usize,
    pub violations: usize,
    pub worst: Option<MembershipViolation>,
}

impl MembershipCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Anchor coordinates: grid coordinates inside `E`, plus finite interval ends
/// inside the grid's range.
fn anchor_coordinates(e: &IntervalUnion, grid: &Grid2D) -> Vec<f64> {
    let x_max = grid.x()[grid.len() - 1];
    let mut coords: Vec<f64> = grid
        .x()
        .iter()
        .copied()
        .filter(|&x| e.contains(x))
        .collect();
    for &(lo, hi) in e.intervals() {
        coords.extend(
            [lo, hi]
                .into_iter()
                .filter(|&z| z.is_finite() && z <= x_max),
        );
    }
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    coords
}

/// Tests the class inequality for every anchor in `E x E` against every grid point.
pub fn class_membership(
    function: CorpusFunction,
    lip: &LipschitzParams,
    grid: &Grid2D,
) -> MembershipCheck {
    let anchors = anchor_coordinates(&lip.e, grid);
    let xs = grid.x();
    let mut check = MembershipCheck {
        pairs_checked: 0,
        violations: 0,
        worst: None,
    };
    let mut worst_excess = 0.0;
    for &u in &anchors {
        for &v in &anchors {
            let fa = function.eval(u, v);
            for &x in xs {
                let dt1 = (ratio(u) - ratio(x)).abs().powf(lip.alpha1);
                for &y in xs {
                    let difference = (fa - function.eval(x, y)).abs();
                    let allowed = lip.m * dt1 * (ratio(v) - ratio(y)).abs().powf(lip.alpha2);
                    check.pairs_checked += 1;
                    let excess = difference - allowed;
                    if excess > BOUND_TOLERANCE {
                        check.violations += 1;
                        if excess > worst_excess {
                            worst_excess = excess;
                            check.worst = Some(MembershipViolation {
                                anchor: (u, v),
                                point: (x, y),
                                difference,
                                allowed,
                            });
                        }
                    }
                }
            }
        }
    }
    check
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzPoint {
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dist_x: f64,
    pub dist_y: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub function: CorpusFunction,
    pub membership: MembershipCheck,
    pub points: Vec<LipschitzPoint>,
    pub max_violation: f64,
    pub violations: usize,
}

/// Evaluates the bound at every grid point without requiring class membership.
/// The membership result is attached to the report.
pub fn lipschitz_bound_report(
    function: CorpusFunction,
    lip: &LipschitzParams,
    op: &BivariateOperator,
    grid: &Grid2D,
) -> Result<LipschitzReport> {
    let values = operator_surface(op, |u, v| function.eval(u, v), grid)?;
    let spec = op.spec();
    let xs = grid.x();
    let d1: Vec<f64> = xs
        .iter()
        .map(|&x| delta_n(spec.n1, spec.params1, x))
        .collect();
    let d2: Vec<f64> = xs
        .iter()
        .map(|&y| delta_n(spec.n2, spec.params2, y))
        .collect();
    let dist = xs
        .iter()
        .map(|&x| distance_to_set(x, &lip.e))
        .collect::<Result<Vec<f64>>>()?;

    let mut points = Vec::with_capacity(values.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let lhs = (values[grid.index(i, j)] - function.eval(x, y)).abs();
            let bound = lip.bound(d1[i], d2[j], dist[i], dist[j]);
            points.push(LipschitzPoint {
                x,
                y,
                lhs,
                delta1: d1[i],
                delta2: d2[j],
                dist_x: dist[i],
                dist_y: dist[j],
                bound,
                slack: bound - lhs,
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
    Ok(LipschitzReport {
        function,
        membership: class_membership(function, lip, grid),
        points,
        max_violation,
        violations,
    })
}

/// As [`lipschitz_bound_report`], but refuses functions that fail the class
/// membership pre-check.
pub fn lipschitz_bound_check(
    function: CorpusFunction,
    lip: &LipschitzParams,
    op: &BivariateOperator,
    grid: &Grid2D,
) -> Result<LipschitzReport> {
    let membership = class_membership(function, lip, grid);
    if let Some(w) = &membership.worst {
        return Err(Error::Precondition(format!(
            "{function} is not in the Lipschitz class (alpha = ({}, {}), M = {}, E = {}): \
             |f{:?} - f{:?}| = {} > {} ({} of {} sampled pairs fail)",
            lip.alpha1,
            lip.alpha2,
            lip.m,
            lip.e,
            w.anchor,
            w.point,
            w.difference,
            w.allowed,
            membership.violations,
            membership.pairs_checked
        )));
    }
    lipschitz_bound_report(function, lip, op, grid)
}
