//! Parameter schedules `n -> (p_n, q_n)` with `p_n, q_n -> 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pq::{pq_integer, PqParams};

/// `p_n = 1 - 1/(2(n+1))`, `q_n = 1 - 1/(n+1)`.
pub fn default_schedule(n: usize) -> Result<PqParams> {
    ParamSchedule::default_rule().params(n)
}

/// `p_n = 1 - c_p / (n + shift)^s`, `q_n = 1 - c_q / (n + shift)^s` with `c_q > c_p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub c_p: f64,
    pub c_q: f64,
    pub shift: f64,
    pub exponent: f64,
}

/// Degrees at which [`ParamSchedule::validated`] samples the growth conditions.
const CHECK_DEGREES: [usize; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];

impl ParamSchedule {
    pub fn default_rule() -> Self {
        ParamSchedule {
            c_p: 0.5,
            c_q: 1.0,
            shift: 1.0,
            exponent: 1.0,
        }
    }

    /// `p_n = 1 - n^-2`, `q_n = 1 - 2 n^-2`; valid from `n = 2`.
    pub fn inverse_square() -> Self {
        ParamSchedule {
            c_p: 1.0,
            c_q: 2.0,
            shift: 0.0,
            exponent: 2.0,
        }
    }

    /// A user-supplied rule, accepted only if it satisfies the schedule invariants:
    /// `0 < q_n < p_n <= 1` from `n = 1` on, `p_n` and `q_n` increasing and within
    /// `1e-3` of 1 by `n = 1000`, and `[n+1]` increasing past 100 by `n = 1024`.
    pub fn validated(c_p: f64, c_q: f64, shift: f64, exponent: f64) -> Result<Self> {
        let s = ParamSchedule {
            c_p,
            c_q,
            shift,
            exponent,
        };
        if ![c_p, c_q, shift, exponent].iter().all(|v| v.is_finite()) || !(c_q > c_p && c_p > 0.0) {
            return Err(Error::InvalidParams(format!(
                "schedule needs finite c_q > c_p > 0, got {s:?}"
            )));
        }
        if !(exponent > 0.0 && shift >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "schedule needs exponent > 0 and shift >= 0, got {s:?}"
            )));
        }
        s.params(1)?;
        let at = |n| s.params(n).expect("valid from n = 1 on and increasing");
        let far = at(1000);
        if 1.0 - far.p() > 1e-3 || 1.0 - far.q() > 1e-3 {
            return Err(Error::InvalidParams(format!(
                "schedule {s:?} is not within 1e-3 of 1 at n = 1000"
            )));
        }
        let growth: Vec<f64> = CHECK_DEGREES
            .iter()
            .map(|&n| pq_integer(n + 1, at(n)))
            .collect();
        if !growth.windows(2).all(|w| w[1] > w[0]) || growth[growth.len() - 1] <= 100.0 {
            return Err(Error::InvalidParams(format!(
                "[n+1] does not grow past 100 under schedule {s:?}"
            )));
        }
        Ok(s)
    }

    /// Smallest degree at which the rule yields valid parameters.
    pub fn first_valid_degree(&self) -> usize {
        (1..).find(|&n| self.params(n).is_ok()).expect("q_n -> 1")
    }

    pub fn params(&self, n: usize) -> Result<PqParams> {
        if n == 0 {
            return Err(Error::InvalidParams("schedules start at n = 1".into()));
        }
        let scale = (n as f64 + self.shift).powf(self.exponent);
        PqParams::new(1.0 - self.c_p / scale, 1.0 - self.c_q / scale)
            .map_err(|e| Error::InvalidParams(format!("schedule {self} at n = {n}: {e}")))
    }
}

impl fmt::Display for ParamSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::default_rule() {
            f.write_str("default")
        } else if *self == Self::inverse_square() {
            f.write_str("invsq")
        } else {
            write!(
                f,
                "p_n = 1 - {}/(n+{})^{}, q_n = 1 - {}/(n+{})^{}",
                self.c_p, self.shift, self.exponent, self.c_q, self.shift, self.exponent
            )
        }
    }
}

impl FromStr for ParamSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Self::default_rule()),
            "invsq" => Ok(Self::inverse_square()),
            _ => Err(Error::InvalidParams(format!(
                "unknown schedule '{s}' (expected default or invsq)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_examples() {
        let p1 = default_schedule(1).unwrap();
        assert_eq!((p1.p(), p1.q()), (0.75, 0.5));
        let p9 = default_schedule(9).unwrap();
        assert_relative_eq!(p9.p(), 0.95);
        assert_relative_eq!(p9.q(), 0.9);
        assert!(default_schedule(0).is_err());
    }

    #[test]
    fn shipped_rules_pass_validation() {
        for s in [
            ParamSchedule::default_rule(),
            ParamSchedule::inverse_square(),
        ] {
            let v = ParamSchedule::validated(s.c_p, s.c_q, s.shift, s.exponent);
            // inverse-square is undefined at n = 1, so only the default passes from n = 1
            assert_eq!(v.is_ok(), s == ParamSchedule::default_rule(), "{s}");
        }
        assert_eq!(ParamSchedule::inverse_square().first_valid_degree(), 2);
        let p2 = ParamSchedule::inverse_square().params(2).unwrap();
        assert_eq!((p2.p(), p2.q()), (0.75, 0.5));
    }

    #[test]
    fn invalid_custom_rules_are_rejected() {
        assert!(ParamSchedule::validated(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(ParamSchedule::validated(0.5, 1.0, 1.0, 0.1).is_err());
        assert!(ParamSchedule::validated(0.5, 1.0, -1.0, 1.0).is_err());
        assert!(ParamSchedule::validated(0.25, 0.5, 1.0, 1.5).is_ok());
    }

    #[test]
    fn default_invariants() {
        let mut last = (0.0, 0.0, 0.0);
        for n in (1..=1024).step_by(7) {
            let pq = default_schedule(n).unwrap();
            let big = pq_integer(n + 1, pq);
            assert!(pq.q() < pq.p() && pq.p() > last.0 && pq.q() > last.1 && big > last.2);
            last = (pq.p(), pq.q(), big);
        }
        assert!(pq_integer(1025, default_schedule(1024).unwrap()) > 100.0);
    }
}
