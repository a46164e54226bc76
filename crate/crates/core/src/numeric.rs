//! Small floating-point helpers shared by the operator code.

/// `ln(exp(a) + exp(b))` without overflow. Either argument may be `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum(exp(v)))` over a slice of log-magnitudes.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let scaled = values.iter().map(|&v| (v - max).exp());
    max + neumaier_sum(scaled).ln()
}

/// Neumaier's variant of Kahan compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Relative closeness with an exact-zero escape: `|a - b| <= tol * max(|a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Relative difference, zero when both values are zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The transformed coordinate `u / (1 + u)`, mapping `[0, inf]` onto `[0, 1]`.
#[inline]
pub fn ratio(u: f64) -> f64 {
    if u > 1.0 {
        1.0 / (1.0 + 1.0 / u)
    } else {
        u / (1.0 + u)
    }
}
