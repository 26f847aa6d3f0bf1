//! Special functions behind the closed-form ergodic rates.
//!
//! Every closed form in [`crate::esr`] reduces to expectations of the type
//! `E[ln(1 + a X + b Y)]` with `X`, `Y` independent unit-mean exponentials.
//! Those are expressed through the scaled exponential integral
//! `e^x E1(x) = E[ln(1 + Z / x)]`, and, when `a = b`, through
//! `G^{1,3}_{3,2}[x | -1,1,1; 1,0] = E[ln(1 + x S)]` with `S ~ Gamma(2, 1)`.
//!
//! The [`quadrature`] submodule carries slow adaptive-quadrature oracles
//! that evaluate the same expectations straight from their integral
//! definitions.

pub mod quadrature;

pub use quadrature::{
    expect_log1p_erlang2_oracle, expect_log1p_exponential_oracle, expect_log1p_pair_oracle,
    QuadratureSpec,
};

use crate::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative separation below which `E[ln(1 + aX + bY)]` switches from the
/// difference quotient to the coincident-scale formula.
pub const DEGENERATE_REL_THRESHOLD: f64 = 1e-6;

/// `1/x` above which [`meijer_g_1323`] uses its small-argument series.
const MEIJER_SERIES_CUTOFF: f64 = 100.0;

/// Computes `e^x E1(x)` for `x > 0`.
///
/// Power series for `x <= 1`, Lentz continued fraction above. The
/// continued fraction yields the scaled value directly, so nothing
/// underflows for large `x`.
pub fn exp_e1_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("exp_e1_scaled argument", x));
    }
    Ok(exp_e1_scaled_unchecked(x))
}

pub(crate) fn exp_e1_scaled_unchecked(x: f64) -> f64 {
    if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        e1_scaled_continued_fraction(x)
    }
}

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let contribution = term / kf;
        sum += contribution;
        if contribution.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_scaled_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// `E[ln(1 + c Z)]` for `Z ~ Exp(1)` and `c >= 0`.
pub(crate) fn expect_log1p_single(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        exp_e1_scaled_unchecked(1.0 / c)
    }
}

/// Evaluates `G^{1,3}_{3,2}[x | -1,1,1; 1,0]`, i.e. `E[ln(1 + x S)]` where
/// `S` is the sum of two independent unit-mean exponentials.
///
/// Obtained as the derivative of `a e^{1/a} E1(1/a)` at `a = x`:
/// `1 + (1 - 1/x) e^{1/x} E1(1/x)`. For small `x` the cancellation against
/// the leading 1 is avoided with the series
/// `sum_{m>=1} (-1)^{m-1} (m+1) (m-1)! x^m`.
pub fn meijer_g_1323(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("meijer_g_1323 argument", x));
    }
    Ok(meijer_g_1323_unchecked(x))
}

pub(crate) fn meijer_g_1323_unchecked(x: f64) -> f64 {
    let u = 1.0 / x;
    if u >= MEIJER_SERIES_CUTOFF {
        let mut sum = 0.0;
        // (m-1)! x^m with alternating sign
        let mut factorial_power = x;
        for m in 1..60 {
            let mf = m as f64;
            let term = (mf + 1.0) * factorial_power;
            let signed = if m % 2 == 1 { term } else { -term };
            sum += signed;
            if term <= f64::EPSILON * 1e-2 * sum.abs() {
                break;
            }
            factorial_power *= mf * x;
        }
        sum
    } else {
        1.0 + (1.0 - u) * exp_e1_scaled_unchecked(u)
    }
}

/// Which formula evaluated an `E[ln(1 + aX + bY)]` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairBranch {
    /// Both scales vanish; the expectation is zero.
    Zero,
    /// One scale vanishes; a single scaled exponential integral.
    SingleScale,
    /// Distinct scales; difference quotient of `a e^{1/a} E1(1/a)`.
    General,
    /// Coincident scales; the Meijer-G value.
    Coincident,
}

/// Two-parameter expectation `E[ln(1 + aX + bY)]` for independent
/// unit-mean exponentials `X`, `Y` and scales `a, b >= 0`.
pub fn expect_log1p_pair(a: f64, b: f64) -> Result<(f64, PairBranch)> {
    for (what, v) in [("first scale", a), ("second scale", b)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(what, v));
        }
    }
    Ok(expect_log1p_pair_unchecked(a, b))
}

pub(crate) fn expect_log1p_pair_unchecked(a: f64, b: f64) -> (f64, PairBranch) {
    match (a == 0.0, b == 0.0) {
        (true, true) => return (0.0, PairBranch::Zero),
        (true, false) => return (expect_log1p_single(b), PairBranch::SingleScale),
        (false, true) => return (expect_log1p_single(a), PairBranch::SingleScale),
        _ => {}
    }
    let separation = (a - b).abs() / a.max(b);
    if separation < DEGENERATE_REL_THRESHOLD {
        (meijer_g_1323_unchecked(0.5 * (a + b)), PairBranch::Coincident)
    } else {
        (pair_difference_quotient(a, b), PairBranch::General)
    }
}

/// The distinct-scale formula without the coincidence switch.
pub(crate) fn pair_difference_quotient(a: f64, b: f64) -> f64 {
    let fa = a * exp_e1_scaled_unchecked(1.0 / a);
    let fb = b * exp_e1_scaled_unchecked(1.0 / b);
    (fa - fb) / (a - b)
}
