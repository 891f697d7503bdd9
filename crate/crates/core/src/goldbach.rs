//! Straddle machinery: the telescoped gamma differences, the straddle
//! density and expectation around a midpoint, the induced failure
//! probability, and the average-gap estimate they imply.

use crate::bigreal::BigReal;
use crate::counting::{self, BracketWalk};
use crate::error::{Error, Result};
use crate::policy::{PrecisionPolicy, SeriesResult};
use crate::special;

/// Direct-mode summation is quadratic-ish in x; refuse beyond this.
pub const DIRECT_MODE_MAX: u64 = 20_000;

/// How the straddle expectation S(x) is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StraddleMode {
    /// Literal sum over offsets i of pi2i_bar(2x) * density_i(x).
    Direct,
    /// S = G(2x) * H(x) * sum_i C_{2i}^2/(2i), the exact regrouping.
    Factored,
    /// Replaces the i-sum by the under-estimate C_2/2.
    PaperLowerBound,
}

/// Straddle expectation at midpoint x plus its probability companions.
/// Probabilities are carried in log10 because e^{-S} underflows any
/// fixed-precision float long before the interesting range.
#[derive(Clone, Debug)]
pub struct StraddleReport {
    pub x: u64,
    pub s: BigReal,
    pub mode: StraddleMode,
    pub c2i_sum_used: BigReal,
    pub log10_failure: BigReal,
}

// ---------------------------------------------------------------------------
// Series shared by pi2i_bar and the straddle expectation
// ---------------------------------------------------------------------------

/// G(v) = sum_n (-1)^n gamma(2n-1, -log v)/(n!)^2 for v >= 1. This is
/// pi2i_bar stripped of its normalizing constant.
pub(crate) fn g_series(v: f64, policy: &PrecisionPolicy) -> Result<SeriesResult> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::domain("x", "series argument must be finite and >= 1"));
    }
    policy.check_feasible("pi2i_bar")?;
    let extra = (4.0 * v.log10()).ceil() as u32 + 25;
    let wp = policy.working_digits(extra, "pi2i_bar")?;
    let y = BigReal::from_f64(v, wp).ln();

    let mut walk = BracketWalk::new(&y);
    let mut coeff = BigReal::one(wp); // (2n-2)!/(n!)^2 at n = 1
    let mut sum = BigReal::zero(wp);
    let tol_log10 = policy.tail_tol.log10();
    let mut prev_log10 = f64::INFINITY;
    let mut consec = 0u32;

    for n in 1..=policy.max_terms {
        debug_assert_eq!(walk.index(), 2 * n as u64 - 1);
        let term = coeff.mul(&walk.bracket());
        // sign (-1)^n
        sum = if n % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        let t_log10 = term.log10_abs();
        let small = t_log10 < tol_log10 + sum.log10_abs().max(0.0);
        let decaying = t_log10 <= prev_log10 - 0.09;
        if small && decaying {
            consec += 1;
            if consec >= 3 {
                return Ok(SeriesResult {
                    input_x: v,
                    value: sum,
                    terms_used: n,
                    tail_bound: term.abs(),
                    precision_used: wp,
                    validity_warning: false,
                });
            }
        } else {
            consec = 0;
        }
        prev_log10 = t_log10;
        let n = n as u64;
        coeff = coeff.mul_u64(2 * n * (2 * n - 1)).div_u64((n + 1) * (n + 1));
        walk.advance();
        walk.advance();
    }
    Err(Error::NonConvergence {
        context: "pi2i_bar",
        max_terms: policy.max_terms,
    })
}

/// H(x) = sum_n (-1)^n [gamma(2n-1,-log(x+1)) - gamma(2n-1,-log(x-1))]/(n!)^2,
/// the i-independent factor of the straddle density (the telescoped sum of
/// the two one-sided differences).
pub(crate) fn h_series(x: f64, policy: &PrecisionPolicy) -> Result<SeriesResult> {
    if !(x >= 3.0) || !x.is_finite() {
        return Err(Error::domain("x", "straddle midpoint must be finite and >= 3"));
    }
    policy.check_feasible("straddle_density")?;
    let extra = (5.0 * x.log10()).ceil() as u32 + 30;
    let wp = policy.working_digits(extra, "straddle_density")?;
    let y_hi = BigReal::from_f64(x + 1.0, wp).ln();
    let y_lo = BigReal::from_f64(x - 1.0, wp).ln();

    let mut walk_hi = BracketWalk::new(&y_hi);
    let mut walk_lo = BracketWalk::new(&y_lo);
    let mut coeff = BigReal::one(wp);
    let mut sum = BigReal::zero(wp);
    let tol_log10 = policy.tail_tol.log10();
    let mut prev_log10 = f64::INFINITY;
    let mut consec = 0u32;

    for n in 1..=policy.max_terms {
        let diff = walk_hi.bracket().sub(&walk_lo.bracket());
        let term = coeff.mul(&diff);
        sum = if n % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        let t_log10 = term.log10_abs();
        let small = t_log10 < tol_log10 + sum.log10_abs().max(0.0);
        let decaying = t_log10 <= prev_log10 - 0.09;
        if small && decaying {
            consec += 1;
            if consec >= 3 {
                return Ok(SeriesResult {
                    input_x: x,
                    value: sum,
                    terms_used: n,
                    tail_bound: term.abs(),
                    precision_used: wp,
                    validity_warning: false,
                });
            }
        } else {
            consec = 0;
        }
        prev_log10 = t_log10;
        let n = n as u64;
        coeff = coeff.mul_u64(2 * n * (2 * n - 1)).div_u64((n + 1) * (n + 1));
        walk_hi.advance();
        walk_hi.advance();
        walk_lo.advance();
        walk_lo.advance();
    }
    Err(Error::NonConvergence {
        context: "straddle_density",
        max_terms: policy.max_terms,
    })
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The one-sided telescoped differences
/// delta_plus  = gamma(2n-1, -log(x+1)) - gamma(2n-1, -log x),
/// delta_minus = gamma(2n-1, -log x)    - gamma(2n-1, -log(x-1)).
pub fn delta_pm(n: u32, x: f64, policy: &PrecisionPolicy) -> Result<(BigReal, BigReal)> {
    if n == 0 {
        return Err(Error::domain("n", "delta_pm needs n >= 1"));
    }
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::domain("x", "delta_pm needs finite x >= 2"));
    }
    policy.check_feasible("delta_pm")?;
    let m = 2u64 * n as u64 - 1;
    if m as usize > policy.max_terms || m > u32::MAX as u64 {
        return Err(Error::resource(
            "n",
            format!("order 2n-1 = {m} exceeds max_terms = {}", policy.max_terms),
        ));
    }
    // differences cancel ~log10(x) digits on top of the bracket's e^y scale
    let extra = (5.0 * (x + 1.0).log10()).ceil() as u32 + 30;
    let elevated = PrecisionPolicy {
        digits: policy.working_digits(extra, "delta_pm")?,
        ..policy.clone()
    };
    let wp = elevated.digits;
    let gamma_at = |u: f64| -> Result<BigReal> {
        let z = BigReal::from_f64(u, wp).ln().neg();
        special::lower_gamma_br(m as u32, &z, &elevated)
    };
    let g_hi = gamma_at(x + 1.0)?;
    let g_mid = gamma_at(x)?;
    let g_lo = gamma_at(x - 1.0)?;
    Ok((
        g_hi.sub(&g_mid).with_digits(policy.digits),
        g_mid.sub(&g_lo).with_digits(policy.digits),
    ))
}

/// Straddle density P_i(x) = (C_{2i}/2i) H(x).
pub fn straddle_density(i: u32, x: f64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if i == 0 {
        return Err(Error::domain("i", "straddle offset index must be positive"));
    }
    if !(x >= 3.0) || !x.is_finite() {
        return Err(Error::domain("x", "straddle_density needs finite x >= 3"));
    }
    if i as f64 > x - 1.0 {
        return Err(Error::domain(
            "i",
            format!("offset i = {i} outside 2i <= 2x - 2 at x = {x}"),
        ));
    }
    let h = h_series(x, policy)?;
    let c2i = counting::double_constant(i, policy)?.constant;
    Ok(c2i.mul(&h.value).div_u64(2 * i as u64).with_digits(policy.digits))
}

fn log10_e(digits: u32) -> BigReal {
    BigReal::from_u64(10, digits + 5).ln().recip()
}

fn assemble_report(
    x: u64,
    mode: StraddleMode,
    s: BigReal,
    c2i_sum_used: BigReal,
    digits: u32,
) -> StraddleReport {
    let log10_failure = s.neg().mul(&log10_e(digits)).with_digits(digits);
    StraddleReport {
        x,
        s: s.with_digits(digits),
        mode,
        c2i_sum_used: c2i_sum_used.with_digits(digits),
        log10_failure,
    }
}

/// Expected number of prime doubles straddling x:
/// S(x) = sum_{i=1}^{x-3} pi2i_bar(2x) P_i(x). The i-sum stops at x - 3 so
/// both members of every counted pair exceed 2.
pub fn straddle_expectation(
    x: u64,
    policy: &PrecisionPolicy,
    mode: StraddleMode,
) -> Result<StraddleReport> {
    if x < 4 {
        return Err(Error::domain("x", "straddle_expectation needs x >= 4"));
    }
    match mode {
        StraddleMode::Direct => {
            if x > DIRECT_MODE_MAX {
                return Err(Error::resource(
                    "x",
                    format!("direct mode is limited to x <= {DIRECT_MODE_MAX}"),
                ));
            }
            let wp = policy.working_digits(10, "straddle_expectation")?;
            let mut s = BigReal::zero(wp);
            let mut csum = BigReal::zero(wp);
            for i in 1..=(x - 3) {
                let p2 = counting::pi2i_bar(2.0 * x as f64, i as u32, policy)?;
                let dens = straddle_density(i as u32, x as f64, policy)?;
                s = s.add(&p2.value.mul(&dens));
                let c2i = counting::double_constant(i as u32, policy)?.constant;
                csum = csum.add(&c2i.mul(&c2i).div_u64(2 * i));
            }
            Ok(assemble_report(x, mode, s, csum, policy.digits))
        }
        StraddleMode::Factored => {
            let csum = crate::sieve::c2i_square_sum(x - 3, policy)?;
            straddle_expectation_with_sum(x, policy, &csum)
        }
        StraddleMode::PaperLowerBound => {
            let g = g_series(2.0 * x as f64, policy)?;
            let h = h_series(x as f64, policy)?;
            let half_c2 = counting::twin_constant(policy)?.div_u64(2);
            let s = g.value.mul(&h.value).mul(&half_c2);
            Ok(assemble_report(x, mode, s, half_c2, policy.digits))
        }
    }
}

/// Factored-mode expectation with the i-sum supplied by the caller (from
/// the sweep cache, typically). The sum must cover i = 1..=x-3.
pub fn straddle_expectation_with_sum(
    x: u64,
    policy: &PrecisionPolicy,
    c2i_sum: &BigReal,
) -> Result<StraddleReport> {
    if x < 4 {
        return Err(Error::domain("x", "straddle_expectation needs x >= 4"));
    }
    let g = g_series(2.0 * x as f64, policy)?;
    let h = h_series(x as f64, policy)?;
    let s = g.value.mul(&h.value).mul(c2i_sum);
    Ok(assemble_report(
        x,
        StraddleMode::Factored,
        s,
        c2i_sum.clone(),
        policy.digits,
    ))
}

/// (1 - e^{-S} clamped to [0,1], log10 of e^{-S}).
pub fn failure_probability(report: &StraddleReport) -> (BigReal, BigReal) {
    let digits = report.s.precision_digits();
    let one = BigReal::one(digits);
    let zero = BigReal::zero(digits);
    let p = one.sub(&report.s.neg().exp());
    let p = if p < zero {
        zero
    } else if p > one {
        one
    } else {
        p
    };
    (p, report.log10_failure.clone())
}

/// Expected gap following a prime p: 1/straddle_density(1, p+1).
pub fn cramer_gap(p: u64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if p < 3 {
        return Err(Error::domain("p", "cramer_gap needs p >= 3"));
    }
    let dens = straddle_density(1, (p + 1) as f64, policy)?;
    if dens.is_zero() || dens.is_negative() {
        return Err(Error::domain(
            "p",
            format!("straddle density at {} is not positive", p + 1),
        ));
    }
    Ok(dens.recip().with_digits(policy.digits))
}
