//! Counting functions of the constrained process: the integer identity
//! N(x) = x, the average prime counter and its Moebius inversion, the
//! prime-double counters, and the Hardy-Littlewood constants they carry.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::policy::{PrecisionPolicy, SeriesResult};
use crate::special::{self, GUARD_DIGITS, LOG10_E};

/// Euler-product cutoff used when no explicit cutoff is requested.
pub const DEFAULT_TWIN_CUTOFF: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Scaling choice
// ---------------------------------------------------------------------------

/// The cutoff-to-rate map lambda. The default -log x makes the n-th event
/// density reproduce the prime density heuristic; a custom map turns that
/// choice into an experiment knob.
#[derive(Clone, Default)]
pub enum ScalingChoice {
    #[default]
    NegLog,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ScalingChoice {
    pub fn lambda(&self, x: f64) -> f64 {
        match self {
            ScalingChoice::NegLog => -x.ln(),
            ScalingChoice::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for ScalingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingChoice::NegLog => f.write_str("NegLog"),
            ScalingChoice::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A prime double with gap 2i and its Hardy-Littlewood constant.
#[derive(Clone, Debug)]
pub struct DoubleSpec {
    pub i: u32,
    pub gap: u64,
    pub constant: BigReal,
}

// ---------------------------------------------------------------------------
// Incremental bracket walk
// ---------------------------------------------------------------------------

/// Incremental evaluation of b_m = 1 - e^y sum_{k<m} (-y)^k / k!, so that
/// gamma(m, -y) = (m-1)! b_m. One walk shares the inner partial sums across
/// every m, keeping a full series evaluation linear in the term count.
pub(crate) struct BracketWalk {
    ey: BigReal,
    neg_y: BigReal,
    s: BigReal,
    u: BigReal,
    m: u64,
}

impl BracketWalk {
    /// y may be any real; y = 0 degenerates to b_m = 0 for all m.
    pub(crate) fn new(y: &BigReal) -> Self {
        let one = BigReal::one(y.precision_digits());
        BracketWalk {
            ey: y.exp(),
            neg_y: y.neg(),
            s: one,
            u: y.neg(),
            m: 1,
        }
    }

    pub(crate) fn index(&self) -> u64 {
        self.m
    }

    /// b_m at the current index.
    pub(crate) fn bracket(&self) -> BigReal {
        let one = BigReal::one(self.s.precision_digits());
        one.sub(&self.ey.mul(&self.s))
    }

    pub(crate) fn advance(&mut self) {
        self.s = self.s.add(&self.u);
        self.m += 1;
        self.u = self.u.mul(&self.neg_y).div_u64(self.m);
    }

}

// ---------------------------------------------------------------------------
// Integer identity
// ---------------------------------------------------------------------------

/// Expected number of integers below the cutoff: sum_n P(n, x), which
/// telescopes to x exactly. The truncated value must agree with x to the
/// policy tail tolerance.
pub fn integer_count(x: f64, policy: &PrecisionPolicy) -> Result<SeriesResult> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("x", "integer_count needs finite x > 0"));
    }
    policy.check_feasible("integer_count")?;
    let wp = policy.working_digits(GUARD_DIGITS, "integer_count")?;
    let xb = BigReal::from_f64(x, wp);

    // P(1,x) = 1 - e^{-x}; P(n+1,x) = P(n,x) - pmf(n), pmf(n) = x^n e^{-x}/n!
    let one = BigReal::one(wp);
    let emx = xb.neg().exp();
    let mut p = one.sub(&emx);
    let mut pmf = xb.mul(&emx);
    let mut sum = BigReal::zero(wp);
    let tol_log10 = policy.tail_tol.log10();
    let mut prev_log10 = f64::INFINITY;

    for n in 1..=policy.max_terms {
        sum = sum.add(&p);
        let t_log10 = p.log10_abs();
        // no ratio is observable on the very first retained term
        if n as f64 > x && prev_log10.is_finite() {
            let r = 10f64.powf((t_log10 - prev_log10).min(0.0));
            // survival ratios of the Poisson tail decrease, so the current
            // ratio gives a valid geometric envelope
            if r < 0.999 {
                let factor = r / (1.0 - r);
                let bound_log10 = t_log10 + factor.log10();
                if bound_log10 < tol_log10 + sum.log10_abs().max(0.0) {
                    let tail = p.abs().mul(&BigReal::from_f64(factor.max(f64::MIN_POSITIVE), wp));
                    return Ok(SeriesResult {
                        input_x: x,
                        value: sum.with_digits(policy.digits),
                        terms_used: n,
                        tail_bound: tail.with_digits(policy.digits),
                        precision_used: wp,
                        validity_warning: false,
                    });
                }
            }
        }
        prev_log10 = t_log10;
        p = p.sub(&pmf);
        pmf = pmf.mul(&xb).div_u64(n as u64 + 1);
    }
    Err(Error::NonConvergence {
        context: "integer_count",
        max_terms: policy.max_terms,
    })
}

// ---------------------------------------------------------------------------
// pi1_bar and its Moebius inversion
// ---------------------------------------------------------------------------

/// Core alternating series -sum_n gamma(n, -y)/n! for y > 0, evaluated at
/// the precision already carried by `y`. Returns (value, terms, tail bound).
pub(crate) fn pi1_series_from_y(
    y: &BigReal,
    policy: &PrecisionPolicy,
    context: &'static str,
) -> Result<(BigReal, usize, BigReal)> {
    let mut walk = BracketWalk::new(y);
    let wp = y.precision_digits();
    let mut sum = BigReal::zero(wp);
    let tol_log10 = policy.tail_tol.log10();
    let mut prev_log10 = f64::INFINITY;
    let mut consec = 0u32;

    for n in 1..=policy.max_terms {
        let term = walk.bracket().div_u64(n as u64);
        sum = sum.sub(&term);
        let t_log10 = term.log10_abs();
        let small = t_log10 < tol_log10 + sum.log10_abs().max(0.0);
        let decaying = t_log10 <= prev_log10 - 0.09;
        if small && decaying {
            consec += 1;
            if consec >= 3 {
                return Ok((sum, n, term.abs()));
            }
        } else {
            consec = 0;
        }
        prev_log10 = t_log10;
        walk.advance();
    }
    Err(Error::NonConvergence {
        context,
        max_terms: policy.max_terms,
    })
}

/// Positive-rate branch of pi1_bar (lambda >= 0): -sum_n P(n, lambda)/n.
fn pi1_series_pos_lambda(
    lambda: &BigReal,
    policy: &PrecisionPolicy,
) -> Result<(BigReal, usize, BigReal)> {
    let wp = lambda.precision_digits();
    if lambda.is_zero() {
        return Ok((BigReal::zero(wp), 1, BigReal::zero(wp)));
    }
    let one = BigReal::one(wp);
    let eml = lambda.neg().exp();
    let mut p = one.sub(&eml);
    let mut pmf = lambda.mul(&eml);
    let mut sum = BigReal::zero(wp);
    let tol_log10 = policy.tail_tol.log10();
    let mut prev_log10 = f64::INFINITY;
    let lam = lambda.to_f64();

    for n in 1..=policy.max_terms {
        let term = p.div_u64(n as u64);
        sum = sum.sub(&term);
        let t_log10 = term.log10_abs();
        if n as f64 > lam {
            let r = 10f64.powf((t_log10 - prev_log10).min(0.0));
            if r < 0.999 {
                let factor = r / (1.0 - r);
                if t_log10 + factor.log10() < tol_log10 + sum.log10_abs().max(0.0) {
                    let tail = term.abs().mul(&BigReal::from_f64(factor.max(f64::MIN_POSITIVE), wp));
                    return Ok((sum, n, tail));
                }
            }
        }
        prev_log10 = t_log10;
        p = p.sub(&pmf);
        pmf = pmf.mul(lambda).div_u64(n as u64 + 1);
    }
    Err(Error::NonConvergence {
        context: "pi1_bar",
        max_terms: policy.max_terms,
    })
}

/// Average single-prime counter -sum_n gamma(n, lambda(x))/n!.
pub fn pi1_bar(x: f64, policy: &PrecisionPolicy, scaling: &ScalingChoice) -> Result<SeriesResult> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain("x", "pi1_bar needs finite x >= 1"));
    }
    policy.check_feasible("pi1_bar")?;

    let (value, terms, tail, wp) = match scaling {
        ScalingChoice::NegLog => {
            let y_est = x.ln();
            let extra = (y_est * LOG10_E).ceil() as u32 + GUARD_DIGITS;
            let wp = policy.working_digits(extra, "pi1_bar")?;
            let y = BigReal::from_f64(x, wp).ln();
            let (v, t, tb) = pi1_series_from_y(&y, policy, "pi1_bar")?;
            (v, t, tb, wp)
        }
        ScalingChoice::Custom(_) => {
            let lambda = scaling.lambda(x);
            if !lambda.is_finite() {
                return Err(Error::domain("scaling", "lambda(x) is not finite"));
            }
            if lambda < 0.0 {
                let extra = (-lambda * LOG10_E).ceil() as u32 + GUARD_DIGITS;
                let wp = policy.working_digits(extra, "pi1_bar")?;
                let y = BigReal::from_f64(-lambda, wp);
                let (v, t, tb) = pi1_series_from_y(&y, policy, "pi1_bar")?;
                (v, t, tb, wp)
            } else {
                let wp = policy.working_digits(GUARD_DIGITS, "pi1_bar")?;
                let lb = BigReal::from_f64(lambda, wp);
                let (v, t, tb) = pi1_series_pos_lambda(&lb, policy)?;
                (v, t, tb, wp)
            }
        }
    };
    Ok(SeriesResult {
        input_x: x,
        value: value.with_digits(policy.digits),
        terms_used: terms,
        tail_bound: tail.with_digits(policy.digits),
        precision_used: wp,
        validity_warning: false,
    })
}

/// Moebius-weighted inversion sum_{n <= log2 x} mu(n)/n pi1_bar(x^{1/n});
/// the same estimator class as the Gram-series R function.
pub fn mobius_inverted_pi(x: f64, policy: &PrecisionPolicy) -> Result<SeriesResult> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::domain("x", "mobius_inverted_pi needs finite x >= 2"));
    }
    policy.check_feasible("mobius_inverted_pi")?;
    let mut n_max = x.log2().floor() as u32;
    while 2f64.powi(n_max as i32 + 1) <= x {
        n_max += 1;
    }
    while n_max > 1 && 2f64.powi(n_max as i32) > x {
        n_max -= 1;
    }

    let y_est = x.ln();
    let extra = (y_est * LOG10_E).ceil() as u32 + GUARD_DIGITS;
    let wp = policy.working_digits(extra, "mobius_inverted_pi")?;
    let y = BigReal::from_f64(x, wp).ln();

    let mut value = BigReal::zero(wp);
    let mut tail = BigReal::zero(wp);
    let mut terms = 0usize;
    for n in 1..=n_max {
        let mu = special::mobius(n as u64)?;
        if mu == 0 {
            continue;
        }
        let yn = y.div_u64(n as u64);
        let (v, t, tb) = pi1_series_from_y(&yn, policy, "mobius_inverted_pi")?;
        let contrib = v.div_u64(n as u64);
        value = if mu > 0 { value.add(&contrib) } else { value.sub(&contrib) };
        tail = tail.add(&tb.div_u64(n as u64));
        terms += t;
    }
    Ok(SeriesResult {
        input_x: x,
        value: value.with_digits(policy.digits),
        terms_used: terms,
        tail_bound: tail.with_digits(policy.digits),
        precision_used: wp,
        validity_warning: false,
    })
}

// ---------------------------------------------------------------------------
// Twin and double constants
// ---------------------------------------------------------------------------

static TWIN_CACHE: Lazy<Mutex<HashMap<(u32, u64), BigReal>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Hardy-Littlewood twin prime constant prod_{p>2} (1 - 1/(p-1)^2).
pub fn twin_constant(policy: &PrecisionPolicy) -> Result<BigReal> {
    twin_constant_with_cutoff(policy, DEFAULT_TWIN_CUTOFF)
}

/// Twin constant from the Euler product over p <= cutoff with an analytic
/// log-tail correction for p > cutoff, so modest cutoffs already reach full
/// working precision.
pub fn twin_constant_with_cutoff(policy: &PrecisionPolicy, cutoff: u64) -> Result<BigReal> {
    if cutoff < 3 {
        return Err(Error::range("cutoff", "twin constant cutoff must be >= 3"));
    }
    if let Some(v) = TWIN_CACHE.lock().unwrap().get(&(policy.digits, cutoff)) {
        return Ok(v.clone());
    }
    let wp = policy.working_digits(12, "twin_constant")?;
    let product = twin_product_truncated_at(cutoff, wp)?;
    let tail = twin_log_tail(cutoff, wp)?;
    let value = product.mul(&tail.neg().exp()).with_digits(policy.digits);
    TWIN_CACHE
        .lock()
        .unwrap()
        .insert((policy.digits, cutoff), value.clone());
    Ok(value)
}

/// Bare truncated Euler product prod_{2 < p <= cutoff} (1 - 1/(p-1)^2),
/// no tail correction. Strictly decreasing in the cutoff.
pub fn twin_product_truncated(cutoff: u64, policy: &PrecisionPolicy) -> Result<BigReal> {
    let wp = policy.working_digits(12, "twin_constant")?;
    Ok(twin_product_truncated_at(cutoff, wp)?.with_digits(policy.digits))
}

fn twin_product_truncated_at(cutoff: u64, wp: u32) -> Result<BigReal> {
    let table = crate::sieve::primes_up_to(cutoff.max(3))?;
    let mut prod = BigReal::one(wp);
    for p in table.primes().skip(1) {
        // 1 - 1/(p-1)^2 = p(p-2) / (p-1)^2
        prod = prod.mul_u64(p * (p - 2)).div_u64((p - 1) * (p - 1));
    }
    Ok(prod)
}

/// T(P) = -sum_{p > P} log(1 - 1/(p-1)^2), expanded over prime zeta values:
/// T = sum_{s >= 2} a_s (P(s) - sum_{p <= P} p^{-s}) with
/// a_s = sum_{2m <= s} binom(s-1, 2m-1)/m.
fn twin_log_tail(cutoff: u64, wp: u32) -> Result<BigReal> {
    // each s beyond 2 gains roughly log10(cutoff) - log10(2) digits
    let per_s = (cutoff as f64).log10() - 0.302;
    let s_max = (2.0 + (wp as f64 + 4.0) / per_s.max(1.0)).ceil() as u32 + 1;

    // partial prime sums sum_{p <= cutoff} p^{-s} for s = 2..=s_max
    let table = crate::sieve::primes_up_to(cutoff)?;
    let mut partials = vec![BigReal::zero(wp); (s_max - 1) as usize];
    for p in table.primes() {
        let inv = BigReal::from_u64(p, wp).recip();
        let mut pw = inv.mul(&inv);
        for slot in partials.iter_mut() {
            *slot = slot.add(&pw);
            pw = pw.mul(&inv);
        }
    }

    let mut t = BigReal::zero(wp);
    for s in 2..=s_max {
        let a = series_weight(s, wp);
        let pz = special::prime_zeta(s, wp);
        let beyond = pz.sub(&partials[(s - 2) as usize]);
        t = t.add(&a.mul(&beyond));
    }
    Ok(t)
}

/// a_s = sum_{m >= 1, 2m <= s} binom(s-1, 2m-1)/m.
fn series_weight(s: u32, wp: u32) -> BigReal {
    let mut a = BigReal::zero(wp);
    let mut m = 1u32;
    while 2 * m <= s {
        let b = binomial_u128(s - 1, 2 * m - 1);
        a = a.add(&BigReal::from_u128(b, wp).div_u64(m as u64));
        m += 1;
    }
    a
}

fn binomial_u128(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut out = 1u128;
    for j in 0..k {
        out = out * (n - j) as u128 / (j + 1) as u128;
    }
    out
}

/// Constant C_{2i} = C2 prod_{odd p | i} (p-1)/(p-2).
pub fn double_constant(i: u32, policy: &PrecisionPolicy) -> Result<DoubleSpec> {
    if i == 0 {
        return Err(Error::domain("i", "double index must be positive"));
    }
    let wp = policy.working_digits(12, "double_constant")?;
    let c2 = twin_constant(policy)?.with_digits(wp);
    let constant = c2
        .mul(&crate::sieve::odd_factor_product(i as u64, wp))
        .with_digits(policy.digits);
    Ok(DoubleSpec {
        i,
        gap: 2 * i as u64,
        constant,
    })
}

// ---------------------------------------------------------------------------
// pi2i_bar
// ---------------------------------------------------------------------------

/// Average prime-double counter C_{2i} sum_n (-1)^n gamma(2n-1, -log x)/(n!)^2.
/// Outside the validity range x - 2 > 2i the value is still returned, with
/// the warning flag set.
pub fn pi2i_bar(x: f64, i: u32, policy: &PrecisionPolicy) -> Result<SeriesResult> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain("x", "pi2i_bar needs finite x >= 1"));
    }
    if i == 0 {
        return Err(Error::domain("i", "double index must be positive"));
    }
    policy.check_feasible("pi2i_bar")?;
    let g = crate::goldbach::g_series(x, policy)?;
    let c2i = double_constant(i, policy)?.constant;
    let warn = !(x - 2.0 > 2.0 * i as f64);
    Ok(SeriesResult {
        input_x: x,
        value: g.value.mul(&c2i).with_digits(policy.digits),
        terms_used: g.terms_used,
        tail_bound: g.tail_bound.mul(&c2i).abs().with_digits(policy.digits),
        precision_used: g.precision_used,
        validity_warning: warn,
    })
}
