//! Special functions backing the counting modules: integer-order lower
//! incomplete gamma on the whole real line, regularized P, Mobius mu,
//! integer-argument zeta, the logarithmic integral, and Riemann's R.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::policy::{PrecisionPolicy, MAX_WORKING_DIGITS};

pub(crate) const LOG10_E: f64 = 0.4342944819032518;

/// Guard digits added to every elevated working precision.
pub(crate) const GUARD_DIGITS: u32 = 20;

// ---------------------------------------------------------------------------
// Euler's constant
// ---------------------------------------------------------------------------

static EULER_CACHE: Lazy<Mutex<HashMap<u32, BigReal>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Euler's constant at `digits` working precision (Brent-McMillan:
/// gamma = A(n)/B(n) - ln n with A,B the harmonic-weighted and plain
/// I_0-type sums; n a power of two so ln n reduces to the cached ln 2).
pub fn euler_gamma(digits: u32) -> BigReal {
    let bucket = digits.max(16).next_multiple_of(32);
    if let Some(v) = EULER_CACHE.lock().unwrap().get(&bucket) {
        return v.with_digits(digits.max(16));
    }
    let v = euler_gamma_uncached(bucket);
    EULER_CACHE
        .lock()
        .unwrap()
        .insert(bucket, v.clone());
    v.with_digits(digits.max(16))
}

fn euler_gamma_uncached(digits: u32) -> BigReal {
    let wp = digits + 10;
    // error term ~ e^{-4n}: pick n = 2^j >= 0.58*(digits+12)
    let target = 0.58 * (digits as f64 + 12.0);
    let j = target.log2().ceil().max(3.0) as u32;
    let n = 1u64 << j;
    let tiny_log10 = -((wp + 8) as f64);

    let nb = BigReal::from_u64(n, wp);
    let mut b = BigReal::one(wp); // (n^k/k!)^2
    let mut h = BigReal::zero(wp); // H_k
    let mut sum_a = BigReal::zero(wp);
    let mut sum_b = b.clone();
    let mut k = 1u64;
    loop {
        let f = nb.div_u64(k);
        b = b.mul(&f).mul(&f);
        h = h.add(&BigReal::one(wp).div_u64(k));
        sum_a = sum_a.add(&b.mul(&h));
        sum_b = sum_b.add(&b);
        if k > n && b.mul(&h).log10_abs() - sum_b.log10_abs() < tiny_log10 {
            break;
        }
        k += 1;
    }
    let ln_n = BigReal::ln2(wp).mul_u64(j as u64);
    sum_a.div(&sum_b).sub(&ln_n).with_digits(digits)
}

// ---------------------------------------------------------------------------
// Bernoulli numbers (exact rationals, generated once)
// ---------------------------------------------------------------------------

/// Highest even index kept in the Bernoulli table.
pub(crate) const BERNOULLI_MAX: usize = 58;

static BERNOULLI: Lazy<Vec<BigRational>> = Lazy::new(|| {
    // B_m from the binomial recurrence sum_{j<=m} C(m+1,j) B_j = 0, B_0 = 1.
    let n = BERNOULLI_MAX;
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            if j > 0 {
                // C(m+1, j) from C(m+1, j-1)
                binom = &binom * BigInt::from(m + 2 - j) / BigInt::from(j);
            }
            acc += BigRational::from(binom.clone()) * bj;
        }
        let mp1 = BigRational::from(BigInt::from(m + 1));
        b.push(-acc / mp1);
    }
    b
});

/// Exact Bernoulli number B_m as a rational (valid for m <= BERNOULLI_MAX).
pub(crate) fn bernoulli_rational(m: usize) -> &'static BigRational {
    &BERNOULLI[m]
}

fn rational_to_bigreal(r: &BigRational, digits: u32) -> BigReal {
    let d = digits.max(40);
    let num = BigReal::from_decimal_str(&r.numer().to_string(), d).expect("int parse");
    let den = BigReal::from_decimal_str(&r.denom().to_string(), d).expect("int parse");
    num.div(&den)
}

// ---------------------------------------------------------------------------
// Mobius function
// ---------------------------------------------------------------------------

/// Mobius mu via trial-division factorization.
pub fn mobius(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::domain("n", "mobius requires n >= 1"));
    }
    let mut m = n;
    let mut factors = 0u32;
    let strip = |p: u64, m: &mut u64, factors: &mut u32| -> bool {
        if *m % p == 0 {
            *m /= p;
            if *m % p == 0 {
                return false; // squareful
            }
            *factors += 1;
        }
        true
    };
    if !strip(2, &mut m, &mut factors) {
        return Ok(0);
    }
    let mut p = 3u64;
    while p * p <= m {
        if !strip(p, &mut m, &mut factors) {
            return Ok(0);
        }
        p += 2;
    }
    if m > 1 {
        factors += 1;
    }
    Ok(if factors % 2 == 0 { 1 } else { -1 })
}

// ---------------------------------------------------------------------------
// Integer-argument zeta
// ---------------------------------------------------------------------------

static ZETA_CACHE: Lazy<Mutex<HashMap<(u32, u32), BigReal>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// zeta(k) for integer k >= 2 to roughly 10^-digits relative accuracy.
/// Small k uses Euler-Maclaurin off a direct partial sum; large k where
/// 2^-k is already below tolerance short-circuits to a few direct terms.
pub fn zeta_int(k: u32, policy: &PrecisionPolicy) -> Result<BigReal> {
    if k < 2 {
        return Err(Error::domain("k", format!("zeta_int requires k >= 2, got {k}")));
    }
    policy.check_feasible("zeta_int")?;
    Ok(zeta_at_digits(k, policy.digits))
}

pub(crate) fn zeta_at_digits(k: u32, digits: u32) -> BigReal {
    let bucket = digits.max(16).next_multiple_of(32);
    if let Some(v) = ZETA_CACHE.lock().unwrap().get(&(k, bucket)) {
        return v.with_digits(digits.max(16));
    }
    let v = zeta_uncached(k, bucket);
    ZETA_CACHE.lock().unwrap().insert((k, bucket), v.clone());
    v.with_digits(digits.max(16))
}

fn zeta_uncached(k: u32, digits: u32) -> BigReal {
    let wp = digits + 10;
    let tol_log10 = -((digits + 6) as f64);

    // direct tail is below tolerance: sum the few surviving terms
    if (k as f64) * 0.301 > digits as f64 + 8.0 {
        let mut s = BigReal::one(wp);
        for j in 2u64.. {
            let t = BigReal::from_u64(j, wp).powi(k as usize).recip();
            if t.log10_abs() < tol_log10 - 2.0 {
                break;
            }
            s = s.add(&t);
        }
        return s.with_digits(digits);
    }

    let mut j_cut = 64usize;
    loop {
        if let Some(v) = zeta_euler_maclaurin(k, wp, j_cut, tol_log10) {
            return v.with_digits(digits);
        }
        j_cut *= 4;
        assert!(j_cut <= 1 << 20, "zeta Euler-Maclaurin failed to converge");
    }
}

/// One Euler-Maclaurin attempt with cutoff J; None if the correction series
/// hits the Bernoulli table end before reaching tolerance.
fn zeta_euler_maclaurin(k: u32, wp: u32, j_cut: usize, tol_log10: f64) -> Option<BigReal> {
    let mut direct = BigReal::zero(wp);
    for j in 1..=j_cut {
        direct = direct.add(&BigReal::from_u64(j as u64, wp).powi(k as usize).recip());
    }
    let jb = BigReal::from_u64(j_cut as u64, wp);
    let j_pow_neg_k = jb.powi(k as usize).recip(); // J^-k
    // integral tail J^{1-k}/(k-1)
    let mut sum = direct.add(&j_pow_neg_k.mul(&jb).div_u64((k - 1) as u64));
    // - J^-k / 2
    sum = sum.sub(&j_pow_neg_k.div_u64(2));

    // corrections: B_{2m}/(2m)! * (k)_{2m-1} * J^{-k-2m+1}
    let j_sq_inv = jb.mul(&jb).recip();
    let mut poch = BigReal::from_u64(k as u64, wp); // (k)_1 = k
    let mut fact = BigReal::from_u64(2, wp); // (2m)! at m=1
    let mut j_pow = j_pow_neg_k.mul(&jb); // J^{-k-2m+1} at m=1 is J^{-k-1}... set below
    j_pow = j_pow.mul(&j_sq_inv); // J^{-k-1}
    let mut m = 1usize;
    loop {
        let b2m = rational_to_bigreal(bernoulli_rational(2 * m), wp);
        let term = b2m.div(&fact).mul(&poch).mul(&j_pow);
        sum = sum.add(&term);
        let rel = term.log10_abs() - sum.log10_abs();
        if rel < tol_log10 {
            return Some(sum);
        }
        m += 1;
        if 2 * m > BERNOULLI_MAX {
            return None;
        }
        // advance (k)_{2m-1}: multiply by (k+2m-3)(k+2m-2)
        poch = poch
            .mul_u64((k as u64) + (2 * m as u64) - 3)
            .mul_u64((k as u64) + (2 * m as u64) - 2);
        // advance (2m)!
        fact = fact.mul_u64(2 * m as u64 - 1).mul_u64(2 * m as u64);
        j_pow = j_pow.mul(&j_sq_inv);
    }
}

/// Prime zeta P(s) = sum over primes p of p^-s, via the Mobius/log-zeta
/// identity. Internal: feeds the twin-constant tail correction.
pub(crate) fn prime_zeta(s: u32, digits: u32) -> BigReal {
    let wp = digits + 8;
    let mut sum = BigReal::zero(wp);
    let mut m = 1u32;
    loop {
        let ms = m * s;
        // remaining terms are below ln zeta(ms) ~ 2^-ms
        if (ms as f64) * 0.301 > (digits as f64) + 6.0 {
            break;
        }
        let mu = mobius(m as u64).expect("m >= 1");
        if mu != 0 {
            let z = zeta_at_digits(ms, wp);
            let t = z.ln().div_u64(m as u64);
            sum = if mu > 0 { sum.add(&t) } else { sum.sub(&t) };
        }
        m += 1;
    }
    sum.with_digits(digits)
}

// ---------------------------------------------------------------------------
// Lower incomplete gamma (integer order, any real argument)
// ---------------------------------------------------------------------------

/// gamma(n, z) for integer n >= 1 and real z, to policy relative tolerance.
///
/// Positive z uses cancellation-free series; negative z evaluates the
/// closed form (n-1)!(1 - e^{-z} sum_{k<n} z^k/k!) with working precision
/// elevated to absorb the alternating inner sum.
pub fn lower_gamma(n: u32, z: f64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if !z.is_finite() {
        return Err(Error::domain("z", "must be finite"));
    }
    policy.check_feasible("lower_gamma")?;
    let zb = BigReal::from_f64(z, policy.digits.max(17));
    lower_gamma_br(n, &zb, policy)
}

pub(crate) fn lower_gamma_br(n: u32, z: &BigReal, policy: &PrecisionPolicy) -> Result<BigReal> {
    if n < 1 {
        return Err(Error::domain("n", "lower_gamma requires n >= 1"));
    }
    if z.is_zero() {
        return Ok(BigReal::zero(policy.digits));
    }
    if z.is_positive() {
        let p = regularized_p_pos(n, z, policy)?;
        // gamma = (n-1)! * P
        let wp = p.precision_digits();
        let mut fact = BigReal::one(wp);
        for j in 2..n as u64 {
            fact = fact.mul_u64(j);
        }
        Ok(p.mul(&fact).with_digits(policy.digits))
    } else {
        let b = neg_arg_bracket(n, &z.neg(), policy)?;
        // gamma = (n-1)! * (1 - e^y S_n) = (n-1)! * b
        let wp = b.precision_digits();
        let mut fact = BigReal::one(wp);
        for j in 2..n as u64 {
            fact = fact.mul_u64(j);
        }
        Ok(b.mul(&fact).with_digits(policy.digits))
    }
}

/// P(n, z) = gamma(n,z)/(n-1)! for z > 0, in [0, 1], no catastrophic
/// cancellation on either branch.
fn regularized_p_pos(n: u32, z: &BigReal, policy: &PrecisionPolicy) -> Result<BigReal> {
    let wp = policy.digits + GUARD_DIGITS;
    let zf = z.to_f64();
    let z_wp = z.with_digits(wp);
    if (n as f64) > zf {
        // P = z^n e^-z / n! * [1 + z/(n+1) + z^2/((n+1)(n+2)) + ...]
        let mut t = z_wp.exp().recip(); // e^-z
        for j in 1..=n as u64 {
            t = t.mul(&z_wp).div_u64(j);
        }
        let mut sum = t.clone();
        let mut k = 1u64;
        loop {
            t = t.mul(&z_wp).div_u64(n as u64 + k);
            sum = sum.add(&t);
            // geometric tail with ratio z/(n+k+1)
            let r = zf / (n as f64 + k as f64 + 1.0);
            if r < 0.9 {
                let bound = t.log10_abs() + (r / (1.0 - r)).log10();
                if bound < sum.log10_abs() + (policy.tail_tol.log10() - 2.0) {
                    break;
                }
            }
            k += 1;
            if k as usize > policy.max_terms {
                return Err(Error::NonConvergence {
                    context: "lower_gamma",
                    max_terms: policy.max_terms,
                });
            }
        }
        Ok(clamp01(sum))
    } else {
        // P = 1 - e^-z sum_{k<n} z^k/k!; partial Poisson CDF below ~0.5
        let mut term = BigReal::one(wp);
        let mut s = BigReal::one(wp);
        for k in 1..n as u64 {
            term = term.mul(&z_wp).div_u64(k);
            s = s.add(&term);
        }
        let q = s.div(&z_wp.exp());
        Ok(clamp01(BigReal::one(wp).sub(&q)))
    }
}

fn clamp01(v: BigReal) -> BigReal {
    let wp = v.precision_digits();
    let zero = BigReal::zero(wp);
    let one = BigReal::one(wp);
    if v < zero {
        zero
    } else if v > one {
        one
    } else {
        v
    }
}

/// The bracket 1 - e^y * S_n with S_n = sum_{k<n} (-y)^k / k!, evaluated at
/// elevated precision; equals gamma(n, -y)/(n-1)!. `y > 0`.
///
/// Working precision starts at digits + y*log10(e) + guard (the largest
/// inner term is ~e^y times the sum) and is re-elevated once if the
/// achieved absolute error cannot certify the requested relative tolerance.
fn neg_arg_bracket(n: u32, y: &BigReal, policy: &PrecisionPolicy) -> Result<BigReal> {
    let yf = y.to_f64();
    let base = policy.digits + (yf * LOG10_E).ceil().max(0.0) as u32 + GUARD_DIGITS;
    let mut wp = base;
    for _attempt in 0..2 {
        if wp > MAX_WORKING_DIGITS {
            break;
        }
        let y_wp = y.with_digits(wp);
        let mut term = BigReal::one(wp);
        let mut s = BigReal::one(wp);
        let mut max_term_log10 = 0.0f64;
        for k in 1..n as u64 {
            term = term.mul(&y_wp).div_u64(k).neg();
            s = s.add(&term);
            max_term_log10 = max_term_log10.max(term.log10_abs());
        }
        let ey = y_wp.exp();
        let b = BigReal::one(wp).sub(&ey.mul(&s));
        // absolute roundoff scale of the bracket
        let err_log10 =
            max_term_log10 + yf * LOG10_E + (n as f64 + 10.0).log10() - wp as f64;
        let need_log10 = b.log10_abs() + policy.tail_tol.log10();
        if err_log10 < need_log10 || b.is_zero() {
            return Ok(b);
        }
        let deficit = (err_log10 - need_log10).ceil() as u32 + 5;
        wp += deficit;
    }
    Err(Error::PrecisionExhausted {
        context: "lower_gamma",
        suggested_digits: policy.digits + (wp - base),
    })
}

/// Regularized P(n, z) = gamma(n, z)/Gamma(n); lies in [0,1] for z >= 0.
pub fn regularized_p(n: u32, z: f64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if n < 1 {
        return Err(Error::domain("n", "regularized_p requires n >= 1"));
    }
    if !z.is_finite() {
        return Err(Error::domain("z", "must be finite"));
    }
    policy.check_feasible("regularized_p")?;
    if z == 0.0 {
        return Ok(BigReal::zero(policy.digits));
    }
    let zb = BigReal::from_f64(z, policy.digits.max(17));
    if z > 0.0 {
        Ok(regularized_p_pos(n, &zb, policy)?.with_digits(policy.digits))
    } else {
        Ok(neg_arg_bracket(n, &zb.neg(), policy)?.with_digits(policy.digits))
    }
}

// ---------------------------------------------------------------------------
// Logarithmic integral and Riemann R
// ---------------------------------------------------------------------------

/// li(x) for x > 1 via Ei(ln x) = gamma + ln ln x + sum (ln x)^k / (k k!).
pub fn log_integral(x: f64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if !(x > 1.0) {
        return Err(Error::domain(
            "x",
            format!("log_integral requires x > 1, got {x}"),
        ));
    }
    policy.check_feasible("log_integral")?;
    let wp = policy.digits + GUARD_DIGITS;
    let y = BigReal::from_f64(x, wp).ln();
    if y.is_zero() {
        return Err(Error::domain(
            "x",
            "log_integral argument indistinguishable from 1 at working precision",
        ));
    }
    Ok(ei_positive(&y, policy)?.with_digits(policy.digits))
}

pub(crate) fn ei_positive(y: &BigReal, policy: &PrecisionPolicy) -> Result<BigReal> {
    let wp = y.precision_digits();
    let yf = y.to_f64();
    let mut sum = euler_gamma(wp).add(&y.ln());
    let mut term = BigReal::one(wp);
    let mut k = 1u64;
    loop {
        term = term.mul(y).div_u64(k);
        let t = term.div_u64(k);
        sum = sum.add(&t);
        let r = yf / (k as f64 + 1.0);
        if r < 0.9 {
            let bound = t.log10_abs() + (r / (1.0 - r)).log10();
            if bound < sum.log10_abs().max(0.0) + policy.tail_tol.log10() - 2.0 {
                break;
            }
        }
        k += 1;
        if k as usize > policy.max_terms {
            return Err(Error::NonConvergence {
                context: "log_integral",
                max_terms: policy.max_terms,
            });
        }
    }
    Ok(sum)
}

/// Riemann's R via Gram's series 1 + sum_k (ln x)^k / (k k! zeta(k+1)).
pub fn riemann_r(x: f64, policy: &PrecisionPolicy) -> Result<BigReal> {
    if !(x >= 1.0) {
        return Err(Error::domain(
            "x",
            format!("riemann_r requires x >= 1, got {x}"),
        ));
    }
    policy.check_feasible("riemann_r")?;
    let wp = policy.digits + GUARD_DIGITS;
    if x == 1.0 {
        return Ok(BigReal::one(policy.digits));
    }
    let y = BigReal::from_f64(x, wp).ln();
    let yf = y.to_f64();
    let mut sum = BigReal::one(wp);
    let mut u = BigReal::one(wp); // y^k / k!
    let mut k = 1u64;
    loop {
        u = u.mul(&y).div_u64(k);
        let t = u.div_u64(k).div(&zeta_at_digits(k as u32 + 1, wp));
        sum = sum.add(&t);
        // ratio bound: (y/(k+1)) * (k/(k+1)) * zeta(k+1)/zeta(k+2) <= 1.4 y/(k+1)
        let r = 1.4 * yf / (k as f64 + 1.0);
        if r < 0.9 {
            let bound = t.log10_abs() + (r / (1.0 - r)).log10();
            if bound < sum.log10_abs().max(0.0) + policy.tail_tol.log10() - 2.0 {
                break;
            }
        }
        k += 1;
        if k as usize > policy.max_terms {
            return Err(Error::NonConvergence {
                context: "riemann_r",
                max_terms: policy.max_terms,
            });
        }
    }
    Ok(sum.with_digits(policy.digits))
}
