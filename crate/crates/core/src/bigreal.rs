//! Arbitrary-precision real numbers with explicit decimal working precision.
//!
//! Thin wrapper over `astro_float::BigFloat`. Every value carries
//! `precision_digits`; arithmetic between two values is carried out at the
//! maximum of the operand precisions, and decimal serialization emits exactly
//! `precision_digits` significant digits.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};
use crate::policy::MIN_DIGITS;

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = 3.321928094887362_f64;
const LOG10_2: f64 = 0.301029995663981_f64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

pub(crate) fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary precision backing `digits` decimal digits, with guard bits.
pub(crate) fn bits_for(digits: u32) -> usize {
    (digits as f64 * LOG2_10).ceil() as usize + 12
}

#[derive(Clone, Debug)]
pub struct BigReal {
    v: BigFloat,
    digits: u32,
}

impl BigReal {
    fn wrap(v: BigFloat, digits: u32) -> Self {
        debug_assert!(!v.is_nan(), "BigReal arithmetic produced NaN");
        BigReal { v, digits }
    }

    pub fn zero(digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        BigReal {
            v: BigFloat::new(bits_for(digits)),
            digits,
        }
    }

    pub fn one(digits: u32) -> Self {
        Self::from_u64(1, digits)
    }

    pub fn from_u64(u: u64, digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        BigReal {
            v: BigFloat::from_u64(u, bits_for(digits)),
            digits,
        }
    }

    pub fn from_u128(u: u128, digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        BigReal {
            v: BigFloat::from_u128(u, bits_for(digits)),
            digits,
        }
    }

    pub fn from_i64(i: i64, digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        BigReal {
            v: BigFloat::from_i64(i, bits_for(digits)),
            digits,
        }
    }

    pub fn from_f64(f: f64, digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        assert!(f.is_finite(), "BigReal::from_f64 requires a finite value");
        BigReal {
            v: BigFloat::from_f64(f, bits_for(digits)),
            digits,
        }
    }

    /// Parse a decimal string: optional sign, digits, optional '.', optional
    /// exponent `e±k`. Exact round-trip partner of [`Self::to_decimal_string`].
    pub fn from_decimal_str(s: &str, digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::domain(
                "digits",
                format!("must be at least {MIN_DIGITS}"),
            ));
        }
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::parse("value", "empty decimal string"));
        }
        let body = t.strip_prefix(['+', '-']).unwrap_or(t);
        let ok = !body.is_empty()
            && body.chars().all(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-')
            && body.chars().next().map(|c| c.is_ascii_digit() || c == '.').unwrap_or(false);
        if !ok {
            return Err(Error::parse("value", format!("malformed decimal string `{t}`")));
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, bits_for(digits), RM, cc));
        if v.is_nan() {
            return Err(Error::parse("value", format!("malformed decimal string `{t}`")));
        }
        Ok(BigReal { v, digits })
    }

    pub fn precision_digits(&self) -> u32 {
        self.digits
    }

    /// Re-round to a new declared precision.
    pub fn with_digits(&self, digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        let mut v = self.v.clone();
        v.set_precision(bits_for(digits), RM)
            .expect("set_precision");
        BigReal { v, digits }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.v.is_positive() && !self.v.is_zero()
    }

    fn prec_max(&self, other: &Self) -> (u32, usize) {
        let d = self.digits.max(other.digits);
        (d, bits_for(d))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (d, p) = self.prec_max(other);
        Self::wrap(self.v.add(&other.v, p, RM), d)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (d, p) = self.prec_max(other);
        Self::wrap(self.v.sub(&other.v, p, RM), d)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (d, p) = self.prec_max(other);
        Self::wrap(self.v.mul(&other.v, p, RM), d)
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "BigReal division by zero");
        let (d, p) = self.prec_max(other);
        Self::wrap(self.v.div(&other.v, p, RM), d)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "BigReal reciprocal of zero");
        Self::wrap(self.v.reciprocal(bits_for(self.digits), RM), self.digits)
    }

    pub fn mul_u64(&self, u: u64) -> Self {
        let o = BigFloat::from_u64(u, 64);
        Self::wrap(self.v.mul(&o, bits_for(self.digits), RM), self.digits)
    }

    pub fn div_u64(&self, u: u64) -> Self {
        assert!(u != 0, "BigReal division by zero");
        let o = BigFloat::from_u64(u, 64);
        Self::wrap(self.v.div(&o, bits_for(self.digits), RM), self.digits)
    }

    pub fn neg(&self) -> Self {
        Self::wrap(self.v.neg(), self.digits)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.digits)
    }

    pub fn ln(&self) -> Self {
        assert!(self.is_positive(), "BigReal::ln requires a positive value");
        let p = bits_for(self.digits);
        Self::wrap(with_consts(|cc| self.v.ln(p, RM, cc)), self.digits)
    }

    pub fn exp(&self) -> Self {
        let p = bits_for(self.digits);
        Self::wrap(with_consts(|cc| self.v.exp(p, RM, cc)), self.digits)
    }

    pub fn sqrt(&self) -> Self {
        assert!(
            !self.is_negative(),
            "BigReal::sqrt requires a non-negative value"
        );
        Self::wrap(self.v.sqrt(bits_for(self.digits), RM), self.digits)
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.v.powi(n, bits_for(self.digits), RM), self.digits)
    }

    pub fn pi(digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        Self::wrap(with_consts(|cc| cc.pi(bits_for(digits), RM)), digits)
    }

    pub fn ln2(digits: u32) -> Self {
        assert!(digits >= MIN_DIGITS, "precision below {MIN_DIGITS} digits");
        Self::wrap(with_consts(|cc| cc.ln_2(bits_for(digits), RM)), digits)
    }

    /// Total order; the wrapper never constructs NaN.
    pub fn cmp_val(&self, other: &Self) -> Ordering {
        match self.v.cmp(&other.v) {
            Some(c) => c.cmp(&0),
            None => panic!("comparison involving NaN"),
        }
    }

    /// Binary exponent of the value: value = m * 2^exp with m in [0.5, 1).
    /// `None` for zero.
    pub fn exponent2(&self) -> Option<i32> {
        if self.v.is_zero() {
            None
        } else {
            self.v.exponent()
        }
    }

    /// Cheap estimate of log10(|value|); -inf for zero.
    pub fn log10_abs(&self) -> f64 {
        match self.exponent2() {
            None => f64::NEG_INFINITY,
            Some(e) => {
                let m = self
                    .v
                    .as_raw_parts()
                    .map(|(w, _, _, _, _)| w[w.len() - 1] as f64 / 18446744073709551616.0)
                    .unwrap_or(0.5);
                e as f64 * LOG10_2 + m.log10()
            }
        }
    }

    /// Nearest f64 (0 on underflow, +/-inf on overflow).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        let Some((words, _n, sign, exp, _inexact)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        let top = words[words.len() - 1] as f64;
        let next = if words.len() > 1 {
            words[words.len() - 2] as f64
        } else {
            0.0
        };
        let m = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
        let v = if exp > 1100 {
            f64::INFINITY
        } else if exp < -1100 {
            0.0
        } else {
            m * 2f64.powi(exp)
        };
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Decimal serialization with exactly `precision_digits` significant
    /// digits, scientific form `[-]d.dd...e±k`. Zero serializes as `0`.
    pub fn to_decimal_string(&self) -> String {
        if self.v.is_zero() {
            return "0".to_string();
        }
        let (sign, mut ds, mut e10) = with_consts(|cc| {
            self.v
                .convert_to_radix(Radix::Dec, RM, cc)
                .expect("decimal conversion")
        });
        // value = 0.d0 d1 ... * 10^e10
        // Strip leading zero digits (convert_to_radix may emit them).
        let lead = ds.iter().take_while(|&&d| d == 0).count();
        if lead > 0 {
            ds.drain(..lead);
            e10 -= lead as i32;
        }
        let want = self.digits as usize;
        if ds.len() > want {
            // round half-up at the cut
            let carry = ds[want] >= 5;
            ds.truncate(want);
            if carry {
                let mut i = want;
                loop {
                    if i == 0 {
                        ds.insert(0, 1);
                        ds.pop();
                        e10 += 1;
                        break;
                    }
                    i -= 1;
                    if ds[i] == 9 {
                        ds[i] = 0;
                    } else {
                        ds[i] += 1;
                        break;
                    }
                }
            }
        } else {
            ds.resize(want, 0);
        }
        let mut out = String::with_capacity(want + 8);
        if sign == Sign::Neg {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        out.push('.');
        for &d in &ds[1..] {
            out.push((b'0' + d) as char);
        }
        // leading digit d.ddd => exponent is e10 - 1
        out.push('e');
        let ex = e10 as i64 - 1;
        if ex >= 0 {
            out.push('+');
        }
        out.push_str(&ex.to_string());
        out
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_val(other) == Ordering::Equal
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_val(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                BigReal::$method(self, rhs)
            }
        }
        impl std::ops::$trait for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                BigReal::$method(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl std::ops::Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_construction_is_exact() {
        let a = BigReal::from_u64(12345, 20);
        assert_eq!(a.to_f64(), 12345.0);
        let b = BigReal::from_i64(-7, 16);
        assert_eq!(b.to_f64(), -7.0);
    }

    #[test]
    fn max_precision_rule() {
        let a = BigReal::from_u64(1, 20);
        let b = BigReal::from_u64(3, 40);
        let q = a.div(&b);
        assert_eq!(q.precision_digits(), 40);
    }

    #[test]
    fn decimal_round_trip() {
        let x = BigReal::from_u64(1, 30).div_u64(3);
        let s = x.to_decimal_string();
        let y = BigReal::from_decimal_str(&s, 30).unwrap();
        let diff = x.sub(&y).abs();
        // first p-2 digits preserved
        assert!(diff.log10_abs() < x.log10_abs() - 28.0);
    }

    #[test]
    fn serialization_forms() {
        assert_eq!(BigReal::zero(16).to_decimal_string(), "0");
        let x = BigReal::from_f64(-0.0025, 16);
        let s = x.to_decimal_string();
        assert!(s.starts_with("-2.5"));
        assert!(s.ends_with("e-3"));
        let y = BigReal::from_decimal_str("1.5e+3", 16).unwrap();
        assert_eq!(y.to_f64(), 1500.0);
    }

    #[test]
    fn ln_exp_round_trip() {
        let x = BigReal::from_u64(100, 40);
        let y = x.ln().exp();
        let rel = x.sub(&y).abs().div(&x);
        assert!(rel.log10_abs() < -38.0);
    }

    #[test]
    fn log10_abs_estimate() {
        let x = BigReal::from_u64(1_000_000, 20);
        assert!((x.log10_abs() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn to_f64_extremes() {
        let big = BigReal::from_decimal_str("1e+400", 20).unwrap();
        assert!(big.to_f64().is_infinite());
        let tiny = BigReal::from_decimal_str("1e-400", 20).unwrap();
        assert_eq!(tiny.to_f64(), 0.0);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(BigReal::from_decimal_str("abc", 16).is_err());
        assert!(BigReal::from_decimal_str("", 16).is_err());
        assert!(BigReal::from_decimal_str("--5", 16).is_err());
    }
}
