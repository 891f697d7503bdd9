use crate::bigreal::BigReal;
use crate::error::{Error, Result};

/// Hard ceiling on elevated working precision. Series that would need more
/// than this report precision exhaustion instead of running unbounded.
pub const MAX_WORKING_DIGITS: u32 = 40_000;

/// Minimum working precision carried by any [`BigReal`].
pub const MIN_DIGITS: u32 = 16;

/// Governs every truncated series evaluation: requested result precision,
/// the term budget, and the relative tail tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionPolicy {
    pub digits: u32,
    pub max_terms: usize,
    pub tail_tol: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            digits: 50,
            max_terms: 1_000_000,
            tail_tol: 1e-12,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(digits: u32, max_terms: usize, tail_tol: f64) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::domain(
                "digits",
                format!("must be at least {MIN_DIGITS}, got {digits}"),
            ));
        }
        if max_terms == 0 {
            return Err(Error::domain("max_terms", "must be at least 1"));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::domain("tail_tol", "must be positive"));
        }
        Ok(PrecisionPolicy {
            digits,
            max_terms,
            tail_tol,
        })
    }

    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, 1_000_000, 1e-12)
    }

    /// A tolerance finer than the requested precision can certify is an
    /// immediate precision-exhaustion condition: the partial sum cannot
    /// resolve terms at the tolerance scale. Suggests a sufficient setting.
    pub fn check_feasible(&self, context: &'static str) -> Result<()> {
        let needed = (-self.tail_tol.log10()).ceil() as i64 + 2;
        if (self.digits as i64) < needed {
            return Err(Error::PrecisionExhausted {
                context,
                suggested_digits: needed as u32,
            });
        }
        Ok(())
    }

    /// Working precision for a series whose intermediates exceed the result
    /// by `extra_digits` decimal digits of cancellation.
    pub fn working_digits(&self, extra_digits: u32, context: &'static str) -> Result<u32> {
        let wp = self.digits.saturating_add(extra_digits);
        if wp > MAX_WORKING_DIGITS {
            return Err(Error::PrecisionExhausted {
                context,
                suggested_digits: self.digits,
            });
        }
        Ok(wp)
    }
}

/// One truncated series evaluation together with its diagnostics.
///
/// `tail_bound` is an upper bound on the omitted tail (same units as
/// `value`, sign-free) and satisfies
/// `tail_bound <= tail_tol * max(1, |value|)` on success.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub input_x: f64,
    pub value: BigReal,
    pub terms_used: usize,
    pub tail_bound: BigReal,
    pub precision_used: u32,
    /// Set when the evaluation was requested outside the stated validity
    /// range of the underlying model (value still returned).
    pub validity_warning: bool,
}
