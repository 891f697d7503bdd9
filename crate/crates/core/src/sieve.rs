//! Exact number-theoretic oracles: segmented sieve, prime counting, the
//! prime-power counting function, prime-double and straddle counts, and the
//! partial sums of C_{2i}^2/(2i) needed by the straddle expectation.

use std::sync::mpsc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::policy::PrecisionPolicy;

/// Hard ceiling for sieve limits (bitmap of odds: 256 MiB at the ceiling).
pub const SIEVE_CEILING: u64 = 1 << 32;

/// Ceiling for the C_{2i} sweep (per-entry remainders are u32).
pub const C2I_CEILING: u64 = 4_000_000_000;

/// Default number of odd entries marked per construction segment.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

/// i-distance between persisted checkpoints of the C_{2i} sweep.
pub const C2I_CHECKPOINT_EVERY: u64 = 10_000_000;

/// Limits up to here use exact per-term arithmetic for the C_{2i} sum.
const C2I_EXACT_PATH_MAX: u64 = 100_000;

/// Sweep segment width; resumable checkpoints must sit on a multiple of this.
pub const C2I_SEGMENT: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// PrimeTable
// ---------------------------------------------------------------------------

/// Primality of every odd number in 3..=limit, one bit each (set = composite),
/// built segment by segment. 2 is handled out of band.
pub struct PrimeTable {
    limit: u64,
    segment_size: usize,
    composite: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit, "query beyond table limit");
        if n < 2 {
            return false;
        }
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let idx = ((n - 3) / 2) as usize;
        self.composite[idx / 64] & (1u64 << (idx % 64)) == 0
    }

    /// Iterate all primes in ascending order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(2)
            .chain((0..=(self.limit.saturating_sub(3) / 2))
                .filter(move |&i| self.composite[(i / 64) as usize] & (1u64 << (i % 64)) == 0)
                .map(|i| 2 * i + 3))
            .filter(move |&p| p <= self.limit)
    }
}

/// Sieve of all primes `<= limit` with O(segment) construction memory
/// besides the result bitmap.
pub fn primes_up_to(limit: u64) -> Result<PrimeTable> {
    primes_up_to_with_segment(limit, DEFAULT_SEGMENT_SIZE)
}

pub fn primes_up_to_with_segment(limit: u64, segment_size: usize) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::range("limit", "sieve limit must be at least 2"));
    }
    if limit > SIEVE_CEILING {
        return Err(Error::resource(
            "limit",
            format!("sieve limit {limit} exceeds ceiling {SIEVE_CEILING}"),
        ));
    }
    let n_odd = if limit >= 3 { ((limit - 3) / 2 + 1) as usize } else { 0 };
    let mut composite = vec![0u64; n_odd.div_ceil(64)];

    // base primes to sqrt(limit) by plain odd trial sieve
    let root = (limit as f64).sqrt() as u64 + 2;
    let mut base: Vec<u64> = Vec::new();
    let mut is_comp = vec![false; (root / 2 + 2) as usize];
    let mut p = 3u64;
    while p <= root {
        if !is_comp[(p / 2) as usize] {
            base.push(p);
            let mut q = p * p;
            while q <= root {
                is_comp[(q / 2) as usize] = true;
                q += 2 * p;
            }
        }
        p += 2;
    }

    // mark segments of the odd-index space [0, n_odd)
    let mut seg_start = 0usize;
    while seg_start < n_odd {
        let seg_end = (seg_start + segment_size).min(n_odd);
        let lo_val = 2 * seg_start as u64 + 3;
        let hi_val = 2 * (seg_end as u64 - 1) + 3;
        for &p in &base {
            if p * p > hi_val {
                break;
            }
            // first odd multiple of p in [max(p*p, lo_val), hi_val]
            let mut start = p * p;
            if start < lo_val {
                let k = lo_val.div_ceil(p);
                let k = if k % 2 == 0 { k + 1 } else { k };
                start = k * p;
            }
            let mut m = start;
            while m <= hi_val {
                let idx = ((m - 3) / 2) as usize;
                composite[idx / 64] |= 1u64 << (idx % 64);
                m += 2 * p;
            }
        }
        seg_start = seg_end;
    }

    Ok(PrimeTable {
        limit,
        segment_size,
        composite,
    })
}

/// Exact prime count pi(floor(x)).
pub fn pi_exact(x: f64, table: &PrimeTable) -> Result<u64> {
    if !(x >= 0.0) || x.floor() as u64 > table.limit {
        return Err(Error::range(
            "x",
            format!("pi_exact needs 0 <= x <= table limit {}", table.limit),
        ));
    }
    let n = x.floor() as u64;
    if n < 2 {
        return Ok(0);
    }
    let mut count = 1u64; // the prime 2
    let top = ((n.max(3) - 3) / 2) as usize;
    if n >= 3 {
        for i in 0..=top {
            if table.composite[i / 64] & (1u64 << (i % 64)) == 0 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Floor of the integer k-th root.
pub fn kth_root_floor(n: u64, k: u32) -> u64 {
    if k == 1 || n <= 1 {
        return if k == 1 { n } else { n.min(1) };
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    let pow = |b: u64| -> u128 { (0..k).try_fold(1u128, |a, _| a.checked_mul(b as u128)).unwrap_or(u128::MAX) };
    while r > 0 && pow(r) > n as u128 {
        r -= 1;
    }
    while pow(r + 1) <= n as u128 {
        r += 1;
    }
    r
}

/// Riemann's prime-power count Pi(x) = sum_k pi(x^{1/k})/k as an exact
/// rational.
pub fn big_pi_rational(x: f64, table: &PrimeTable) -> Result<BigRational> {
    if !(x >= 0.0) || x.floor() as u64 > table.limit {
        return Err(Error::range(
            "x",
            format!("big_pi needs 0 <= x <= table limit {}", table.limit),
        ));
    }
    let n = x.floor() as u64;
    let mut total = BigRational::zero();
    let mut k = 1u32;
    loop {
        let root = kth_root_floor(n, k);
        if root < 2 {
            break;
        }
        let cnt = pi_exact(root as f64, table)?;
        total += BigRational::new(BigInt::from(cnt), BigInt::from(k));
        k += 1;
    }
    Ok(total)
}

/// Pi(x) as a BigReal (50 digits; the value is an exact small rational).
pub fn big_pi_exact(x: f64, table: &PrimeTable) -> Result<BigReal> {
    let r = big_pi_rational(x, table)?;
    let num = BigReal::from_decimal_str(&r.numer().to_string(), 50)
        .expect("integer parse");
    let den_int = r.denom().clone();
    if den_int == BigInt::from(1) {
        return Ok(num);
    }
    let den = BigReal::from_decimal_str(&den_int.to_string(), 50).expect("integer parse");
    Ok(num.div(&den))
}

// ---------------------------------------------------------------------------
// Pair counts
// ---------------------------------------------------------------------------

/// Exact count of prime pairs (p, p+2i) with the larger element <= x.
pub fn double_count_exact(i: u32, x: u64, table: &PrimeTable) -> Result<u64> {
    if i == 0 {
        return Err(Error::range("i", "gap index must be positive"));
    }
    let gap = 2 * i as u64;
    if gap > x.saturating_sub(2) {
        return Err(Error::range(
            "i",
            format!("gap 2i = {gap} exceeds x - 2 = {}", x.saturating_sub(2)),
        ));
    }
    if x > table.limit {
        return Err(Error::range(
            "x",
            format!("x = {x} beyond table limit {}", table.limit),
        ));
    }
    let mut count = 0u64;
    for p in table.primes() {
        if p + gap > x {
            break;
        }
        if table.is_prime(p + gap) {
            count += 1;
        }
    }
    Ok(count)
}

/// Exact straddle count at integer midpoint x.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StraddleCount {
    pub x: u64,
    pub count: u64,
}

/// Number of offsets i with 1 <= i <= x-3 such that x-i and x+i are both
/// prime. Equals the number of unordered Goldbach pairs p+q = 2x with p < q.
pub fn straddle_count_exact(x: u64, table: &PrimeTable) -> Result<StraddleCount> {
    if x < 4 {
        return Ok(StraddleCount { x, count: 0 });
    }
    if 2 * x - 3 > table.limit {
        return Err(Error::range(
            "x",
            format!(
                "straddle count at x = {x} needs primality to {}, table limit is {}",
                2 * x - 3,
                table.limit
            ),
        ));
    }
    let mut count = 0u64;
    // i in [1, x-3] <=> lower member q = x - i in [3, x-1]
    for i in 1..=(x - 3) {
        let lo = x - i;
        if table.is_prime(lo) && table.is_prime(x + i) {
            count += 1;
        }
    }
    Ok(StraddleCount { x, count })
}

// ---------------------------------------------------------------------------
// Double-double accumulator for the deterministic C_{2i} sweep
// ---------------------------------------------------------------------------

/// Unevaluated sum of two f64 (roughly 31 significant digits).
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    pub fn add_f64(self, t: f64) -> Dd {
        let (s, e) = Self::two_sum(self.hi, t);
        let lo = self.lo + e;
        let (hi, lo) = Self::two_sum(s, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_dd(self, o: Dd) -> Dd {
        self.add_f64(o.hi).add_f64(o.lo)
    }

    pub fn to_bigreal(self, digits: u32) -> BigReal {
        let d = digits.max(40);
        BigReal::from_f64(self.hi, d).add(&BigReal::from_f64(self.lo, d))
    }

    pub fn from_bigreal(v: &BigReal) -> Dd {
        let hi = v.to_f64();
        let lo = v.sub(&BigReal::from_f64(hi, v.precision_digits())).to_f64();
        Dd { hi, lo }
    }
}

// ---------------------------------------------------------------------------
// C2i square sum
// ---------------------------------------------------------------------------

/// Raw inner sum sum_{i=lo+1}^{hi} f(i)^2/(2i) where f(i) is the odd-prime
/// correction product prod_{odd p | i} (p-1)/(p-2). The twin-constant square
/// is applied by the caller.
fn c2i_raw_segment(lo: u64, hi: u64, base_primes: &[u64]) -> Dd {
    let len = (hi - lo) as usize;
    let mut fac = vec![1.0f64; len];
    let mut rem: Vec<u32> = (0..len as u64)
        .map(|o| {
            let i = lo + 1 + o;
            (i >> i.trailing_zeros()) as u32
        })
        .collect();
    for &p in base_primes {
        if p * p > hi {
            break;
        }
        let ratio = (p as f64 - 1.0) / (p as f64 - 2.0);
        let mut m = (lo + 1).div_ceil(p) * p;
        while m <= hi {
            let idx = (m - lo - 1) as usize;
            fac[idx] *= ratio;
            let mut r = rem[idx] / p as u32;
            while r % p as u32 == 0 {
                r /= p as u32;
            }
            rem[idx] = r;
            m += p;
        }
    }
    let mut sum = Dd::ZERO;
    for idx in 0..len {
        let mut f = fac[idx];
        let r = rem[idx];
        if r > 1 {
            f *= (r as f64 - 1.0) / (r as f64 - 2.0);
        }
        let i = (lo + 1 + idx as u64) as f64;
        sum = sum.add_f64(f * f / (2.0 * i));
    }
    sum
}

fn odd_primes_to(root: u64) -> Vec<u64> {
    let mut is_comp = vec![false; (root / 2 + 2) as usize];
    let mut out = Vec::new();
    let mut p = 3u64;
    while p <= root {
        if !is_comp[(p / 2) as usize] {
            out.push(p);
            let mut q = p * p;
            while q <= root {
                is_comp[(q / 2) as usize] = true;
                q += 2 * p;
            }
        }
        p += 2;
    }
    out
}

/// Recompute the raw inner sum over the i-interval (lo, hi]. Used by the
/// cache layer to re-verify persisted checkpoints.
pub fn c2i_raw_interval(lo: u64, hi: u64) -> BigReal {
    let base = odd_primes_to((hi as f64).sqrt() as u64 + 2);
    let mut sum = Dd::ZERO;
    let mut s = lo;
    while s < hi {
        let e = (s + C2I_SEGMENT).min(hi);
        sum = sum.add_dd(c2i_raw_segment(s, e, &base));
        s = e;
    }
    sum.to_bigreal(40)
}

/// sum_{i=1}^{limit} C_{2i}^2/(2i) to the policy precision model.
///
/// Small limits evaluate each constant exactly in big-float arithmetic;
/// large limits run the segmented smallest-odd-prime-factor sweep with
/// double-double accumulation in a fixed reduction order, so the result is
/// bit-identical for any thread count.
pub fn c2i_square_sum(limit: u64, policy: &PrecisionPolicy) -> Result<BigReal> {
    c2i_square_sum_resumable(limit, policy, 0, None, &mut |_, _| {})
}

/// Resumable variant. `resume` provides a previously persisted checkpoint
/// `(i, raw_sum)`; `on_checkpoint` is invoked with the raw inner sum each
/// time the sweep crosses a multiple of [`C2I_CHECKPOINT_EVERY`].
/// `threads = 0` selects the available parallelism.
pub fn c2i_square_sum_resumable(
    limit: u64,
    policy: &PrecisionPolicy,
    threads: usize,
    resume: Option<(u64, BigReal)>,
    on_checkpoint: &mut dyn FnMut(u64, &BigReal),
) -> Result<BigReal> {
    if limit < 1 {
        return Err(Error::range("limit", "c2i sum needs limit >= 1"));
    }
    if limit > C2I_CEILING {
        return Err(Error::resource(
            "limit",
            format!("c2i sweep limit {limit} exceeds ceiling {C2I_CEILING}"),
        ));
    }
    let c2 = crate::counting::twin_constant(policy)?;
    let c2_sq = c2.mul(&c2);

    if limit <= C2I_EXACT_PATH_MAX && resume.is_none() {
        let wp = policy.digits + 10;
        let mut sum = BigReal::zero(wp);
        for i in 1..=limit {
            let f = odd_factor_product(i, wp);
            sum = sum.add(&f.mul(&f).div_u64(2 * i));
        }
        return Ok(sum.mul(&c2_sq).with_digits(policy.digits));
    }

    let (start_i, start_sum) = match resume {
        Some((i, ref s)) => {
            if i % C2I_SEGMENT != 0 || i > limit {
                return Err(Error::range(
                    "resume",
                    format!("checkpoint {i} is not a segment boundary at or below {limit}"),
                ));
            }
            (i, Dd::from_bigreal(s))
        }
        None => (0, Dd::ZERO),
    };

    let base = odd_primes_to((limit as f64).sqrt() as u64 + 2);
    let n_threads = if threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        threads
    };

    let seg_ids: Vec<u64> = {
        let mut v = Vec::new();
        let mut s = start_i;
        while s < limit {
            v.push(s);
            s += C2I_SEGMENT;
        }
        v
    };

    let mut total = start_sum;
    let mut partials: std::collections::BTreeMap<u64, Dd> = std::collections::BTreeMap::new();
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(u64, Dd)>();
        let seg_ids = &seg_ids;
        let base = &base;
        let next_ref = &next;
        for _ in 0..n_threads.min(seg_ids.len()).max(1) {
            let tx = tx.clone();
            scope.spawn(move || loop {
                let k = next_ref.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if k >= seg_ids.len() {
                    break;
                }
                let lo = seg_ids[k];
                let hi = (lo + C2I_SEGMENT).min(limit);
                let dd = c2i_raw_segment(lo, hi, base);
                if tx.send((lo, dd)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // merge strictly in segment order
        let mut expect = start_i;
        for (lo, dd) in rx {
            partials.insert(lo, dd);
            while let Some(dd) = partials.remove(&expect) {
                let hi = (expect + C2I_SEGMENT).min(limit);
                total = total.add_dd(dd);
                if hi % C2I_CHECKPOINT_EVERY == 0 || hi == limit {
                    on_checkpoint(hi, &total.to_bigreal(40));
                }
                expect = hi;
            }
        }
    });

    Ok(total
        .to_bigreal(policy.digits)
        .mul(&c2_sq)
        .with_digits(policy.digits))
}

/// prod over odd primes p | i of (p-1)/(p-2), exact trial division.
pub(crate) fn odd_factor_product(i: u64, digits: u32) -> BigReal {
    let mut m = i >> i.trailing_zeros();
    let mut out = BigReal::one(digits);
    let mut p = 3u64;
    while p * p <= m {
        if m % p == 0 {
            out = out.mul_u64(p - 1).div_u64(p - 2);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 2;
    }
    if m > 1 {
        out = out.mul_u64(m - 1).div_u64(m - 2);
    }
    out
}
