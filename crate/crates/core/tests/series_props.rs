//! Property tests: randomized inputs exercising the invariants the
//! hand-picked oracle points cannot cover.

use congamma_core::counting::{double_constant, integer_count, pi1_bar, ScalingChoice};
use congamma_core::goldbach::straddle_density;
use congamma_core::propagator::{
    path_decomposition_green, step_coeffs, transfer_matrix_green, PiecewisePotential,
};
use congamma_core::special::mobius;
use congamma_core::{BigReal, PrecisionPolicy};
use proptest::prelude::*;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The counting series must telescope to x for arbitrary positive
    /// arguments, not just round numbers.
    #[test]
    fn integer_count_identity_holds_everywhere(x in 0.3f64..2000.0) {
        let policy = PrecisionPolicy::with_digits(25).unwrap();
        let r = integer_count(x, &policy).unwrap();
        let rel = (r.value.to_f64() / x - 1.0).abs();
        prop_assert!(rel < 1e-9, "N({x}) off by {rel}");
    }

    /// Doubling the working precision must move a reported value by less
    /// than the tail bound the first run claimed for itself.
    #[test]
    fn reported_tail_bounds_are_honest(x in 10.0f64..5.0e5) {
        let lo = PrecisionPolicy::with_digits(20).unwrap();
        let hi = PrecisionPolicy::with_digits(40).unwrap();
        let a = pi1_bar(x, &lo, &ScalingChoice::NegLog).unwrap();
        let b = pi1_bar(x, &hi, &ScalingChoice::NegLog).unwrap();
        let moved = a.value.sub(&b.value).abs().to_f64();
        let allowed = a.tail_bound.to_f64().max(1e-18 * b.value.to_f64().abs());
        prop_assert!(
            moved <= allowed,
            "pi1_bar({x}) moved {moved} past its claimed bound {allowed}"
        );
    }

    /// The double index enters the density only through C_2i/(2i).
    #[test]
    fn straddle_density_index_scaling(
        x in 100.0f64..1.0e6,
        i in 2u32..40,
    ) {
        let policy = PrecisionPolicy::default();
        let base = straddle_density(1, x, &policy).unwrap();
        let c1 = double_constant(1, &policy).unwrap().constant;
        let ci = double_constant(i, &policy).unwrap().constant;
        let scaled = straddle_density(i, x, &policy)
            .unwrap()
            .mul_u64(2 * i as u64)
            .div(&ci)
            .mul(&c1)
            .div_u64(2);
        let rel = scaled.sub(&base).abs().to_f64() / base.to_f64();
        prop_assert!(rel < 1e-38, "i = {i}, x = {x}: rel {rel}");
    }

    /// Decimal serialization round-trips through the parser exactly at
    /// f64 granularity.
    #[test]
    fn decimal_round_trip(v in -1.0e12f64..1.0e12) {
        let b = BigReal::from_f64(v, 40);
        let s = b.to_decimal_string();
        let back = BigReal::from_decimal_str(&s, 40).unwrap();
        prop_assert_eq!(back.to_f64(), v);
    }

    /// Flux through a propagating step is conserved for any energies.
    #[test]
    fn step_flux_conservation(
        v0 in -5.0f64..5.0,
        margin in 0.01f64..6.0,
    ) {
        let e = v0.max(0.0) + margin;
        let s = step_coeffs(e, v0).unwrap();
        let flux = s.r.norm_sqr() + s.t.norm_sqr();
        prop_assert!((flux - 1.0).abs() < 1e-12, "flux {flux} at E={e}, V0={v0}");
    }

    /// The exact Green function is symmetric in its endpoints.
    #[test]
    fn green_reciprocity(
        b in -1.0f64..1.0,
        dv in -2.0f64..2.0,
        margin in 0.3f64..3.0,
        xa_off in 0.05f64..1.5,
        xb_off in 0.05f64..1.5,
    ) {
        let pot = PiecewisePotential::new(vec![b], vec![0.0, dv]).unwrap();
        let e = dv.max(0.0) + margin;
        let (xa, xb) = (b - xa_off, b + xb_off);
        let fwd = transfer_matrix_green(&pot, e, xa, xb).unwrap();
        let rev = transfer_matrix_green(&pot, e, xb, xa).unwrap();
        prop_assert!((fwd.value - rev.value).norm() < 1e-10);
        // And the recursion closes onto the same value at depth 1.
        let (rec, _) = path_decomposition_green(&pot, e, xa, xb, 1).unwrap();
        prop_assert!((rec.value - fwd.value).norm() < 1e-10 * fwd.value.norm());
    }

    /// Multiplicativity on coprime arguments.
    #[test]
    fn mobius_is_multiplicative(m in 1u64..300, n in 1u64..300) {
        prop_assume!(gcd(m, n) == 1);
        let left = mobius(m * n).unwrap();
        let right = mobius(m).unwrap() * mobius(n).unwrap();
        prop_assert_eq!(left, right);
    }
}
