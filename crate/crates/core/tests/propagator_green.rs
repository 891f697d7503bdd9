//! Propagator oracles: closed-form kernels, eigenfunction expansions,
//! textbook barrier transmission, and the exact transfer-matrix Green
//! function as the reference for the interface recursion.

use congamma_core::propagator::{
    bounce_spectrum, dirichlet_kernel, free_kernel, path_decomposition_green, step_coeffs,
    transfer_matrix_green, transfer_scattering, Geometry, PiecewisePotential, Time,
};
use congamma_core::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

#[test]
fn imaginary_time_kernel_is_the_heat_kernel() {
    for (xa, xb, tau) in [(0.0, 0.0, 0.5), (-1.2, 0.7, 0.3), (2.0, 2.0, 0.05)] {
        let got = free_kernel(xa, xb, Time::Imag(tau)).unwrap();
        let want = (2.0 * std::f64::consts::PI * tau).sqrt().recip()
            * (-(xb - xa) * (xb - xa) / (2.0 * tau)).exp();
        assert!((got - c(want, 0.0)).norm() < 1e-14 * want.max(1.0));
    }
    assert!(free_kernel(0.0, 1.0, Time::Real(0.0)).is_err());
}

#[test]
fn real_time_kernel_modulus_and_phase() {
    // |K| = 1/sqrt(2 pi t) and the phase carries (dx)^2/2t on top of the
    // -pi/4 from the 1/sqrt(i) prefactor.
    let (xa, xb, t) = (0.3, 1.1, 0.7);
    let got = free_kernel(xa, xb, Time::Real(t)).unwrap();
    let modulus = (2.0 * std::f64::consts::PI * t).sqrt().recip();
    assert!((got.norm() - modulus).abs() < 1e-14);
    let phase = (xb - xa) * (xb - xa) / (2.0 * t) - std::f64::consts::FRAC_PI_4;
    let want = modulus * c(phase.cos(), phase.sin());
    assert!((got - want).norm() < 1e-14);
}

#[test]
fn half_line_kernel_vanishes_on_the_wall() {
    for tau in [0.1, 1.0] {
        let (k, complete) =
            dirichlet_kernel(Geometry::HalfLine { boundary: 0.0 }, 1.3, 0.0, Time::Imag(tau), 1)
                .unwrap();
        assert!(complete);
        assert!(k.norm() < 1e-12, "kernel on the wall: {}", k.norm());
    }
    // Outside the domain is a domain error, not a zero.
    assert!(dirichlet_kernel(
        Geometry::HalfLine { boundary: 0.0 },
        -0.5,
        1.0,
        Time::Imag(0.1),
        1
    )
    .is_err());
}

#[test]
fn box_kernel_matches_the_eigenfunction_expansion() {
    // Spectral oracle: sum_n (2/L) sin(n pi xa/L) sin(n pi xb/L)
    // e^{-n^2 pi^2 tau/(2 L^2)}, truncated far past convergence.
    let l = 1.0f64;
    let spectral = |xa: f64, xb: f64, tau: f64| -> f64 {
        let mut s = 0.0;
        for n in 1..=200 {
            let nf = n as f64;
            let e = nf * nf * std::f64::consts::PI.powi(2) * tau / (2.0 * l * l);
            if e > 700.0 {
                break;
            }
            s += 2.0 / l
                * (nf * std::f64::consts::PI * xa / l).sin()
                * (nf * std::f64::consts::PI * xb / l).sin()
                * (-e).exp();
        }
        s
    };
    let grid = [0.12, 0.3, 0.5, 0.71, 0.9];
    for tau in [0.02, 0.05, 0.2] {
        for &xa in &grid {
            for &xb in &grid {
                let (got, complete) =
                    dirichlet_kernel(Geometry::Box { length: l }, xa, xb, Time::Imag(tau), 64)
                        .unwrap();
                assert!(complete, "image sum flagged incomplete at tau = {tau}");
                let want = spectral(xa, xb, tau);
                assert!(
                    (got - c(want, 0.0)).norm() < 1e-8,
                    "tau = {tau}, xa = {xa}, xb = {xb}: {} vs {want}",
                    got.re
                );
            }
        }
    }
}

#[test]
fn box_kernel_vanishes_on_both_walls_and_recovers_free_space() {
    let (at_zero, _) =
        dirichlet_kernel(Geometry::Box { length: 2.0 }, 0.0, 0.7, Time::Imag(0.1), 64).unwrap();
    let (at_l, _) =
        dirichlet_kernel(Geometry::Box { length: 2.0 }, 1.1, 2.0, Time::Imag(0.1), 64).unwrap();
    assert!(at_zero.norm() < 1e-12 && at_l.norm() < 1e-12);

    // Wide box, points near the middle: every image is exponentially dead
    // and only the direct term survives.
    let (boxed, complete) =
        dirichlet_kernel(Geometry::Box { length: 60.0 }, 29.7, 30.4, Time::Imag(0.3), 16).unwrap();
    assert!(complete);
    let free = free_kernel(29.7, 30.4, Time::Imag(0.3)).unwrap();
    assert!((boxed - free).norm() < 1e-12);
}

// ---------------------------------------------------------------------------
// Step scattering
// ---------------------------------------------------------------------------

#[test]
fn step_coefficient_closed_forms() {
    let flat = step_coeffs(1.7, 0.0).unwrap();
    assert!((flat.r - c(0.0, 0.0)).norm() < 1e-15);
    assert!((flat.t - c(1.0, 0.0)).norm() < 1e-15);

    // E = 2, V0 = 1.5: k0 = 2, k1 = 1, so r = 1/3 and t = 2 sqrt(2)/3.
    let s = step_coeffs(2.0, 1.5).unwrap();
    assert!((s.r - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    assert!((s.t - c(2.0 * 2.0f64.sqrt() / 3.0, 0.0)).norm() < 1e-15);
    assert!((s.k_left - c(2.0, 0.0)).norm() < 1e-15);
    assert!((s.k_right - c(1.0, 0.0)).norm() < 1e-15);

    assert!(step_coeffs(1.0, 1.0).is_err()); // degenerate edge
    assert!(step_coeffs(-0.5, 0.0).is_err());
}

#[test]
fn step_flux_is_conserved_when_both_sides_propagate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v0: f64 = rng.gen_range(-3.0..3.0);
        let e = v0.max(0.0) + rng.gen_range(0.05..4.0);
        let s = step_coeffs(e, v0).unwrap();
        let flux = s.r.norm_sqr() + s.t.norm_sqr();
        assert!((flux - 1.0).abs() < 1e-12, "E = {e}, V0 = {v0}: flux {flux}");
    }
}

#[test]
fn evanescent_step_reflects_everything() {
    // E < V0: |r| = 1, transmitted wave decays, no flux beyond the step.
    let s = step_coeffs(1.0, 4.0).unwrap();
    assert!((s.r.norm() - 1.0).abs() < 1e-13);
    assert!(s.k_right.re.abs() < 1e-15 && s.k_right.im > 0.0);
}

// ---------------------------------------------------------------------------
// Transfer-matrix Green function
// ---------------------------------------------------------------------------

#[test]
fn free_green_function_closed_form() {
    let flat = PiecewisePotential::free(0.0);
    let g = transfer_matrix_green(&flat, 2.0, 0.0, 0.0).unwrap();
    assert!((g.value - c(0.0, -0.5)).norm() < 1e-15);

    // e^{ik|x-x'|}/(ik) along a displacement grid.
    let k = 2.0f64;
    for (xa, xb) in [(0.0, 1.0), (-2.3, 0.4), (1.0, -1.0)] {
        let g = transfer_matrix_green(&flat, 2.0, xa, xb).unwrap();
        let d = (xb - xa).abs();
        let want = c((k * d).cos(), (k * d).sin()) / c(0.0, k);
        assert!((g.value - want).norm() < 1e-13, "free G at ({xa}, {xb})");
    }
}

#[test]
fn scattering_extraction_agrees_with_the_step_formulas() {
    let step = PiecewisePotential::new(vec![0.0], vec![0.0, 1.5]).unwrap();
    let from_matrix = transfer_scattering(&step, 2.0).unwrap();
    let closed = step_coeffs(2.0, 1.5).unwrap();
    assert!((from_matrix.r - closed.r).norm() < 1e-12);
    assert!((from_matrix.t - closed.t).norm() < 1e-12);
}

#[test]
fn barrier_transmission_matches_the_textbook_closed_form() {
    // Rectangular barrier of height V on [0, a], equal outer levels:
    // above the barrier |t|^2 = 1/(1 + V^2 sin^2(k2 a)/(4E(E-V))),
    // below it the sine turns into a sinh.
    let v = 1.1f64;
    let a = 1.7f64;
    let barrier = PiecewisePotential::new(vec![0.0, a], vec![0.0, v, 0.0]).unwrap();

    let e_above = 2.3f64;
    let k2 = (2.0 * (e_above - v)).sqrt();
    let want_above = 1.0
        / (1.0 + v * v * (k2 * a).sin().powi(2) / (4.0 * e_above * (e_above - v)));
    let got_above = transfer_scattering(&barrier, e_above).unwrap().t.norm_sqr();
    assert!(
        (got_above - want_above).abs() < 1e-12,
        "above-barrier |t|^2: {got_above} vs {want_above}"
    );

    let e_below = 0.6f64;
    let kappa = (2.0 * (v - e_below)).sqrt();
    let want_below = 1.0
        / (1.0 + v * v * (kappa * a).sinh().powi(2) / (4.0 * e_below * (v - e_below)));
    let got_below = transfer_scattering(&barrier, e_below).unwrap().t.norm_sqr();
    assert!(
        (got_below - want_below).abs() < 1e-12,
        "tunnelling |t|^2: {got_below} vs {want_below}"
    );
}

#[test]
fn green_function_is_reciprocal() {
    let pot =
        PiecewisePotential::new(vec![-0.8, 0.9], vec![0.0, 1.1, 0.3]).unwrap();
    for (xa, xb) in [(-1.5, 1.4), (-0.2, 0.5), (1.0, -2.0)] {
        let ab = transfer_matrix_green(&pot, 2.3, xa, xb).unwrap();
        let ba = transfer_matrix_green(&pot, 2.3, xb, xa).unwrap();
        assert!((ab.value - ba.value).norm() < 1e-10);
    }
}

#[test]
fn bound_state_energy_makes_the_matching_singular() {
    // Well of depth 5 on [-1, 1]; locate its ground state via the bounce
    // pole condition, then the interface matching at that exact energy
    // must either refuse (singular) or blow up as 1/(E - E_b).
    let well = PiecewisePotential::new(vec![-1.0, 1.0], vec![5.0, 0.0, 5.0]).unwrap();
    let states = bounce_spectrum(2.0, Some(5.0), (0.0, 5.0), 1e-13).unwrap();
    assert!(!states.is_empty());
    let e_bound = states[0]; // energy measured from the well floor
    match transfer_matrix_green(&well, e_bound, -0.3, 0.4) {
        Err(Error::Singular { .. }) => {}
        Ok(g) => assert!(
            g.value.norm() > 1e5,
            "Green function finite ({}) at a bound state",
            g.value.norm()
        ),
        Err(other) => panic!("unexpected error at the bound state: {other}"),
    }
}

// ---------------------------------------------------------------------------
// Interface recursion vs the oracle
// ---------------------------------------------------------------------------

#[test]
fn single_interface_recursion_is_exact_at_depth_one() {
    let step = PiecewisePotential::new(vec![0.0], vec![0.0, 1.5]).unwrap();
    let oracle = transfer_matrix_green(&step, 2.0, -1.0, 1.5).unwrap();
    let (rec, converged) = path_decomposition_green(&step, 2.0, -1.0, 1.5, 1).unwrap();
    assert!(converged);
    assert!(
        (rec.value - oracle.value).norm() < 1e-10 * oracle.value.norm(),
        "single interface should close at one bounce"
    );
}

#[test]
fn same_region_depth_zero_is_the_restricted_green_function() {
    // With no interface events retained, endpoints sharing a region see
    // only the Dirichlet-restricted term; on a free line that is already
    // the full Green function.
    let flat = PiecewisePotential::free(0.3);
    let (rec, converged) = path_decomposition_green(&flat, 2.0, -0.4, 0.9, 0).unwrap();
    assert!(converged);
    let oracle = transfer_matrix_green(&flat, 2.0, -0.4, 0.9).unwrap();
    assert!((rec.value - oracle.value).norm() < 1e-14);
}

#[test]
fn two_interface_error_decays_geometrically_in_depth() {
    let pot =
        PiecewisePotential::new(vec![-0.8, 0.9], vec![0.0, 1.1, 0.3]).unwrap();
    let (e, xa, xb) = (2.3, -1.5, 1.4);
    let oracle = transfer_matrix_green(&pot, e, xa, xb).unwrap().value;
    let mut errs = Vec::new();
    for depth in [2u32, 6, 12, 24] {
        let (rec, _) = path_decomposition_green(&pot, e, xa, xb, depth).unwrap();
        errs.push((rec.value - oracle).norm() / oracle.norm());
    }
    assert!(errs[1] < errs[0] * 1e-2, "errors {errs:?}");
    assert!(errs[2] < errs[1] * 1e-2, "errors {errs:?}");
    assert!(errs[3] < 1e-12, "depth-24 error {}", errs[3]);
}

#[test]
fn interior_endpoint_recursion_matches_the_oracle() {
    let pot =
        PiecewisePotential::new(vec![-0.8, 0.9], vec![0.0, 1.1, 0.3]).unwrap();
    let oracle = transfer_matrix_green(&pot, 2.3, -0.2, 0.5).unwrap();
    let (rec, converged) = path_decomposition_green(&pot, 2.3, -0.2, 0.5, 40).unwrap();
    assert!(converged);
    assert!((rec.value - oracle.value).norm() < 1e-10 * oracle.value.norm());
}

#[test]
fn randomized_potentials_converge_to_the_oracle() {
    // A dozen randomized 2- and 3-region instances here; the acceptance
    // sweep runs the full fifty.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..12 {
        let three = case % 2 == 0;
        let b0: f64 = rng.gen_range(-1.0..0.0);
        let (bps, vals) = if three {
            let b1: f64 = b0 + rng.gen_range(0.4..1.6);
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            (vec![b0, b1], v)
        } else {
            (vec![b0], (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
        };
        let vmax = vals.iter().cloned().fold(f64::MIN, f64::max);
        let e = vmax + rng.gen_range(0.5..3.0);
        let pot = PiecewisePotential::new(bps.clone(), vals.clone()).unwrap();
        let xa = bps[0] - rng.gen_range(0.1..1.0);
        let xb = bps[bps.len() - 1] + rng.gen_range(0.1..1.0);

        let oracle = transfer_matrix_green(&pot, e, xa, xb).unwrap().value;
        let (rec, _) = path_decomposition_green(&pot, e, xa, xb, 40).unwrap();
        let rel = (rec.value - oracle).norm() / oracle.norm();
        assert!(
            rel < 1e-6,
            "case {case}: rel {rel} with potential {vals:?} at E = {e}"
        );
    }
}

#[test]
fn recursion_is_reciprocal_too() {
    let pot = PiecewisePotential::new(vec![0.2], vec![-0.5, 0.8]).unwrap();
    let (ab, _) = path_decomposition_green(&pot, 1.9, -0.7, 1.1, 30).unwrap();
    let (ba, _) = path_decomposition_green(&pot, 1.9, 1.1, -0.7, 30).unwrap();
    assert!((ab.value - ba.value).norm() < 1e-10);
}

// ---------------------------------------------------------------------------
// Bounce spectra
// ---------------------------------------------------------------------------

#[test]
fn infinite_well_levels_are_exact() {
    let l = std::f64::consts::PI;
    let levels = bounce_spectrum(l, None, (0.0, 51.0), 1e-12).unwrap();
    assert!(levels.len() >= 10);
    for (n, e) in levels.iter().take(10).enumerate() {
        let nf = (n + 1) as f64;
        let want = nf * nf * std::f64::consts::PI.powi(2) / (2.0 * l * l);
        assert!(
            (e - want).abs() < 1e-8,
            "level {}: {e} vs {want}",
            n + 1
        );
    }
}

#[test]
fn infinite_well_levels_scale_inversely_with_width_squared() {
    let narrow = bounce_spectrum(1.0, None, (0.0, 60.0), 1e-12).unwrap();
    let wide = bounce_spectrum(2.0, None, (0.0, 15.0), 1e-12).unwrap();
    for (a, b) in narrow.iter().zip(wide.iter()) {
        assert!((a / b - 4.0).abs() < 1e-7, "width scaling broke: {a} vs {b}");
    }
}

/// Independent finite-well oracle: bisection on the even and odd matching
/// conditions z tan z = sqrt(z0^2 - z^2) and -z cot z = sqrt(z0^2 - z^2),
/// z = kL/2, z0 = (L/2) sqrt(2 V).
fn finite_well_oracle(l: f64, v: f64) -> Vec<f64> {
    let z0 = l / 2.0 * (2.0 * v).sqrt();
    let even = |z: f64| z * z.tan() - (z0 * z0 - z * z).sqrt();
    let odd = |z: f64| -z / z.tan() - (z0 * z0 - z * z).sqrt();
    let mut roots = Vec::new();
    for branch in 0..((2.0 * z0 / std::f64::consts::PI).ceil() as usize) {
        let (f, lo, hi): (&dyn Fn(f64) -> f64, f64, f64) = if branch % 2 == 0 {
            let lo = branch as f64 / 2.0 * std::f64::consts::PI;
            (&even, lo + 1e-12, (lo + std::f64::consts::FRAC_PI_2 - 1e-12).min(z0 - 1e-12))
        } else {
            let lo = (branch as f64 + 1.0) / 2.0 * std::f64::consts::PI;
            (&odd, lo - std::f64::consts::FRAC_PI_2 + 1e-12, (lo - 1e-12).min(z0 - 1e-12))
        };
        if lo >= hi {
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        if f(a) * f(b) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let z = 0.5 * (a + b);
        roots.push(2.0 * z * z / (l * l)); // E = k^2/2 with k = 2z/L
    }
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
    roots
}

#[test]
fn finite_well_levels_match_the_transcendental_oracle() {
    for (l, v) in [(2.0f64, 8.0f64), (1.0, 30.0), (3.0, 2.5)] {
        let got = bounce_spectrum(l, Some(v), (0.0, v), 1e-12).unwrap();
        let want = finite_well_oracle(l, v);
        assert_eq!(got.len(), want.len(), "state count at L = {l}, V = {v}");
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-8, "L = {l}, V = {v}: {g} vs {w}");
        }
    }
}

#[test]
fn empty_range_returns_no_roots() {
    let none = bounce_spectrum(1.0, None, (20.0, 21.0), 1e-10).unwrap();
    // E_2 = 2 pi^2 ~ 19.74 and E_3 = 4.5 pi^2 ~ 44.4: nothing in between.
    assert!(none.is_empty());
    assert!(bounce_spectrum(-1.0, None, (0.0, 5.0), 1e-10).is_err());
    assert!(bounce_spectrum(1.0, None, (0.0, 5.0), -1.0).is_err());
}

// ---------------------------------------------------------------------------
// Potential parsing
// ---------------------------------------------------------------------------

#[test]
fn potential_file_format_round_trips() {
    let text = "breakpoints: -0.8 0.9\nvalues: 0 1.1 0.3\n";
    let pot = PiecewisePotential::parse_str(text).unwrap();
    assert_eq!(pot.breakpoints(), &[-0.8, 0.9]);
    assert_eq!(pot.values(), &[0.0, 1.1, 0.3]);
    assert_eq!(pot.region_count(), 3);
    assert_eq!(pot.region_of(-2.0), 0);
    assert_eq!(pot.region_of(0.0), 1);
    assert_eq!(pot.region_of(0.9), 2); // breakpoint belongs to the right
    assert_eq!(pot.region_of(5.0), 2);
}

#[test]
fn potential_parse_rejects_malformed_input() {
    assert!(PiecewisePotential::parse_str("values: 0 1\n").is_err());
    assert!(PiecewisePotential::parse_str("breakpoints: 0\n").is_err());
    assert!(PiecewisePotential::parse_str("breakpoints: 0\nvalues: 1 abc\n").is_err());
    assert!(PiecewisePotential::parse_str("breakpoints: 1 0\nvalues: 0 1 2\n").is_err());
    assert!(PiecewisePotential::parse_str("breakpoints: 0\nvalues: 1 2 3\n").is_err());
    assert!(
        PiecewisePotential::parse_str("breakpoints: 0\nvalues: 1 2\nextra: 3\n").is_err()
    );
    assert!(PiecewisePotential::new(vec![0.0, 0.0], vec![1.0, 2.0, 3.0]).is_err());
    assert!(PiecewisePotential::new(vec![f64::NAN], vec![1.0, 2.0]).is_err());
}
