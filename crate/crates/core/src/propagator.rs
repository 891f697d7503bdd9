//! One-dimensional fixed-energy and fixed-time propagators with hbar = m = 1:
//! free and image-sum kernels, step scattering, an exact transfer-matrix
//! Green's function, a boundary-decomposition recursion for piecewise
//! constant potentials, and bounce-pole spectra.
//!
//! Kernel normalization is the standard (2 pi i T)^{-1/2} exp(i dx^2 / (2T));
//! fixed-energy Green's functions solve (E + d^2/(2 dx^2) - V) G = delta,
//! so the free case is G(x, x') = e^{i k |x - x'|} / (i k) with k = sqrt(2E).

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Propagation time: real (oscillatory) or imaginary (diffusive, T = -i tau).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Time {
    Real(f64),
    Imag(f64),
}

impl Time {
    fn to_complex(self) -> Complex64 {
        match self {
            Time::Real(t) => Complex64::new(t, 0.0),
            Time::Imag(tau) => Complex64::new(0.0, -tau),
        }
    }
}

/// Geometry for image-sum Dirichlet kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    /// Domain x >= boundary, absorbing wall at the boundary.
    HalfLine { boundary: f64 },
    /// Domain [0, length] with walls at both ends.
    Box { length: f64 },
}

/// Free kernel (2 pi i T)^{-1/2} exp(i (x_b - x_a)^2 / (2 T)).
pub fn free_kernel(x_a: f64, x_b: f64, t: Time) -> Result<Complex64> {
    let tc = t.to_complex();
    if tc.norm() == 0.0 {
        return Err(Error::domain("T", "propagation time must be nonzero"));
    }
    let dx = x_b - x_a;
    let pref = (2.0 * std::f64::consts::PI * I * tc).sqrt().finv();
    Ok(pref * (I * dx * dx / (2.0 * tc)).exp())
}

/// Dirichlet kernel by the method of images. Returns the value and a flag
/// telling whether the image sum converged (the final image pair fell below
/// tolerance); real-time sums do not decay and report false.
pub fn dirichlet_kernel(
    geometry: Geometry,
    x_a: f64,
    x_b: f64,
    t: Time,
    n_images: u32,
) -> Result<(Complex64, bool)> {
    let scale = free_kernel(0.0, 0.0, t)?.norm();
    match geometry {
        Geometry::HalfLine { boundary } => {
            if x_a < boundary || x_b < boundary {
                return Err(Error::domain("x", "points must lie in x >= boundary"));
            }
            let direct = free_kernel(x_a, x_b, t)?;
            let image = free_kernel(2.0 * boundary - x_a, x_b, t)?;
            // two terms, always a complete sum
            Ok((direct - image, true))
        }
        Geometry::Box { length } => {
            if !(length > 0.0) {
                return Err(Error::domain("L", "box length must be positive"));
            }
            if !(0.0..=length).contains(&x_a) || !(0.0..=length).contains(&x_b) {
                return Err(Error::domain("x", "points must lie inside [0, L]"));
            }
            let mut sum = Complex64::new(0.0, 0.0);
            let mut last = f64::INFINITY;
            for n in -(n_images as i64)..=(n_images as i64) {
                let shift = 2.0 * n as f64 * length;
                let direct = free_kernel(0.0, x_b - x_a - shift, t)?;
                let mirrored = free_kernel(0.0, x_b + x_a - shift, t)?;
                sum += direct - mirrored;
                if n.unsigned_abs() == n_images as u64 {
                    last = last.min(direct.norm().max(mirrored.norm()));
                }
            }
            let converged = last < 1e-12 * scale.max(f64::MIN_POSITIVE);
            Ok((sum, converged))
        }
    }
}

// ---------------------------------------------------------------------------
// Step scattering
// ---------------------------------------------------------------------------

/// Flux-normalized reflection and transmission at a potential step.
#[derive(Clone, Copy, Debug)]
pub struct ScatterCoeffs {
    pub r: Complex64,
    pub t: Complex64,
    pub k_left: Complex64,
    pub k_right: Complex64,
}

/// Local wavenumber sqrt(2(E - V)), principal branch: positive real when
/// propagating, +i kappa when evanescent.
pub fn wavenumber(e: f64, v: f64) -> Complex64 {
    Complex64::new(2.0 * (e - v), 0.0).sqrt()
}

/// r = (k0 - k1)/(k0 + k1), t = 2 sqrt(k0 k1)/(k0 + k1) for a step from
/// V = 0 to V = V0 at the origin.
pub fn step_coeffs(e: f64, v0: f64) -> Result<ScatterCoeffs> {
    if !(e > 0.0) {
        return Err(Error::domain("E", "incident energy must be positive"));
    }
    if e == v0 {
        return Err(Error::domain("V0", "degenerate step: E = V0 makes k1 = 0"));
    }
    let k0 = wavenumber(e, 0.0);
    let k1 = wavenumber(e, v0);
    Ok(ScatterCoeffs {
        r: (k0 - k1) / (k0 + k1),
        t: 2.0 * (k0 * k1).sqrt() / (k0 + k1),
        k_left: k0,
        k_right: k1,
    })
}

// ---------------------------------------------------------------------------
// Piecewise potential
// ---------------------------------------------------------------------------

/// Piecewise constant potential: region j spans (b_j, b_{j+1}) with
/// b_0 = -inf and b_{n+1} = +inf, carrying energy values[j].
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewisePotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::domain(
                "values",
                format!(
                    "need exactly one more region value than breakpoints ({} vs {})",
                    values.len(),
                    breakpoints.len()
                ),
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::domain("potential", "entries must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                "breakpoints",
                "breakpoints must be strictly increasing",
            ));
        }
        Ok(PiecewisePotential {
            breakpoints,
            values,
        })
    }

    /// Constant potential with no interfaces.
    pub fn free(v: f64) -> Self {
        PiecewisePotential {
            breakpoints: Vec::new(),
            values: vec![v],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn region_count(&self) -> usize {
        self.values.len()
    }

    /// Region index containing x; a breakpoint belongs to the region on its
    /// right, keeping the lookup total.
    pub fn region_of(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    /// Parse the two-line text form:
    /// `breakpoints: b1 b2 ...` then `values: v0 v1 ...`.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bp_line = lines
            .next()
            .ok_or_else(|| Error::parse("breakpoints", "missing breakpoints line"))?;
        let val_line = lines
            .next()
            .ok_or_else(|| Error::parse("values", "missing values line"))?;
        if let Some(extra) = lines.next() {
            return Err(Error::parse(
                "potential",
                format!("unexpected extra line: {extra:?}"),
            ));
        }
        let parse_nums = |line: &str, tag: &'static str| -> Result<Vec<f64>> {
            let body = line
                .trim()
                .strip_prefix(tag)
                .and_then(|rest| rest.strip_prefix(':'))
                .ok_or_else(|| Error::parse(tag, format!("line must start with `{tag}:`")))?;
            body.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::parse(tag, format!("bad number {tok:?}: {e}")))
                })
                .collect()
        };
        PiecewisePotential::new(
            parse_nums(bp_line, "breakpoints")?,
            parse_nums(val_line, "values")?,
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }
}

// ---------------------------------------------------------------------------
// Green's functions
// ---------------------------------------------------------------------------

/// How a Green's value was produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GreenMethod {
    Oracle,
    Recursion { depth: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct GreenEval {
    pub value: Complex64,
    pub energy: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub method: GreenMethod,
}

fn region_wavenumbers(potential: &PiecewisePotential, e: f64) -> Vec<Complex64> {
    potential.values().iter().map(|&v| wavenumber(e, v)).collect()
}

/// Plane-wave coefficients (A, B) of psi = A e^{ikx} + B e^{-ikx} per region.
type Coeffs = Vec<(Complex64, Complex64)>;

/// Continuity of psi and psi' across the interface at s: solves the target
/// region's coefficients from the source region's. The matching equations
/// are symmetric, so the same solve serves sweeps in either direction.
fn match_across(
    (a_src, b_src): (Complex64, Complex64),
    k_target: Complex64,
    k_source: Complex64,
    s: f64,
) -> (Complex64, Complex64) {
    let ratio = k_source / k_target;
    let plus = (1.0 + ratio) * 0.5;
    let minus = (1.0 - ratio) * 0.5;
    let e_s = (I * k_source * s).exp();
    let a = (plus * a_src * e_s + minus * b_src / e_s) * (-I * k_target * s).exp();
    let b = (minus * a_src * e_s + plus * b_src / e_s) * (I * k_target * s).exp();
    (a, b)
}

fn psi_value(coeffs: &Coeffs, ks: &[Complex64], region: usize, x: f64) -> Complex64 {
    let (a, b) = coeffs[region];
    let k = ks[region];
    a * (I * k * x).exp() + b * (-I * k * x).exp()
}

/// Solutions outgoing to the right (e^{ik x} in the last region) and to the
/// left (e^{-ik x} in the first region), as per-region coefficients.
fn outgoing_solutions(
    potential: &PiecewisePotential,
    ks: &[Complex64],
    e: f64,
) -> Result<(Coeffs, Coeffs)> {
    let n_regions = potential.region_count();
    for k in ks {
        if k.norm() == 0.0 {
            return Err(Error::domain(
                "E",
                format!("energy {e} equals a region potential; wavenumber vanishes"),
            ));
        }
    }
    // psi_R: A=1, B=0 in the last region, swept leftward
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut right = vec![(zero, zero); n_regions];
    right[n_regions - 1] = (one, zero);
    for j in (1..n_regions).rev() {
        let s = potential.breakpoints()[j - 1];
        right[j - 1] = match_across(right[j], ks[j - 1], ks[j], s);
    }
    // psi_L: A=0, B=1 in the first region, swept rightward
    let mut left = vec![(zero, zero); n_regions];
    left[0] = (zero, one);
    for j in 1..n_regions {
        let s = potential.breakpoints()[j - 1];
        left[j] = match_across(left[j - 1], ks[j], ks[j - 1], s);
    }
    Ok((left, right))
}

/// Exact fixed-energy Green's function via interface matching:
/// G = 2 psi_L(x_<) psi_R(x_>) / W(psi_L, psi_R).
pub fn transfer_matrix_green(
    potential: &PiecewisePotential,
    e: f64,
    x_a: f64,
    x_b: f64,
) -> Result<GreenEval> {
    let ks = region_wavenumbers(potential, e);
    let (left, right) = outgoing_solutions(potential, &ks, e)?;
    // with psi_L = e^{-ik0 x} in region 0 and psi_R = A0 e^{ik0 x} + ... there,
    // the Wronskian is 2 i k0 A0 up to psi_L's region-0 B coefficient
    let w = 2.0 * I * ks[0] * right[0].0 * left[0].1;
    let scale = ks.iter().map(|k| k.norm()).fold(1.0, f64::max);
    if w.norm() < 1e-12 * scale {
        return Err(Error::Singular { energy: e });
    }
    let (lo, hi) = if x_a <= x_b { (x_a, x_b) } else { (x_b, x_a) };
    let value = 2.0
        * psi_value(&left, &ks, potential.region_of(lo), lo)
        * psi_value(&right, &ks, potential.region_of(hi), hi)
        / w;
    Ok(GreenEval {
        value,
        energy: e,
        x_a,
        x_b,
        method: GreenMethod::Oracle,
    })
}

/// Reflection and transmission amplitudes read off the asymptotic
/// coefficients of the right-outgoing solution, flux-normalized. For a
/// single interface at the origin this reproduces `step_coeffs`.
pub fn transfer_scattering(potential: &PiecewisePotential, e: f64) -> Result<ScatterCoeffs> {
    let ks = region_wavenumbers(potential, e);
    let (_, right) = outgoing_solutions(potential, &ks, e)?;
    let (a0, b0) = right[0];
    if a0.norm() == 0.0 {
        return Err(Error::Singular { energy: e });
    }
    let k0 = ks[0];
    let kn = ks[ks.len() - 1];
    Ok(ScatterCoeffs {
        r: b0 / a0,
        t: (kn / k0).sqrt() / a0,
        k_left: k0,
        k_right: kn,
    })
}

// ---------------------------------------------------------------------------
// Path decomposition
// ---------------------------------------------------------------------------

/// Interface endpoints of a region: (left breakpoint index, right breakpoint
/// index) where present.
fn region_interfaces(potential: &PiecewisePotential, region: usize) -> (Option<usize>, Option<usize>) {
    let n = potential.breakpoints().len();
    let left = if region > 0 { Some(region - 1) } else { None };
    let right = if region < n { Some(region) } else { None };
    (left, right)
}

/// Region-restricted Dirichlet Green's function for two points in the same
/// region (the delta_ij term of the split-kernel identity).
fn restricted_green(
    potential: &PiecewisePotential,
    ks: &[Complex64],
    region: usize,
    x_a: f64,
    x_b: f64,
) -> Complex64 {
    let k = ks[region];
    let (lo, hi) = if x_a <= x_b { (x_a, x_b) } else { (x_b, x_a) };
    let (lb, rb) = region_interfaces(potential, region);
    match (lb, rb) {
        (None, None) => (I * k * (hi - lo)).exp() / (I * k),
        (None, Some(r)) => {
            // mirror at the right wall
            let s = potential.breakpoints()[r];
            let direct = (I * k * (hi - lo)).exp();
            let image = (I * k * ((s - lo) + (s - hi))).exp();
            (direct - image) / (I * k)
        }
        (Some(l), None) => {
            let s = potential.breakpoints()[l];
            let direct = (I * k * (hi - lo)).exp();
            let image = (I * k * ((lo - s) + (hi - s))).exp();
            (direct - image) / (I * k)
        }
        (Some(l), Some(r)) => {
            let a = potential.breakpoints()[l];
            let b = potential.breakpoints()[r];
            let w = b - a;
            let denom = k * (k * w).sin();
            -2.0 * (k * (lo - a)).sin() * (k * (b - hi)).sin() / denom
        }
    }
}

/// Point-to-boundary kernel within a region, normalized to 1 at the exit
/// point (the 1D boundary integral is the value at the single exit).
fn boundary_kernel(
    potential: &PiecewisePotential,
    ks: &[Complex64],
    region: usize,
    x: f64,
    interface: usize,
) -> Complex64 {
    let k = ks[region];
    let sigma = potential.breakpoints()[interface];
    let (lb, rb) = region_interfaces(potential, region);
    match (lb, rb) {
        (Some(l), Some(r)) => {
            let a = potential.breakpoints()[l];
            let b = potential.breakpoints()[r];
            let w = b - a;
            if interface == r {
                (k * (x - a)).sin() / (k * w).sin()
            } else {
                (k * (b - x)).sin() / (k * w).sin()
            }
        }
        _ => (I * k * (sigma - x).abs()).exp(),
    }
}

/// A directed wave amp * e^{ik (x - origin) * dir} inside one region,
/// launched at a breakpoint.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct WaveKey {
    interface: usize,
    dir: i8, // +1 rightward, -1 leftward
}

/// Boundary-decomposition Green's function. Depth 0 keeps only the
/// region-restricted term; each further unit allows one more interface
/// event (boundary continuation or bounce scattering). The flag reports
/// whether the last retained round moved the value by less than 1e-8
/// relative (successive-depth agreement).
pub fn path_decomposition_green(
    potential: &PiecewisePotential,
    e: f64,
    x_a: f64,
    x_b: f64,
    depth: u32,
) -> Result<(GreenEval, bool)> {
    use std::collections::HashMap;

    let ks = region_wavenumbers(potential, e);
    for k in &ks {
        if k.norm() == 0.0 {
            return Err(Error::domain(
                "E",
                format!("energy {e} equals a region potential; wavenumber vanishes"),
            ));
        }
    }
    let bps = potential.breakpoints();
    let ra = potential.region_of(x_a);
    let rb = potential.region_of(x_b);

    let mut total = Complex64::new(0.0, 0.0);
    if ra == rb {
        total += restricted_green(potential, &ks, ra, x_a, x_b);
    }
    let mut previous = total;

    // Arrivals at the interfaces bounding x_a's region; converting each into
    // outward directed waves is the first depth unit.
    let (la, ra_if) = region_interfaces(potential, ra);
    let mut arrivals: Vec<(usize, Complex64)> = Vec::new();
    for iface in [la, ra_if].into_iter().flatten() {
        arrivals.push((iface, boundary_kernel(potential, &ks, ra, x_a, iface)));
    }

    let mut waves: HashMap<WaveKey, Complex64> = HashMap::new();
    let mut rounds_done = 0u32;
    if depth >= 1 && !arrivals.is_empty() {
        for (iface, amp) in arrivals {
            // interface iface separates regions iface and iface + 1; the
            // incidence side is x_a's region, the far side the other one
            let k_inc = ks[ra];
            let k_oth = if ra > iface { ks[iface] } else { ks[iface + 1] };
            let f = 2.0 / (I * (k_inc + k_oth));
            for dir in [-1i8, 1i8] {
                *waves.entry(WaveKey { interface: iface, dir }).or_insert(Complex64::new(0.0, 0.0)) +=
                    amp * f;
            }
        }
        // contributions of the newly spawned waves at x_b
        previous = total;
        for (key, amp) in &waves {
            total += wave_at(potential, &ks, key, *amp, x_b, rb);
        }
        rounds_done = 1;
    }

    // bounce rounds
    while rounds_done < depth && !waves.is_empty() {
        let mut next: HashMap<WaveKey, Complex64> = HashMap::new();
        for (key, amp) in &waves {
            let pos = bps[key.interface];
            // region the wave travels through
            let region = if key.dir > 0 { key.interface + 1 } else { key.interface };
            let k = ks[region];
            let next_iface = if key.dir > 0 {
                if region < bps.len() { Some(region) } else { None }
            } else {
                if region > 0 { Some(region - 1) } else { None }
            };
            let Some(ni) = next_iface else { continue }; // escaped to infinity
            let travel = (bps[ni] - pos).abs();
            let arrived = amp * (I * k * travel).exp();
            let k_beyond = if key.dir > 0 { ks[ni + 1] } else { ks[ni] };
            let rho = (k - k_beyond) / (k + k_beyond);
            let tau = 2.0 * k / (k + k_beyond);
            *next
                .entry(WaveKey { interface: ni, dir: -key.dir })
                .or_insert(Complex64::new(0.0, 0.0)) += arrived * rho;
            *next
                .entry(WaveKey { interface: ni, dir: key.dir })
                .or_insert(Complex64::new(0.0, 0.0)) += arrived * tau;
        }
        previous = total;
        for (key, amp) in &next {
            total += wave_at(potential, &ks, key, *amp, x_b, rb);
        }
        waves = next;
        rounds_done += 1;
    }

    let diff = (total - previous).norm();
    // complete, not merely converged: every surviving wave is outbound past
    // the last interface in its direction, so deeper rounds add nothing
    let escape_only = waves.keys().all(|key| {
        if key.dir > 0 {
            key.interface + 1 >= bps.len()
        } else {
            key.interface == 0
        }
    });
    let converged = if rounds_done == 0 {
        bps.is_empty()
    } else {
        escape_only || diff <= 1e-8 * total.norm().max(1e-300)
    };
    Ok((
        GreenEval {
            value: total,
            energy: e,
            x_a,
            x_b,
            method: GreenMethod::Recursion { depth },
        },
        converged,
    ))
}

/// Value of a directed wave at x_b when x_b lies in the wave's region on
/// the traveled side; zero otherwise.
fn wave_at(
    potential: &PiecewisePotential,
    ks: &[Complex64],
    key: &WaveKey,
    amp: Complex64,
    x_b: f64,
    region_b: usize,
) -> Complex64 {
    let pos = potential.breakpoints()[key.interface];
    let region = if key.dir > 0 { key.interface + 1 } else { key.interface };
    if region != region_b {
        return Complex64::new(0.0, 0.0);
    }
    let on_side = if key.dir > 0 { x_b >= pos } else { x_b <= pos };
    if !on_side {
        return Complex64::new(0.0, 0.0);
    }
    amp * (I * ks[region] * (x_b - pos).abs()).exp()
}

// ---------------------------------------------------------------------------
// Bounce spectrum
// ---------------------------------------------------------------------------

/// Round-trip phase 2kL - 4 atan(kappa/k) whose multiples of 2 pi are the
/// bounce-pole energies. The atan term vanishes for infinite walls (r = -1
/// contributes phase pi per wall, i.e. 2 pi per round trip).
fn round_trip_phase(e: f64, l: f64, v0: Option<f64>) -> f64 {
    let k = (2.0 * e).sqrt();
    match v0 {
        None => 2.0 * k * l,
        Some(v) => {
            let kappa = (2.0 * (v - e)).sqrt();
            2.0 * k * l - 4.0 * (kappa / k).atan()
        }
    }
}

/// Energies in `e_range` where 1 - r1 r2 e^{2ikL} = 0 for a width-L well:
/// infinite walls when `v0` is None, else walls of height v0 (bound states
/// only, E < v0). Roots are found by a phase scan plus bisection to `tol`.
pub fn bounce_spectrum(
    l: f64,
    v0: Option<f64>,
    e_range: (f64, f64),
    tol: f64,
) -> Result<Vec<f64>> {
    if !(l > 0.0) {
        return Err(Error::domain("L", "well width must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol", "tolerance must be positive"));
    }
    let (mut lo, mut hi) = e_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain("E_range", "need a finite range with lo < hi"));
    }
    lo = lo.max(1e-12);
    if let Some(v) = v0 {
        if !(v > 0.0) {
            return Err(Error::domain("V0", "well depth must be positive"));
        }
        hi = hi.min(v - 1e-12);
    }
    if hi <= lo {
        return Ok(Vec::new());
    }

    let phase = |e: f64| round_trip_phase(e, l, v0);
    let total_sweep = (phase(hi) - phase(lo)).abs();
    let steps = ((total_sweep / 0.5).ceil() as usize + 16).min(4_000_000);
    let mut roots = Vec::new();
    let mut prev_e = lo;
    let mut prev_p = phase(lo);
    for s in 1..=steps {
        let e = lo + (hi - lo) * s as f64 / steps as f64;
        let p = phase(e);
        // target multiples of 2 pi crossed in (prev_p, p]
        let two_pi = 2.0 * std::f64::consts::PI;
        let n_lo = (prev_p / two_pi).floor() as i64;
        let n_hi = (p / two_pi).floor() as i64;
        for n in (n_lo.min(n_hi) + 1)..=n_lo.max(n_hi) {
            let target = n as f64 * two_pi;
            // for infinite walls the phase starts at 0, so the n = 0 crossing
            // is the k -> 0 edge rather than a state; finite wells start at
            // -2 pi and cross 0 at a genuine ground state
            let skip = if v0.is_none() { target <= 0.0 } else { target < 0.0 };
            if skip {
                continue;
            }
            let (mut a, mut b) = (prev_e, e);
            let (mut pa, _pb) = (prev_p, p);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let pm = phase(mid);
                if (pa - target).signum() == (pm - target).signum() {
                    a = mid;
                    pa = pm;
                } else {
                    b = mid;
                }
                if (b - a) < tol {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_e = e;
        prev_p = p;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < tol.max(1e-12) * 4.0);
    Ok(roots)
}
