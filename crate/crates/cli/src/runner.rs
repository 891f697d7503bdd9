//! Maps a resolved [`ExperimentConfig`] onto the library operations and
//! collects the report rows. Grid points run on a worker pool but rows are
//! always emitted in input order, so a report is byte-identical for any
//! thread count.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use congamma_core::counting::{
    integer_count, mobius_inverted_pi, pi1_bar, pi2i_bar, ScalingChoice,
};
use congamma_core::goldbach::{
    cramer_gap, straddle_expectation, straddle_expectation_with_sum, StraddleMode, StraddleReport,
};
use congamma_core::propagator::{
    bounce_spectrum, path_decomposition_green, step_coeffs, transfer_matrix_green,
    PiecewisePotential,
};
use congamma_core::sieve::{
    big_pi_exact, c2i_square_sum_resumable, pi_exact, primes_up_to, straddle_count_exact,
};
use congamma_core::{BigReal, Error, PrecisionPolicy, Result};

use crate::cache::{resolve_cache_path, C2iCache};
use crate::config::{CommandKind, ExperimentConfig};
use crate::grid::parse_grid;
use crate::report::{fmt_f64, Report};

pub fn execute(cfg: &ExperimentConfig, out: &mut dyn std::io::Write) -> Result<()> {
    let policy = PrecisionPolicy::new(cfg.digits, cfg.max_terms, cfg.tail_tol)?;
    let report = match cfg.command {
        CommandKind::Identity => run_identity(cfg, &policy)?,
        CommandKind::Primes => run_primes(cfg, &policy)?,
        CommandKind::Doubles => run_doubles(cfg, &policy)?,
        CommandKind::Goldbach => run_goldbach(cfg, &policy)?,
        CommandKind::Cramer => run_cramer(cfg, &policy)?,
        CommandKind::Sieve => run_sieve(cfg)?,
        CommandKind::PropStep => run_prop_step(cfg)?,
        CommandKind::PropGreen => run_prop_green(cfg)?,
        CommandKind::PropSpectrum => run_prop_spectrum(cfg)?,
    };
    report.emit(cfg.format, out)
}

fn grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    match &cfg.x {
        Some(spec) => parse_grid(spec),
        None => Err(Error::domain("x", "this command needs --x")),
    }
}

fn as_u64(x: f64, param: &'static str) -> Result<u64> {
    let r = x.round();
    if !(x.is_finite() && r >= 0.0 && r <= u64::MAX as f64 && (x - r).abs() < 1e-6) {
        return Err(Error::domain(
            param,
            format!("{x} is not a nonnegative integer"),
        ));
    }
    Ok(r as u64)
}

fn require(v: Option<f64>, param: &'static str) -> Result<f64> {
    v.ok_or_else(|| Error::domain(param, format!("this command needs --{param}")))
}

fn check_compare(cfg: &ExperimentConfig) -> Result<bool> {
    match cfg.compare.as_deref() {
        None => Ok(false),
        Some("sieve") => Ok(true),
        Some(other) => Err(Error::domain(
            "compare",
            format!("unknown comparison {other:?}; only `sieve` is available"),
        )),
    }
}

/// Run `f` over the items on `threads` workers (0 = available parallelism),
/// returning results in item order. On failure the error of the earliest
/// item wins, so diagnostics do not depend on scheduling.
fn ordered_rows<T: Sync>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> Result<Vec<String>> + Sync,
) -> Result<Vec<Vec<String>>> {
    let n = if threads == 0 {
        std::thread::available_parallelism()
            .map(|v| v.get())
            .unwrap_or(1)
    } else {
        threads
    }
    .min(items.len())
    .max(1);
    if n == 1 {
        return items.iter().map(&f).collect();
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..n {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                if tx.send((k, f(&items[k]))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut slots: Vec<Option<Result<Vec<String>>>> = (0..items.len()).map(|_| None).collect();
    for (k, r) in rx {
        slots[k] = Some(r);
    }
    slots
        .into_iter()
        .map(|s| s.expect("every index dispatched"))
        .collect()
}

fn run_identity(cfg: &ExperimentConfig, policy: &PrecisionPolicy) -> Result<Report> {
    let xs = grid(cfg)?;
    let mut report = Report::new(&["x", "count", "abs_err", "terms", "tail_bound", "digits"]);
    for row in ordered_rows(&xs, cfg.threads, |&x| {
        let r = integer_count(x, policy)?;
        let err = r.value.sub(&BigReal::from_f64(x, r.precision_used)).abs();
        Ok(vec![
            fmt_f64(x),
            r.value.to_decimal_string(),
            err.to_decimal_string(),
            r.terms_used.to_string(),
            r.tail_bound.to_decimal_string(),
            r.precision_used.to_string(),
        ])
    })? {
        report.push(row);
    }
    Ok(report)
}

fn run_primes(cfg: &ExperimentConfig, policy: &PrecisionPolicy) -> Result<Report> {
    let xs = grid(cfg)?;
    let compare = check_compare(cfg)?;
    let mobius = match cfg.mode.as_deref() {
        None | Some("series") => false,
        Some("mobius") => true,
        Some(other) => {
            return Err(Error::domain(
                "mode",
                format!("unknown primes mode {other:?}; use series or mobius"),
            ));
        }
    };
    let table = if compare {
        let xmax = xs.iter().cloned().fold(0.0, f64::max);
        Some(primes_up_to(as_u64(xmax.ceil(), "x")?.max(3))?)
    } else {
        None
    };

    let columns: &'static [&'static str] = match (mobius, compare) {
        (false, false) => &["x", "pi1_bar", "terms", "tail_bound", "digits"],
        (false, true) => &["x", "pi1_bar", "Pi_exact", "rel_err", "terms", "digits"],
        (true, false) => &["x", "mobius_pi", "terms", "tail_bound", "digits"],
        (true, true) => &["x", "mobius_pi", "pi_exact", "rel_err", "terms", "digits"],
    };
    let mut report = Report::new(columns);
    let table = table.as_ref();
    for row in ordered_rows(&xs, cfg.threads, |&x| {
        let r = if mobius {
            mobius_inverted_pi(x, policy)?
        } else {
            pi1_bar(x, policy, &ScalingChoice::NegLog)?
        };
        let mut row = vec![fmt_f64(x), r.value.to_decimal_string()];
        if let Some(table) = table {
            let exact = if mobius {
                BigReal::from_u64(pi_exact(x, table)?, r.precision_used)
            } else {
                big_pi_exact(x, table)?
            };
            let rel = if exact.is_zero() {
                "inf".to_string()
            } else {
                r.value.sub(&exact).abs().div(&exact).to_decimal_string()
            };
            row.push(exact.to_decimal_string());
            row.push(rel);
            row.push(r.terms_used.to_string());
        } else {
            row.push(r.terms_used.to_string());
            row.push(r.tail_bound.to_decimal_string());
        }
        row.push(r.precision_used.to_string());
        Ok(row)
    })? {
        report.push(row);
    }
    Ok(report)
}

fn run_doubles(cfg: &ExperimentConfig, policy: &PrecisionPolicy) -> Result<Report> {
    let xs = grid(cfg)?;
    let i = cfg.i;
    let mut report = Report::new(&[
        "x",
        "i",
        "pi2i_bar",
        "terms",
        "tail_bound",
        "digits",
        "warning",
    ]);
    for row in ordered_rows(&xs, cfg.threads, |&x| {
        let r = pi2i_bar(x, i, policy)?;
        Ok(vec![
            fmt_f64(x),
            i.to_string(),
            r.value.to_decimal_string(),
            r.terms_used.to_string(),
            r.tail_bound.to_decimal_string(),
            r.precision_used.to_string(),
            r.validity_warning.to_string(),
        ])
    })? {
        report.push(row);
    }
    Ok(report)
}

fn parse_straddle_mode(cfg: &ExperimentConfig) -> Result<StraddleMode> {
    match cfg.mode.as_deref().unwrap_or("factored") {
        "direct" => Ok(StraddleMode::Direct),
        "factored" => Ok(StraddleMode::Factored),
        "paper-lower-bound" | "paper_lower_bound" => Ok(StraddleMode::PaperLowerBound),
        other => Err(Error::domain(
            "mode",
            format!("unknown goldbach mode {other:?}; use direct, factored, or paper-lower-bound"),
        )),
    }
}

fn mode_name(mode: StraddleMode) -> &'static str {
    match mode {
        StraddleMode::Direct => "direct",
        StraddleMode::Factored => "factored",
        StraddleMode::PaperLowerBound => "paper-lower-bound",
    }
}

/// Factored expectation with the i-sum checkpointed through the cache file.
/// The sweep resumes from the largest persisted checkpoint at or below the
/// needed limit and appends any new checkpoints it crosses.
fn factored_with_cache(
    x: u64,
    cfg: &ExperimentConfig,
    policy: &PrecisionPolicy,
) -> Result<StraddleReport> {
    if x < 4 {
        return Err(Error::domain("x", "straddle expectation needs x >= 4"));
    }
    let cache = C2iCache::load(resolve_cache_path(cfg.cache_path.as_deref()))?;
    cache.verify_tail()?;
    let limit = x - 3;
    let resume = cache.resume_for(limit)?;
    let mut appender = cache.appender()?;
    let mut write_err = None;
    let sum = c2i_square_sum_resumable(limit, policy, cfg.threads, resume, &mut |i, s| {
        if write_err.is_none() {
            if let Err(e) = appender.push(i, s) {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    appender.finish()?;
    straddle_expectation_with_sum(x, policy, &sum)
}

fn run_goldbach(cfg: &ExperimentConfig, policy: &PrecisionPolicy) -> Result<Report> {
    let xs: Vec<u64> = grid(cfg)?
        .into_iter()
        .map(|x| as_u64(x, "x"))
        .collect::<Result<_>>()?;
    let mode = parse_straddle_mode(cfg)?;
    let compare = check_compare(cfg)?;
    let table = if compare {
        let xmax = *xs.iter().max().expect("non-empty grid");
        Some(primes_up_to((2 * xmax).saturating_sub(3).max(3))?)
    } else {
        None
    };

    let columns: &'static [&'static str] = if compare {
        &[
            "x",
            "mode",
            "s",
            "log10_failure",
            "straddle_count",
            "s_per_straddle",
            "digits",
        ]
    } else {
        &["x", "mode", "s", "log10_failure", "digits"]
    };
    let mut report = Report::new(columns);
    // grid points run in sequence: factored mode shares one cache file and
    // each point extends the sweep the previous one persisted
    for &x in &xs {
        let rep = match mode {
            StraddleMode::Factored => factored_with_cache(x, cfg, policy)?,
            m => straddle_expectation(x, policy, m)?,
        };
        let mut row = vec![
            x.to_string(),
            mode_name(rep.mode).to_string(),
            rep.s.to_decimal_string(),
            rep.log10_failure.to_decimal_string(),
        ];
        if let Some(table) = table.as_ref() {
            let count = straddle_count_exact(x, table)?.count;
            let per = if count == 0 {
                "inf".to_string()
            } else {
                rep.s.div_u64(count).to_decimal_string()
            };
            row.push(count.to_string());
            row.push(per);
        }
        row.push(policy.digits.to_string());
        report.push(row);
    }
    Ok(report)
}

fn run_cramer(cfg: &ExperimentConfig, policy: &PrecisionPolicy) -> Result<Report> {
    let ps: Vec<u64> = grid(cfg)?
        .into_iter()
        .map(|x| as_u64(x, "x"))
        .collect::<Result<_>>()?;
    let mut report = Report::new(&["p", "gap", "gap_log2_ratio", "digits"]);
    for row in ordered_rows(&ps, cfg.threads, |&p| {
        let gap = cramer_gap(p, policy)?;
        let lnp = BigReal::from_u64(p, policy.digits).ln();
        let ratio = gap.div(&lnp.mul(&lnp));
        Ok(vec![
            p.to_string(),
            gap.to_decimal_string(),
            ratio.to_decimal_string(),
            policy.digits.to_string(),
        ])
    })? {
        report.push(row);
    }
    Ok(report)
}

fn run_sieve(cfg: &ExperimentConfig) -> Result<Report> {
    let xs = grid(cfg)?;
    let xmax = xs.iter().cloned().fold(0.0, f64::max);
    let table = primes_up_to(as_u64(xmax.ceil(), "x")?.max(3))?;
    let mut report = Report::new(&["x", "pi", "big_pi"]);
    for &x in &xs {
        report.push(vec![
            fmt_f64(x),
            pi_exact(x, &table)?.to_string(),
            format!("{}", congamma_core::sieve::big_pi_rational(x, &table)?),
        ]);
    }
    Ok(report)
}

fn run_prop_step(cfg: &ExperimentConfig) -> Result<Report> {
    let e = require(cfg.energy, "energy")?;
    let v0 = require(cfg.v0, "v0")?;
    let c = step_coeffs(e, v0)?;
    // t is flux-normalized, so an open right channel adds |t|^2 directly;
    // below the step all flux reflects
    let flux = if c.k_right.im.abs() < 1e-14 {
        c.r.norm_sqr() + c.t.norm_sqr()
    } else {
        c.r.norm_sqr()
    };
    let mut report = Report::new(&[
        "energy", "v0", "re_r", "im_r", "re_t", "im_t", "flux_dev",
    ]);
    report.push(vec![
        fmt_f64(e),
        fmt_f64(v0),
        fmt_f64(c.r.re),
        fmt_f64(c.r.im),
        fmt_f64(c.t.re),
        fmt_f64(c.t.im),
        fmt_f64((flux - 1.0).abs()),
    ]);
    Ok(report)
}

fn load_potential(spec: &str) -> Result<PiecewisePotential> {
    match spec.strip_prefix('@') {
        Some(path) => PiecewisePotential::from_file(Path::new(path)),
        None => PiecewisePotential::parse_str(&spec.replace(';', "\n")),
    }
}

fn run_prop_green(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg
        .potential
        .as_deref()
        .ok_or_else(|| Error::domain("potential", "this command needs --potential"))?;
    let potential = load_potential(spec)?;
    let e = require(cfg.energy, "energy")?;
    let xa = require(cfg.xa, "xa")?;
    let xb = require(cfg.xb, "xb")?;
    let (eval, converged, method) = match cfg.mode.as_deref().unwrap_or("oracle") {
        "oracle" => (transfer_matrix_green(&potential, e, xa, xb)?, true, "oracle"),
        "recursion" => {
            let (eval, converged) = path_decomposition_green(&potential, e, xa, xb, cfg.depth)?;
            (eval, converged, "recursion")
        }
        other => {
            return Err(Error::domain(
                "mode",
                format!("unknown green mode {other:?}; use oracle or recursion"),
            ));
        }
    };
    let mut report = Report::new(&[
        "energy",
        "xa",
        "xb",
        "method",
        "depth",
        "re_g",
        "im_g",
        "converged",
    ]);
    report.push(vec![
        fmt_f64(e),
        fmt_f64(xa),
        fmt_f64(xb),
        method.to_string(),
        if method == "oracle" {
            "0".to_string()
        } else {
            cfg.depth.to_string()
        },
        fmt_f64(eval.value.re),
        fmt_f64(eval.value.im),
        converged.to_string(),
    ]);
    Ok(report)
}

fn run_prop_spectrum(cfg: &ExperimentConfig) -> Result<Report> {
    let length = require(cfg.length, "length")?;
    let e_max = cfg.e_max.or(cfg.v0).ok_or_else(|| {
        Error::domain("e_max", "this command needs --e-max (or --v0 to bound the scan)")
    })?;
    let e_min = cfg.e_min.unwrap_or(0.0);
    let levels = bounce_spectrum(length, cfg.v0, (e_min, e_max), cfg.spec_tol)?;
    let v0_text = cfg.v0.map_or_else(|| "inf".to_string(), fmt_f64);
    let mut report = Report::new(&["length", "v0", "n", "energy"]);
    for (idx, e) in levels.iter().enumerate() {
        report.push(vec![
            fmt_f64(length),
            v0_text.clone(),
            (idx + 1).to_string(),
            fmt_f64(*e),
        ]);
    }
    Ok(report)
}
