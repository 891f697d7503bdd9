//! Evaluation grid parsing: a single value, a comma list, or a
//! `start:stop:scale[:n]` range. `log10` expands to the powers of ten inside
//! the range; `log:n` and `lin:n` give n log- or linearly spaced points.

use congamma_core::{Error, Result};

fn parse_value(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|e| Error::parse("x", format!("bad number {tok:?}: {e}")))?;
    if !v.is_finite() {
        return Err(Error::parse("x", format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

fn parse_count(tok: &str) -> Result<usize> {
    let n: usize = tok
        .parse()
        .map_err(|e| Error::parse("x", format!("bad point count {tok:?}: {e}")))?;
    if n < 2 {
        return Err(Error::parse("x", "ranges need at least 2 points".to_string()));
    }
    Ok(n)
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::parse("x", "empty grid spec".to_string()));
    }
    if spec.contains(',') {
        return spec.split(',').map(parse_value).collect();
    }
    if !spec.contains(':') {
        return Ok(vec![parse_value(spec)?]);
    }

    let parts: Vec<&str> = spec.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(Error::parse(
            "x",
            format!("range spec {spec:?} must be start:stop:scale[:n]"),
        ));
    }
    let start = parse_value(parts[0])?;
    let stop = parse_value(parts[1])?;
    if stop < start {
        return Err(Error::parse("x", format!("range {spec:?} has stop < start")));
    }
    let scale = if parts.len() == 4 {
        format!("{}:{}", parts[2], parts[3])
    } else {
        parts[2].to_string()
    };

    match scale.as_str() {
        "log10" => {
            if start <= 0.0 {
                return Err(Error::parse("x", "log10 ranges need start > 0".to_string()));
            }
            let k0 = (start.log10() - 1e-9).ceil() as i32;
            let k1 = (stop.log10() + 1e-9).floor() as i32;
            if k1 < k0 {
                return Err(Error::parse(
                    "x",
                    format!("range {spec:?} contains no power of ten"),
                ));
            }
            Ok((k0..=k1).map(|k| 10f64.powi(k)).collect())
        }
        s if s.starts_with("log:") => {
            if start <= 0.0 {
                return Err(Error::parse("x", "log ranges need start > 0".to_string()));
            }
            let n = parse_count(&s[4..])?;
            let (l0, l1) = (start.log10(), stop.log10());
            Ok((0..n)
                .map(|j| 10f64.powf(l0 + (l1 - l0) * j as f64 / (n - 1) as f64))
                .collect())
        }
        s if s.starts_with("lin:") => {
            let n = parse_count(&s[4..])?;
            Ok((0..n)
                .map(|j| start + (stop - start) * j as f64 / (n - 1) as f64)
                .collect())
        }
        other => Err(Error::parse(
            "x",
            format!("unknown grid scale {other:?}; use log10, log:n, or lin:n"),
        )),
    }
}
