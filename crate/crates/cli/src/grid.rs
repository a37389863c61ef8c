//! Grid flag parsing.
//!
//! A grid is a comma-separated list (`1,2,4`), a geometric range
//! `geom:START:STOP:COUNT`, or a linear range `lin:START:STOP:COUNT`.
//! Lists and ranges may be mixed: `0.5,lin:1:4:4`.

use crate::Failure;

fn range(kind: &str, spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(Failure::usage(format!("{kind}:{spec}: expected {kind}:START:STOP:COUNT")));
    };
    let start = number(start)?;
    let stop = number(stop)?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("bad count in {kind}:{spec}")))?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let steps = (count - 1) as f64;
    let values = match kind {
        "geom" => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(Failure::usage(format!("geom:{spec}: endpoints must be positive")));
            }
            let ratio = (stop / start).ln() / steps;
            (0..count).map(|i| start * (ratio * i as f64).exp()).collect()
        }
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / steps).collect(),
    };
    let mut values: Vec<f64> = values;
    // pin the endpoint exactly
    *values.last_mut().expect("count >= 2") = stop;
    Ok(values)
}

fn number(s: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Failure::usage(format!("not a number: {s:?}")))
}

/// Parses a real-valued grid. Values keep their given order.
pub fn reals(flag: &str, spec: &str) -> Result<Vec<f64>, Failure> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once(':') {
            Some((kind @ ("geom" | "lin"), rest)) => out.extend(range(kind, rest)?),
            _ => out.push(number(item)?),
        }
    }
    if out.is_empty() {
        return Err(Failure::usage(format!("--{flag}: empty grid")));
    }
    if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
        return Err(Failure::usage(format!("--{flag}: non-finite value {bad}")));
    }
    Ok(out)
}

/// Parses an integer grid; range values are rounded and duplicates dropped.
pub fn integers(flag: &str, spec: &str) -> Result<Vec<u64>, Failure> {
    let mut out: Vec<u64> = Vec::new();
    for v in reals(flag, spec)? {
        if v < 0.0 || v > u64::MAX as f64 {
            return Err(Failure::usage(format!("--{flag}: {v} is not a valid count")));
        }
        let r = v.round() as u64;
        if !out.contains(&r) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Checks every value against `ok`, naming the flag and the requirement.
pub fn require<T: Copy + std::fmt::Display>(flag: &str, values: &[T], what: &str, ok: impl Fn(T) -> bool) -> Result<(), Failure> {
    match values.iter().find(|&&v| !ok(v)) {
        Some(v) => Err(Failure::usage(format!("--{flag}: {v} is out of range ({what})"))),
        None => Ok(()),
    }
}
