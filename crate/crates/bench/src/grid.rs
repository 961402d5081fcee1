//! Parameter grids: `lo:hi:log10`, `lo:hi:step`, `lo:hi`, comma lists and
//! single values.

use crate::BenchError;

/// Parses a grid of positive or nonnegative reals.
///
/// `lo:hi:log10` gives the decades `lo, 10 lo, ...` up to `hi`; `lo:hi:step`
/// an arithmetic progression; a bare `lo:hi` uses `lo` as the step. Items
/// can be mixed in a comma list: `1e3,1e5:1e7:log10`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, BenchError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(usage(s, "empty item"));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(number(v, s)?),
            [lo, hi] => {
                let lo = number(lo, s)?;
                out.extend(arithmetic(lo, number(hi, s)?, lo, s)?);
            }
            [lo, hi, "log10"] => out.extend(decades(number(lo, s)?, number(hi, s)?, s)?),
            [lo, hi, step] => out.extend(arithmetic(number(lo, s)?, number(hi, s)?, number(step, s)?, s)?),
            _ => return Err(usage(s, "expected lo:hi[:step|log10]")),
        }
    }
    Ok(out)
}

/// Grid of counts, e.g. row numbers written as `1e5:1e6`.
pub fn parse_count_grid(s: &str) -> Result<Vec<usize>, BenchError> {
    parse_grid(s)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r < 1.0 || (v - r).abs() > 1e-6 * r.max(1.0) {
                Err(usage(s, &format!("{v} is not a positive integer")))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

fn number(t: &str, whole: &str) -> Result<f64, BenchError> {
    let v: f64 = t.trim().parse().map_err(|_| usage(whole, &format!("'{t}' is not a number")))?;
    if !v.is_finite() {
        return Err(usage(whole, "values must be finite"));
    }
    Ok(v)
}

fn arithmetic(lo: f64, hi: f64, step: f64, whole: &str) -> Result<Vec<f64>, BenchError> {
    if !(step > 0.0) || hi < lo {
        return Err(usage(whole, "need lo <= hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(usage(whole, "grid too large"));
    }
    // lo + i*step, not repeated addition, keeps 1.0:3.0:0.1 exact enough
    // that 3.0 is included and printed as 3.0.
    Ok((0..count).map(|i| tidy(lo + i as f64 * step)).collect())
}

fn decades(lo: f64, hi: f64, whole: &str) -> Result<Vec<f64>, BenchError> {
    if !(lo > 0.0) || hi < lo {
        return Err(usage(whole, "log10 grid needs 0 < lo <= hi"));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let count = (b - a + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| tidy(lo * 10f64.powi(i as i32))).collect())
}

/// Rounds to 12 significant digits so that grid points print as written.
fn tidy(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn usage(grid: &str, msg: &str) -> BenchError {
    BenchError::Usage(format!("bad grid '{grid}': {msg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_has_thirteen_decades() {
        let g = parse_grid("1e3:1e15:log10").unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e3);
        assert_eq!(g[12], 1e15);
        assert_eq!(g[5], 1e8);
    }

    #[test]
    fn step_and_bare_ranges() {
        let g = parse_grid("1.0:3.0:0.1").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[2], 1.2);
        assert_eq!(g[20], 3.0);
        assert_eq!(parse_count_grid("1e5:1e6").unwrap(), (1..=10).map(|i| i * 100_000).collect::<Vec<_>>());
        assert_eq!(parse_grid("1.1,1.2, 2").unwrap(), vec![1.1, 1.2, 2.0]);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "a", "1:0", "1:2:0", "0:10:log10", "1:2:3:4", "1e5,", "nan", "1.5e0x"] {
            assert!(matches!(parse_grid(bad), Err(BenchError::Usage(_))), "{bad}");
        }
        assert!(parse_count_grid("2.5").is_err());
        assert!(parse_count_grid("0").is_err());
    }
}
