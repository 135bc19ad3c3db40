//! CSV serialization of functional samples and latent paths.
//!
//! Two sample layouts are supported:
//! - long: header `curve_index,t,y`, one row per observation;
//! - wide: header `t,y_0,...,y_{N-1}`, one row per shared design point
//!   (common design only).
//!
//! Floats are written with the shortest round-trip representation, so a
//! write/read cycle is value-exact for `f64`.

use crate::domain::{DesignKind, DomainInterval, FunctionalSample, ObservedCurve};
use crate::error::{FtsError, Result};
use crate::scalar::Real;
use crate::simulate::LatentPaths;
use std::io::{BufRead, Write};

pub const LONG_HEADER: &str = "curve_index,t,y";

fn parse_field<F: Real>(field: &str, line_no: usize) -> Result<F> {
    field
        .trim()
        .parse::<f64>()
        .map(F::of)
        .map_err(|e| FtsError::Parse(format!("line {line_no}: bad number {field:?}: {e}")))
}

/// Infer a domain for parsed design points: (0, max(1, t_max)].
fn inferred_domain<F: Real>(min_t: F, max_t: F) -> Result<DomainInterval<F>> {
    if !(min_t > F::zero()) {
        return Err(FtsError::Parse(format!(
            "design points must be positive (domain is half-open at 0), found {min_t}"
        )));
    }
    DomainInterval::new(F::zero(), max_t.max(F::one()))
}

/// Write a sample in long format.
pub fn write_sample_long<F: Real, W: Write>(w: &mut W, sample: &FunctionalSample<F>) -> Result<()> {
    writeln!(w, "{LONG_HEADER}")?;
    for (n, curve) in sample.curves().iter().enumerate() {
        for (t, y) in curve.times().iter().zip(curve.values()) {
            writeln!(w, "{n},{t},{y}")?;
        }
    }
    Ok(())
}

/// Read a long-format sample. The design kind is detected: identical design
/// points on every curve yield a common design.
pub fn read_sample_long<F: Real, R: BufRead>(r: R) -> Result<FunctionalSample<F>> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(FtsError::Parse("empty file".into())),
    };
    if header.trim() != LONG_HEADER {
        return Err(FtsError::Parse(format!(
            "expected header {LONG_HEADER:?}, got {header:?}"
        )));
    }
    let mut per_curve: Vec<Vec<(F, F)>> = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let idx: usize = fields
            .next()
            .ok_or_else(|| FtsError::Parse(format!("line {line_no}: missing curve index")))?
            .trim()
            .parse()
            .map_err(|e| FtsError::Parse(format!("line {line_no}: bad curve index: {e}")))?;
        let t: F = parse_field(
            fields
                .next()
                .ok_or_else(|| FtsError::Parse(format!("line {line_no}: missing t")))?,
            line_no,
        )?;
        let y: F = parse_field(
            fields
                .next()
                .ok_or_else(|| FtsError::Parse(format!("line {line_no}: missing y")))?,
            line_no,
        )?;
        if per_curve.len() <= idx {
            per_curve.resize_with(idx + 1, Vec::new);
        }
        per_curve[idx].push((t, y));
    }
    if per_curve.iter().any(|c| c.is_empty()) {
        return Err(FtsError::Parse(
            "curve indices must be contiguous from 0".into(),
        ));
    }
    let mut min_t = F::infinity();
    let mut max_t = F::neg_infinity();
    let mut curves = Vec::with_capacity(per_curve.len());
    for mut obs in per_curve {
        obs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if obs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(FtsError::Parse("duplicate design point on a curve".into()));
        }
        let (times, values): (Vec<F>, Vec<F>) = obs.into_iter().unzip();
        min_t = min_t.min(times[0]);
        max_t = max_t.max(*times.last().unwrap());
        curves.push(ObservedCurve::new(times, values)?);
    }
    let domain = inferred_domain(min_t, max_t)?;
    let first = curves[0].times().to_vec();
    let common = curves.iter().all(|c| c.times() == first.as_slice());
    let design = if common && curves.len() >= 2 {
        DesignKind::Common
    } else {
        DesignKind::Independent
    };
    FunctionalSample::new(curves, design, domain)
}

/// Write a common-design sample in wide format.
pub fn write_sample_wide<F: Real, W: Write>(w: &mut W, sample: &FunctionalSample<F>) -> Result<()> {
    if sample.design() != DesignKind::Common {
        return Err(FtsError::InvalidConfig(
            "wide format requires a common design".into(),
        ));
    }
    write!(w, "t")?;
    for n in 0..sample.n_curves() {
        write!(w, ",y_{n}")?;
    }
    writeln!(w)?;
    let times = sample.curve(0).times();
    for (i, t) in times.iter().enumerate() {
        write!(w, "{t}")?;
        for curve in sample.curves() {
            write!(w, ",{}", curve.values()[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a wide-format sample (always a common design). The time column must
/// be strictly increasing.
pub fn read_sample_wide<F: Real, R: BufRead>(r: R) -> Result<FunctionalSample<F>> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(FtsError::Parse("empty file".into())),
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"t") || cols.len() < 3 {
        return Err(FtsError::Parse(format!(
            "expected header t,y_0,...,y_(N-1), got {header:?}"
        )));
    }
    let n = cols.len() - 1;
    let mut times: Vec<F> = Vec::new();
    let mut columns: Vec<Vec<F>> = vec![Vec::new(); n];
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            return Err(FtsError::Parse(format!(
                "line {line_no}: expected {} fields, got {}",
                n + 1,
                fields.len()
            )));
        }
        let t = parse_field::<F>(fields[0], line_no)?;
        if let Some(&last) = times.last() {
            if t <= last {
                return Err(FtsError::Parse(format!(
                    "line {line_no}: time column must be strictly increasing"
                )));
            }
        }
        times.push(t);
        for (c, field) in fields[1..].iter().enumerate() {
            columns[c].push(parse_field(field, line_no)?);
        }
    }
    if times.len() < 2 {
        return Err(FtsError::Parse("need at least two design points".into()));
    }
    let domain = inferred_domain(times[0], *times.last().unwrap())?;
    let curves: Result<Vec<_>> = columns
        .into_iter()
        .map(|values| ObservedCurve::new(times.clone(), values))
        .collect();
    FunctionalSample::new(curves?, DesignKind::Common, domain)
}

/// Write latent paths as `t,x_0,...,x_(N-1)` on the latent grid.
pub fn write_latent<F: Real, W: Write>(w: &mut W, paths: &LatentPaths<F>) -> Result<()> {
    write!(w, "t")?;
    for n in 0..paths.count() {
        write!(w, ",x_{n}")?;
    }
    writeln!(w)?;
    for (i, t) in paths.grid().iter().enumerate() {
        write!(w, "{t}")?;
        for n in 0..paths.count() {
            write!(w, ",{}", paths.path(n)[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read latent paths written by [`write_latent`].
pub fn read_latent<F: Real, R: BufRead>(r: R) -> Result<LatentPaths<F>> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(FtsError::Parse("empty file".into())),
    };
    let n = header.trim().split(',').count().saturating_sub(1);
    if n == 0 {
        return Err(FtsError::Parse("latent file has no path columns".into()));
    }
    let mut grid = Vec::new();
    let mut columns: Vec<Vec<F>> = vec![Vec::new(); n];
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            return Err(FtsError::Parse(format!(
                "latent row {i}: expected {} fields",
                n + 1
            )));
        }
        grid.push(parse_field(fields[0], i + 1)?);
        for (c, f) in fields[1..].iter().enumerate() {
            columns[c].push(parse_field(f, i + 1)?);
        }
    }
    let g = grid.len();
    let mut values = Vec::with_capacity(n * g);
    for col in &columns {
        values.extend_from_slice(col);
    }
    LatentPaths::new(grid, values, n)
}

/// Read a sample from a path, detecting the layout from the header.
pub fn read_sample_path<F: Real>(path: &std::path::Path) -> Result<FunctionalSample<F>> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("");
    if header.trim() == LONG_HEADER {
        read_sample_long(std::io::BufReader::new(text.as_bytes()))
    } else if header.trim_start().starts_with("t,") {
        read_sample_wide(std::io::BufReader::new(text.as_bytes()))
    } else {
        Err(FtsError::Parse(format!(
            "unrecognized sample header {header:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    fn demo_sample() -> FunctionalSample<f64> {
        let a = ObservedCurve::new(vec![0.1, 0.5, 0.9], vec![1.25, -0.5, 3.0]).unwrap();
        let b = ObservedCurve::new(vec![0.2, 0.6], vec![0.125, 2.5]).unwrap();
        FunctionalSample::new(
            vec![a, b],
            DesignKind::Independent,
            DomainInterval::unit(),
        )
        .unwrap()
    }

    #[test]
    fn long_roundtrip_is_exact() {
        let s = demo_sample();
        let mut buf = Vec::new();
        write_sample_long(&mut buf, &s).unwrap();
        let back: FunctionalSample<f64> = read_sample_long(BufReader::new(&buf[..])).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn wide_roundtrip_is_exact() {
        let times = vec![0.25, 0.5, 0.75, 1.0];
        let a = ObservedCurve::new(times.clone(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ObservedCurve::new(times, vec![-1.0, 0.5, 0.0, 1e-17]).unwrap();
        let s = FunctionalSample::new(vec![a, b], DesignKind::Common, DomainInterval::unit())
            .unwrap();
        let mut buf = Vec::new();
        write_sample_wide(&mut buf, &s).unwrap();
        let back: FunctionalSample<f64> = read_sample_wide(BufReader::new(&buf[..])).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn long_reader_detects_common_design() {
        let text = "curve_index,t,y\n0,0.5,1\n0,1,2\n1,0.5,3\n1,1,4\n";
        let s: FunctionalSample<f64> = read_sample_long(BufReader::new(text.as_bytes())).unwrap();
        assert_eq!(s.design(), DesignKind::Common);
    }

    #[test]
    fn wide_reader_rejects_non_monotone_times() {
        let text = "t,y_0,y_1\n0.5,1,2\n0.4,3,4\n";
        assert!(read_sample_wide::<f64, _>(BufReader::new(text.as_bytes())).is_err());
    }

    #[test]
    fn long_reader_rejects_gaps_and_duplicates() {
        let gap = "curve_index,t,y\n0,0.5,1\n0,0.6,2\n2,0.5,3\n2,0.6,4\n";
        assert!(read_sample_long::<f64, _>(BufReader::new(gap.as_bytes())).is_err());
        let dup = "curve_index,t,y\n0,0.5,1\n0,0.5,2\n1,0.5,3\n1,0.6,4\n";
        assert!(read_sample_long::<f64, _>(BufReader::new(dup.as_bytes())).is_err());
    }

    #[test]
    fn latent_roundtrip() {
        let grid = LatentPaths::<f64>::equispaced_grid(5);
        let values: Vec<f64> = (0..10).map(|i| (i as f64).sqrt()).collect();
        let paths = LatentPaths::new(grid, values, 2).unwrap();
        let mut buf = Vec::new();
        write_latent(&mut buf, &paths).unwrap();
        let back: LatentPaths<f64> = read_latent(BufReader::new(&buf[..])).unwrap();
        assert_eq!(back, paths);
    }
}
