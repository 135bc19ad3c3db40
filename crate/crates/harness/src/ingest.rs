//! Ingestion of common-design CSV files (daily-profile style data).
//!
//! Two schemas:
//! - `long`: the library's `curve_index,t,y` layout, validated to be a
//!   common design;
//! - `wide`: one row per curve holding the values over the shared grid
//!   (an optional non-numeric header row is skipped). Empty cells, `NA` and
//!   `nan` mark missing values. A curve missing more than 5% of its points
//!   is dropped with a warning, otherwise the gaps are filled linearly.

use crate::error::{HarnessError, Result};
use ftsreg_core::csvio;
use ftsreg_core::domain::{DesignKind, DomainInterval, FunctionalSample, ObservedCurve};
use std::io::BufReader;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestSchema {
    Long,
    Wide,
}

/// Read a common-design sample from `path`. With `normalize_domain` the
/// design points become T_i = i/λ on (0, 1]; otherwise T_i = i.
pub fn ingest_common_csv(
    path: &Path,
    schema: IngestSchema,
    normalize_domain: bool,
) -> Result<FunctionalSample<f64>> {
    match schema {
        IngestSchema::Long => {
            let file = std::fs::File::open(path)?;
            let sample: FunctionalSample<f64> = csvio::read_sample_long(BufReader::new(file))
                .map_err(|e| HarnessError::Data(e.to_string()))?;
            if sample.design() != DesignKind::Common {
                return Err(HarnessError::Data(
                    "long input does not form a common design".into(),
                ));
            }
            Ok(sample)
        }
        IngestSchema::Wide => ingest_wide(path, normalize_domain),
    }
}

fn parse_cell(cell: &str) -> Result<Option<f64>> {
    let c = cell.trim();
    if c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    c.parse::<f64>()
        .map(Some)
        .map_err(|e| HarnessError::Data(format!("bad cell {cell:?}: {e}")))
}

fn ingest_wide(path: &Path, normalize_domain: bool) -> Result<FunctionalSample<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if i == 0 {
            // a header row is any row with a non-numeric, non-missing cell
            let is_header = cells
                .iter()
                .any(|c| !c.trim().is_empty() && parse_cell(c).is_err());
            if is_header {
                continue;
            }
        }
        let parsed: Vec<Option<f64>> = cells
            .iter()
            .map(|c| parse_cell(c))
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(parsed.len()),
            Some(w) if w != parsed.len() => {
                return Err(HarnessError::Data(format!(
                    "row {} has {} cells, expected {w}",
                    i + 1,
                    parsed.len()
                )))
            }
            _ => {}
        }
        rows.push(parsed);
    }
    let lambda = width.ok_or_else(|| HarnessError::Data("empty input".into()))?;
    if lambda < 2 {
        return Err(HarnessError::Data(
            "wide input needs at least two columns".into(),
        ));
    }
    let times: Vec<f64> = (1..=lambda)
        .map(|i| {
            if normalize_domain {
                i as f64 / lambda as f64
            } else {
                i as f64
            }
        })
        .collect();
    let domain = if normalize_domain {
        DomainInterval::unit()
    } else {
        DomainInterval::new(0.0, lambda as f64).map_err(|e| HarnessError::Data(e.to_string()))?
    };
    let mut curves = Vec::new();
    let mut dropped = 0usize;
    for (r, row) in rows.iter().enumerate() {
        let missing = row.iter().filter(|c| c.is_none()).count();
        if missing as f64 > 0.05 * lambda as f64 {
            dropped += 1;
            log::warn!(
                "dropping curve {r}: {missing}/{lambda} values missing (over the 5% cap)"
            );
            continue;
        }
        let values = fill_missing(row)
            .ok_or_else(|| HarnessError::Data(format!("curve {r} has no observed values")))?;
        curves.push(
            ObservedCurve::new(times.clone(), values)
                .map_err(|e| HarnessError::Data(e.to_string()))?,
        );
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} curves during ingestion");
    }
    FunctionalSample::new(curves, DesignKind::Common, domain)
        .map_err(|e| HarnessError::Data(e.to_string()))
}

/// Linear interpolation across interior gaps, nearest-value fill at the ends.
fn fill_missing(row: &[Option<f64>]) -> Option<Vec<f64>> {
    let known: Vec<(usize, f64)> = row
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    if known.is_empty() {
        return None;
    }
    let mut out = Vec::with_capacity(row.len());
    for i in 0..row.len() {
        if let Some(v) = row[i] {
            out.push(v);
            continue;
        }
        let after = known.iter().find(|(k, _)| *k > i);
        let before = known.iter().rev().find(|(k, _)| *k < i);
        let v = match (before, after) {
            (Some(&(k0, v0)), Some(&(k1, v1))) => {
                v0 + (v1 - v0) * (i - k0) as f64 / (k1 - k0) as f64
            }
            (Some(&(_, v0)), None) => v0,
            (None, Some(&(_, v1))) => v1,
            (None, None) => unreachable!("known is non-empty"),
        };
        out.push(v);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn wide_three_curves_four_points() {
        let f = write_temp("v1,v2,v3,v4\n1,2,3,4\n5,6,7,8\n9,10,11,12\n");
        let s = ingest_common_csv(f.path(), IngestSchema::Wide, true).unwrap();
        assert_eq!(s.n_curves(), 3);
        assert_eq!(s.curve(0).len(), 4);
        assert_eq!(s.curve(0).times(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(s.curve(2).values(), &[9.0, 10.0, 11.0, 12.0]);
        assert_eq!(s.design(), DesignKind::Common);
    }

    #[test]
    fn all_missing_curve_is_dropped_with_warning() {
        let f = write_temp("1,2,3,4\n,,,\n5,6,7,8\n9,10,11,12\n");
        let s = ingest_common_csv(f.path(), IngestSchema::Wide, true).unwrap();
        assert_eq!(s.n_curves(), 3);
    }

    #[test]
    fn small_gaps_are_filled_linearly() {
        // 5% of 40 = 2 missing allowed
        let mut row: Vec<String> = (1..=40).map(|i| i.to_string()).collect();
        row[10] = String::new();
        let f = write_temp(&format!("{}\n{}\n", row.join(","), row.join(",")));
        let s = ingest_common_csv(f.path(), IngestSchema::Wide, true).unwrap();
        assert_eq!(s.n_curves(), 2);
        // linear fill between 10 (index 9) and 12 (index 11)
        assert_eq!(s.curve(0).values()[10], 11.0);
    }

    #[test]
    fn inconsistent_row_lengths_are_rejected() {
        let f = write_temp("1,2,3\n4,5\n");
        assert!(ingest_common_csv(f.path(), IngestSchema::Wide, true).is_err());
    }

    #[test]
    fn unnormalized_domain_uses_integer_times() {
        let f = write_temp("1,2,3,4\n5,6,7,8\n");
        let s = ingest_common_csv(f.path(), IngestSchema::Wide, false).unwrap();
        assert_eq!(s.curve(0).times(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn long_schema_requires_common_design() {
        let f = write_temp("curve_index,t,y\n0,0.5,1\n0,1,2\n1,0.25,3\n1,1,4\n");
        assert!(ingest_common_csv(f.path(), IngestSchema::Long, false).is_err());
        let f2 = write_temp("curve_index,t,y\n0,0.5,1\n0,1,2\n1,0.5,3\n1,1,4\n");
        let s = ingest_common_csv(f2.path(), IngestSchema::Long, false).unwrap();
        assert_eq!(s.design(), DesignKind::Common);
    }
}
