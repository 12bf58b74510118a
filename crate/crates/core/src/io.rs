//! The point file format: UTF-8 text, one point per line, `d` decimal
//! fields separated by commas, with optional leading `#` comment lines.
//! Parsing is locale independent (dot decimal separator).

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use std::path::Path;

/// Parses a point cloud from text. The dimension is inferred from the first
/// data line; every subsequent line must agree. Errors carry 1-based line
/// numbers.
pub fn parse_points(text: &str) -> Result<PointCloud> {
    let mut dim: Option<usize> = None;
    let mut coords: Vec<f64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let d = *dim.get_or_insert(fields.len());
        if fields.len() != d {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {d} fields, found {}", fields.len()),
            });
        }
        for f in fields {
            let value: f64 = f.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("cannot parse coordinate '{}'", f.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("coordinate {value} is not finite"),
                });
            }
            coords.push(value);
        }
    }
    let dim = dim.ok_or_else(|| Error::EmptySample("no data lines in point file".into()))?;
    if dim == 0 {
        return Err(Error::InvalidDimension);
    }
    PointCloud::new(dim, coords)
}

pub fn read_points(path: &Path) -> Result<PointCloud> {
    parse_points(&std::fs::read_to_string(path)?)
}

/// Renders a cloud in the point file format. `header` lines are emitted
/// first, each prefixed with `# `. Coordinates use shortest round-trip
/// formatting, so writing and re-reading reproduces the cloud exactly.
pub fn format_points(cloud: &PointCloud, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    for p in cloud.iter_points() {
        let fields: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_points(path: &Path, cloud: &PointCloud, header: &[String]) -> Result<()> {
    std::fs::write(path, format_points(cloud, header))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternatives::sample_uniform;
    use crate::rng::RngStream;

    #[test]
    fn parses_with_header_and_whitespace() {
        let text = "# model=h0 n=3 d=2\n0.25, 0.5\n0.125,0.75\n1e-3,9.5e-1\n";
        let cloud = parse_points(text).unwrap();
        assert_eq!(cloud.dim(), 2);
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.point(2), &[1e-3, 0.95]);
    }

    #[test]
    fn line_numbered_errors() {
        match parse_points("0.1,0.2\n0.3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
        match parse_points("# header\n0.1,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse failure, got {other:?}"),
        }
        match parse_points("0.1,0.2\n0.3,inf\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected non-finite rejection, got {other:?}"),
        }
        assert!(matches!(
            parse_points("# only comments\n"),
            Err(Error::EmptySample(_))
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = RngStream::new(50, 0).rng();
        let cloud = sample_uniform(100, 3, &mut rng).unwrap();
        let text = format_points(&cloud, &["model=h0 seed=50".into()]);
        let back = parse_points(&text).unwrap();
        assert_eq!(cloud, back);
    }
}
