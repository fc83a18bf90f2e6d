use super::{DiscreteMeasure, GridDensity};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Parsed measure file. `boundary` is set by the `boundary` header flag and
/// marks a measure on the hyperplane `x_N = 0`, stored in `N - 1` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFile {
    pub measure: DiscreteMeasure,
    pub boundary: bool,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>().or_else(|_| perr(line, format!("not a number: {s:?}")))
}

fn parse_list<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split(',').map(|t| t.trim().parse::<T>().or_else(|_| perr(line, format!("bad list entry {t:?}")))).collect()
}

/// Parses the text measure format:
///
/// ```text
/// measure N=3
/// atom 0 0 0 1
/// density origin=0,0,0 h=0.5 shape=2,2,2
/// 1 1 1 1 1 1 1 1
/// ```
///
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_measure(text: &str) -> Result<MeasureFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let Some((ln, header)) = lines.next() else {
        return perr(1, "empty measure file");
    };
    let mut toks = header.split_whitespace();
    if toks.next() != Some("measure") {
        return perr(ln, "first line must start with `measure`");
    }
    let mut dim = None;
    let mut boundary = false;
    for t in toks {
        if let Some(v) = t.strip_prefix("N=") {
            dim = Some(v.parse::<usize>().or_else(|_| perr(ln, format!("bad dimension {v:?}")))?);
        } else if t == "boundary" {
            boundary = true;
        } else {
            return perr(ln, format!("unknown header token {t:?}"));
        }
    }
    let dim = match dim {
        Some(d) if d >= 1 => d,
        _ => return perr(ln, "header needs N=<dim> with dim >= 1"),
    };
    let mut atoms = Vec::new();
    let mut density = None;
    let mut pending: Option<(usize, Vec<f64>, f64, Vec<usize>, Vec<f64>)> = None;
    for (ln, line) in lines {
        if let Some((_, _, _, shape, vals)) = pending.as_mut() {
            let need: usize = shape.iter().product();
            for t in line.split_whitespace() {
                let v = parse_f64(ln, t)?;
                if !(v.is_finite() && v >= 0.0) {
                    return perr(ln, format!("density values must be nonnegative, got {v}"));
                }
                vals.push(v);
            }
            if vals.len() > need {
                return perr(ln, format!("density block has more than {need} values"));
            }
            if vals.len() == need {
                let (l0, origin, h, shape, vals) = pending.take().unwrap();
                density = Some(GridDensity::new(origin, h, shape, vals).or_else(|e| perr(l0, e.to_string()))?);
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("atom") => {
                let nums: Vec<f64> = toks.map(|t| parse_f64(ln, t)).collect::<Result<_>>()?;
                if nums.len() != dim + 1 {
                    return perr(ln, format!("atom line needs {} numbers, got {}", dim + 1, nums.len()));
                }
                let w = nums[dim];
                if !(w.is_finite() && w >= 0.0) {
                    return perr(ln, format!("atom weight must be nonnegative, got {w}"));
                }
                atoms.push((nums[..dim].to_vec(), w));
            }
            Some("density") => {
                if density.is_some() {
                    return perr(ln, "only one density block is allowed");
                }
                let (mut origin, mut h, mut shape) = (None, None, None);
                for t in toks {
                    if let Some(v) = t.strip_prefix("origin=") {
                        origin = Some(parse_list::<f64>(ln, v)?);
                    } else if let Some(v) = t.strip_prefix("h=") {
                        h = Some(parse_f64(ln, v)?);
                    } else if let Some(v) = t.strip_prefix("shape=") {
                        shape = Some(parse_list::<usize>(ln, v)?);
                    } else {
                        return perr(ln, format!("unknown density token {t:?}"));
                    }
                }
                let (Some(origin), Some(h), Some(shape)) = (origin, h, shape) else {
                    return perr(ln, "density needs origin=, h= and shape=");
                };
                if origin.len() != dim || shape.len() != dim {
                    return perr(ln, "density origin/shape must have N entries");
                }
                if shape.iter().product::<usize>() == 0 {
                    return perr(ln, "density shape entries must be positive");
                }
                pending = Some((ln, origin, h, shape, Vec::new()));
            }
            Some(t) => return perr(ln, format!("unknown record {t:?}")),
            None => {}
        }
    }
    if pending.is_some() {
        return perr(text.lines().count(), "density block ended before all values were read");
    }
    let measure = DiscreteMeasure::new(dim, atoms, density).or_else(|e| perr(1, e.to_string()))?;
    Ok(MeasureFile { measure, boundary })
}

pub fn read_measure_file(path: &Path) -> Result<MeasureFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_measure(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        e => e,
    })
}

/// Serializes in the format read by [`parse_measure`]; numbers round-trip.
pub fn write_measure(m: &DiscreteMeasure, boundary: bool) -> String {
    let mut s = format!("measure N={}{}\n", m.dim(), if boundary { " boundary" } else { "" });
    for (x, w) in m.atoms() {
        s.push_str("atom");
        for c in x {
            let _ = write!(s, " {c}");
        }
        let _ = writeln!(s, " {w}");
    }
    if let Some(g) = m.density() {
        let join = |v: &[String]| v.join(",");
        let _ = writeln!(
            s,
            "density origin={} h={} shape={}",
            join(&g.origin.iter().map(|v| v.to_string()).collect::<Vec<_>>()),
            g.h,
            join(&g.shape.iter().map(|v| v.to_string()).collect::<Vec<_>>())
        );
        let row = *g.shape.last().unwrap();
        for chunk in g.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
    }
    s
}
