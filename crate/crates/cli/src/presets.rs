//! Preset measure files and configurations, embedded so they resolve from
//! any working directory. A path on disk always wins over a preset name.

use std::path::{Path, PathBuf};
use wolffkit::measure::{parse_measure, read_measure_file, DiscreteMeasure, MeasureFile};
use wolffkit::{Error, Result};

pub const PRESETS: [(&str, &str); 7] = [
    ("dirac.msr", include_str!("../presets/dirac.msr")),
    ("small-dirac.msr", include_str!("../presets/small-dirac.msr")),
    ("boundary-dirac.msr", include_str!("../presets/boundary-dirac.msr")),
    ("h1.hardy", include_str!("../presets/h1.hardy")),
    ("picard-small.cfg", include_str!("../presets/picard-small.cfg")),
    ("picard-large.cfg", include_str!("../presets/picard-large.cfg")),
    ("picard-zero.cfg", include_str!("../presets/picard-zero.cfg")),
];

/// Preset text by file name, with or without its extension.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name || n.split('.').next() == Some(name)).map(|p| p.1)
}

/// Text of `arg` read from disk, else the preset of that name, plus the
/// directory relative paths inside it resolve against.
pub fn load_text(arg: &str) -> Result<(String, Option<PathBuf>)> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
        return Ok((text, path.parent().map(Path::to_path_buf)));
    }
    match preset(arg) {
        Some(t) => Ok((t.to_string(), None)),
        None => Err(Error::Io(format!("{arg}: no such file or preset"))),
    }
}

pub fn load_measure(arg: &str) -> Result<MeasureFile> {
    let path = Path::new(arg);
    if path.exists() {
        return read_measure_file(path);
    }
    match preset(arg) {
        Some(t) => parse_measure(t),
        None => Err(Error::Io(format!("{arg}: no such file or preset"))),
    }
}

/// An interior measure in `R^dim`; `zero` gives the zero measure.
pub fn interior_measure(arg: &str, dim: usize) -> Result<DiscreteMeasure> {
    if arg == "zero" {
        return Ok(DiscreteMeasure::zero(dim));
    }
    let f = load_measure(arg)?;
    if f.boundary || f.measure.dim() != dim {
        return Err(Error::Data(format!("{arg}: expected an interior measure in R^{dim}")));
    }
    Ok(f.measure)
}

/// A boundary measure in `dim - 1` coordinates; `zero` gives the zero measure.
pub fn boundary_measure(arg: &str, dim: usize) -> Result<DiscreteMeasure> {
    if arg == "zero" {
        return Ok(DiscreteMeasure::zero(dim - 1));
    }
    let f = load_measure(arg)?;
    if !f.boundary || f.measure.dim() + 1 != dim {
        return Err(Error::Data(format!("{arg}: expected a boundary measure (header `boundary`, N={})", dim - 1)));
    }
    Ok(f.measure)
}
