use super::{Operator, PicardMode, PicardOptions, SystemDomain, SystemSpec};
use crate::error::{Error, Result};
use crate::measure::{read_measure_file, DiscreteMeasure};
use crate::potential::BoxDomain;
use std::collections::BTreeMap;
use std::path::Path;

/// A parsed `iterate` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SystemSpec,
    pub options: PicardOptions,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((ln, v)) => v.parse::<f64>().map(Some).or_else(|_| perr(ln, format!("{key}: not a number: {v:?}"))),
        }
    }

    fn int(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some((ln, v)) => v.parse::<usize>().map(Some).or_else(|_| perr(ln, format!("{key}: not an integer: {v:?}"))),
        }
    }

    fn need(&mut self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key {key}") })
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((ln, v)) => v
                .split(',')
                .map(|t| t.trim().parse::<f64>().or_else(|_| perr(ln, format!("{key}: bad entry {t:?}"))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

/// `zero`, `dirac <w> at <x1,..,xN>` or `file <path>` (relative to `base`).
fn data(ln: usize, v: &str, dim: usize, base: Option<&Path>) -> Result<DiscreteMeasure> {
    let words: Vec<&str> = v.split_whitespace().collect();
    match words.as_slice() {
        ["zero"] => Ok(DiscreteMeasure::zero(dim)),
        ["dirac", w, "at", x] => {
            let w: f64 = w.parse().or_else(|_| perr(ln, format!("bad dirac weight {w:?}")))?;
            let x = x.split(',').map(|t| t.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
            let Ok(x) = x else { return perr(ln, "bad dirac location") };
            if x.len() != dim {
                return perr(ln, format!("dirac location needs {dim} coordinates"));
            }
            DiscreteMeasure::dirac(x, w)
        }
        ["file", path] => {
            let p = match base {
                Some(b) => b.join(path),
                None => Path::new(path).to_path_buf(),
            };
            let f = read_measure_file(&p)?;
            if f.boundary || f.measure.dim() != dim {
                return Err(Error::Data(format!("{}: expected an interior measure in R^{dim}", p.display())));
            }
            Ok(f.measure)
        }
        _ => perr(ln, format!("data must be `zero`, `dirac <w> at <x>` or `file <path>`, got {v:?}")),
    }
}

/// Parses the `key = value` run configuration:
///
/// ```text
/// operator = p-laplace      # or k-hessian
/// p = 2                     # k = 1 for k-hessian
/// q1 = 2                    # s1, s2 are accepted as aliases
/// q2 = 2
/// N = 3
/// domain = box              # or whole (then lo/hi is the lattice window)
/// lo = -1,-1,-1
/// hi = 1,1,1
/// lattice = 33
/// eta = dirac 1e-3 at 0,0,0
/// mu = zero
/// c_star = 1
/// max_m = 50
/// tol_conv = 1e-6
/// mode = monotone
/// ```
///
/// Optional keys: `c71`, `nodes`, `ceiling`. Measure files are resolved
/// against `base`.
pub fn parse_run_config(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return perr(ln, format!("expected key = value, got {line:?}"));
        };
        let k = match k.trim() {
            "s1" => "q1",
            "s2" => "q2",
            other => other,
        }
        .to_string();
        if map.insert(k.clone(), (ln, v.trim().to_string())).is_some() {
            return perr(ln, format!("duplicate key {k}"));
        }
    }
    let mut e = Entries(map);
    let dim = e.int("N")?.ok_or_else(|| Error::Parse { line: 0, msg: "missing key N".into() })?;
    let operator = match e.take("operator") {
        None => return perr(0, "missing key operator"),
        Some((_, v)) if v == "p-laplace" => Operator::PLaplace(e.need("p")?),
        Some((ln, v)) if v == "k-hessian" => match e.int("k")? {
            Some(k) => Operator::KHessian(k as u32),
            None => return perr(ln, "k-hessian needs k"),
        },
        Some((ln, v)) => return perr(ln, format!("unknown operator {v:?}")),
    };
    let q1 = e.need("q1")?;
    let q2 = e.need("q2")?;
    let lo = e.list("lo")?;
    let hi = e.list("hi")?;
    let window = match (lo, hi) {
        (Some(lo), Some(hi)) => Some(BoxDomain::new(lo, hi)?),
        (None, None) => None,
        _ => return perr(0, "lo and hi must be given together"),
    };
    let domain = match e.take("domain") {
        None => return perr(0, "missing key domain"),
        Some((ln, v)) if v == "box" => match &window {
            Some(b) => SystemDomain::Box(b.clone()),
            None => return perr(ln, "box domain needs lo and hi"),
        },
        Some((_, v)) if v == "whole" => SystemDomain::WholeSpace,
        Some((ln, v)) => return perr(ln, format!("domain must be box or whole, got {v:?}")),
    };
    let window = if matches!(domain, SystemDomain::WholeSpace) { window } else { None };
    let mu = match e.take("mu") {
        Some((ln, v)) => data(ln, &v, dim, base)?,
        None => DiscreteMeasure::zero(dim),
    };
    let eta = match e.take("eta") {
        Some((ln, v)) => data(ln, &v, dim, base)?,
        None => DiscreteMeasure::zero(dim),
    };
    let mut spec = SystemSpec::new(operator, dim, q1, q2, mu, eta, domain);
    if let Some(c) = e.num("c_star")? {
        spec.c_star = c;
    }
    if let Some(c) = e.num("c71")? {
        spec.c71 = c;
    }
    let mut options = PicardOptions { window, ..PicardOptions::default() };
    if let Some(n) = e.int("lattice")? {
        options.n = n;
    }
    if let Some(m) = e.int("max_m")? {
        options.max_m = m;
    }
    if let Some(t) = e.num("tol_conv")? {
        options.tol = t;
    }
    if let Some(n) = e.int("nodes")? {
        options.nodes = n;
    }
    if let Some(c) = e.num("ceiling")? {
        options.ceiling = c;
    }
    if let Some((ln, v)) = e.take("mode") {
        options.mode = match v.as_str() {
            "monotone" => PicardMode::Monotone,
            "plain" => PicardMode::Plain,
            _ => return perr(ln, format!("mode must be monotone or plain, got {v:?}")),
        };
    }
    if let Some((k, (ln, _))) = e.0.iter().next() {
        return perr(*ln, format!("unknown key {k}"));
    }
    spec.validate()?;
    Ok(RunConfig { spec, options })
}
