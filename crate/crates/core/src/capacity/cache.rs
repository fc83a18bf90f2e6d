//! Reference constants `Cap(B̄_1)` keyed by `(N, A, s, h)`.
//!
//! Riesz references persist in a plain text file with lines
//! `N A s h value iterations converged`; other kinds stay in memory.

use super::{capacity_variational, CapacityEstimate, CapacityKind, CapacityMethod, CapacityParams, VariationalOptions};
use crate::error::{Error, Result};
use crate::measure::Region;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub const CACHE_ENV: &str = "WOLFFKIT_CACHE";

#[derive(Debug)]
pub struct CapacityCache {
    path: Option<PathBuf>,
    /// Grid spacing of reference solves on the unit ball.
    pub h: f64,
    entries: Mutex<HashMap<String, CapacityEstimate>>,
}

fn key(p: &CapacityParams, dim: usize, h: f64) -> String {
    match p.kind {
        CapacityKind::Riesz => format!("{dim} {:?} {:?} {:?}", p.alpha, p.s, h),
        _ => format!("{} {dim} {:?} {:?} {:?} {:?}", p.kind.name(), p.alpha, p.s, h, p.bessel_scale),
    }
}

impl CapacityCache {
    pub const DEFAULT_H: f64 = 0.125;

    pub fn in_memory(h: f64) -> Self {
        CapacityCache { path: None, h, entries: Mutex::new(HashMap::new()) }
    }

    /// Loads `path` if it exists; new Riesz references are appended to it.
    pub fn with_file(path: impl AsRef<Path>, h: f64) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, est) = parse_line(line).ok_or_else(|| Error::Parse { line: i + 1, msg: format!("bad cache line `{line}`") })?;
                entries.insert(k, est);
            }
        }
        Ok(CapacityCache { path: Some(path), h, entries: Mutex::new(entries) })
    }

    /// Uses `$WOLFFKIT_CACHE` when set, else `default`.
    pub fn from_env(default: impl AsRef<Path>, h: f64) -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(p) => Self::with_file(p, h),
            None => Self::with_file(default, h),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Cap(B̄_1)` for `p`, solving and recording it on first use.
    pub fn reference(&self, p: &CapacityParams, dim: usize) -> Result<CapacityEstimate> {
        let k = key(p, dim, self.h);
        if let Some(e) = self.entries.lock().unwrap().get(&k) {
            return Ok(e.clone());
        }
        let ball = Region::Ball { center: vec![0.0; dim], radius: 1.0 };
        let est = capacity_variational(p, &ball, dim, &VariationalOptions::new(self.h))?;
        let mut map = self.entries.lock().unwrap();
        if let Some(e) = map.get(&k) {
            return Ok(e.clone());
        }
        if let (Some(path), CapacityKind::Riesz) = (&self.path, p.kind) {
            let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{k} {:?} {} {}", est.value, est.iterations, est.converged)?;
        }
        map.insert(k, est.clone());
        Ok(est)
    }
}

fn parse_line(line: &str) -> Option<(String, CapacityEstimate)> {
    let t: Vec<&str> = line.split_whitespace().collect();
    if t.len() != 7 {
        return None;
    }
    let dim: usize = t[0].parse().ok()?;
    let a: f64 = t[1].parse().ok()?;
    let s: f64 = t[2].parse().ok()?;
    let h: f64 = t[3].parse().ok()?;
    let value: f64 = t[4].parse().ok()?;
    let iterations: usize = t[5].parse().ok()?;
    let converged: bool = t[6].parse().ok()?;
    if !(value >= 0.0 && h > 0.0) {
        return None;
    }
    let est = CapacityEstimate {
        value,
        method: CapacityMethod::Variational,
        reference: None,
        resolution: Some(h),
        lower_bound: None,
        iterations,
        converged,
    };
    Some((key(&CapacityParams::riesz(a, s), dim, h), est))
}
