//! `∫_0^R t^κ (∫_t^R h(r) r^θ dr/r)^γ dt/t ≤ c ∫_0^{2R} t^{κ+θγ} h(t)^γ dt/t`
//! for nondecreasing step functions `h`.

use super::{Extreme, InequalityReport, SampleRow};
use crate::error::{domain, Result};

/// Step function `h = values[i]` on `(breaks[i-1], breaks[i]]`, with
/// `breaks[-1] = 0` and the last value extending to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyProbe {
    pub kappa: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Upper limit; `f64::INFINITY` allowed.
    pub r: f64,
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl HardyProbe {
    pub fn constant(kappa: f64, gamma: f64, theta: f64, r: f64, value: f64) -> Self {
        HardyProbe { kappa, gamma, theta, r, breaks: Vec::new(), values: vec![value] }
    }

    /// `f` sampled at the right ends of `m` equal pieces of `(0, 2R]`.
    pub fn sampled(kappa: f64, gamma: f64, theta: f64, r: f64, m: usize, f: impl Fn(f64) -> f64) -> Self {
        let m = m.max(1);
        let breaks: Vec<f64> = (1..m).map(|i| 2.0 * r * i as f64 / m as f64).collect();
        let values = (1..=m).map(|i| f(2.0 * r * i as f64 / m as f64)).collect();
        HardyProbe { kappa, gamma, theta, r, breaks, values }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite() && self.gamma > 0.0 && self.gamma.is_finite()) {
            return domain("hardy probe needs finite kappa > 0 and gamma > 0");
        }
        if !self.theta.is_finite() || !(self.r > 0.0) {
            return domain("hardy probe needs finite theta and R > 0");
        }
        if self.values.len() != self.breaks.len() + 1 {
            return domain("hardy probe needs one more value than breakpoints");
        }
        if self.breaks.iter().any(|b| !(b.is_finite() && *b > 0.0)) || self.breaks.windows(2).any(|w| w[0] >= w[1]) {
            return domain("hardy breakpoints must be positive and strictly increasing");
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("hardy step values must be finite and nonnegative");
        }
        if self.values.windows(2).any(|w| w[0] > w[1]) {
            return domain("hardy step function must be nondecreasing");
        }
        Ok(())
    }

    /// Pieces `(a, b, value)` covering `(0, upper]`.
    fn pieces(&self, upper: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut a = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let b = self.breaks.get(i).copied().unwrap_or(f64::INFINITY).min(upper);
            if b > a {
                out.push((a, b, v));
            }
            a = b;
            if a >= upper {
                break;
            }
        }
        out
    }
}

/// Constructive constant: `(γ/κ)^γ` for `γ > 1` (Hardy's inequality);
/// for `γ ≤ 1`, dyadic blocks `[2^j t, 2^{j+1} t]` and subadditivity of
/// `x^γ` give `((2^θ - 1)/θ)^γ 2^{-θγ} / (2^κ - 1)`.
pub fn hardy_constant(kappa: f64, gamma: f64, theta: f64) -> f64 {
    if gamma > 1.0 {
        (gamma / kappa).powf(gamma)
    } else {
        let block = if theta.abs() < 1e-12 { std::f64::consts::LN_2 } else { (2f64.powf(theta) - 1.0) / theta };
        block.powf(gamma) * 2f64.powf(-theta * gamma) / (2f64.powf(kappa) - 1.0)
    }
}

/// `∫_a^b r^{e-1} dr`, allowing `a = 0` and `b = ∞`.
fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    if e.abs() < 1e-14 {
        return (b / a).ln();
    }
    let pa = if a == 0.0 { if e > 0.0 { 0.0 } else { f64::INFINITY } } else { a.powf(e) };
    let pb = if b.is_infinite() { if e < 0.0 { 0.0 } else { f64::INFINITY } } else { b.powf(e) };
    if pa.is_infinite() || pb.is_infinite() {
        return f64::INFINITY;
    }
    (pb - pa) / e
}

const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre on `[u0, u1]` with panels of width ≤ `width`.
fn gauss(u0: f64, u1: f64, width: f64, f: impl Fn(f64) -> f64) -> f64 {
    let panels = (((u1 - u0) / width).ceil() as usize).clamp(1, 200_000);
    let w = (u1 - u0) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = u0 + (p as f64 + 0.5) * w;
        for k in 0..8 {
            acc += GL_W[k] * f(mid + 0.5 * w * GL_X[k]);
        }
    }
    acc * 0.5 * w
}

fn lhs(p: &HardyProbe) -> f64 {
    let (k, g, th) = (p.kappa, p.gamma, p.theta);
    let mut upper = p.r;
    let last = *p.values.last().unwrap();
    if upper.is_infinite() && last == 0.0 {
        upper = p.breaks.iter().zip(&p.values).filter(|(_, v)| **v > 0.0).map(|(b, _)| *b).fold(0.0, f64::max);
        if upper == 0.0 {
            return 0.0;
        }
    }
    let pieces = p.pieces(upper);
    // H at the right end of each piece, accumulated from the top.
    let mut tail = vec![0.0; pieces.len()];
    let mut acc = 0.0;
    for i in (0..pieces.len()).rev() {
        tail[i] = acc;
        let (a, b, v) = pieces[i];
        if v > 0.0 {
            acc += v * power_integral(a, b, th);
        }
    }
    if acc == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, &(a, b, v)) in pieces.iter().enumerate() {
        let h_at = |t: f64| tail[i] + if v > 0.0 { v * power_integral(t, b, th) } else { 0.0 };
        if b.is_infinite() {
            // Only reached with v > 0 and R = ∞: H(t) = v t^θ / (-θ).
            if th >= 0.0 || k + th * g >= 0.0 {
                return f64::INFINITY;
            }
            let e = k + th * g;
            total += (v / -th).powf(g) * a.powf(e) / -e;
            continue;
        }
        let f = |u: f64| {
            let t = u.exp();
            t.powf(k) * h_at(t).powf(g)
        };
        if a == 0.0 {
            // Near 0 the integrand behaves like t^{κ + θγ} when h > 0 there and θ < 0.
            let rate = if v > 0.0 && th < 0.0 { k + th * g } else { k };
            if rate <= 0.0 {
                return f64::INFINITY;
            }
            let span = (60.0 / rate).min(700.0);
            total += gauss(b.ln() - span, b.ln(), 0.25, f);
        } else {
            total += gauss(a.ln(), b.ln(), 0.25, f);
        }
    }
    total
}

fn rhs(p: &HardyProbe) -> f64 {
    let e = p.kappa + p.theta * p.gamma;
    p.pieces(2.0 * p.r)
        .iter()
        .filter(|(_, _, v)| *v > 0.0)
        .map(|&(a, b, v)| v.powf(p.gamma) * power_integral(a, b, e))
        .sum()
}

/// Both sides of the inequality, their ratio and the constructive constant.
pub fn hardy_check(p: &HardyProbe) -> Result<InequalityReport> {
    p.validate()?;
    let (l, r) = (lhs(p), rhs(p));
    let ratio = if l == 0.0 && r == 0.0 { 0.0 } else { super::ratio(l, r) };
    let label = format!("kappa={} gamma={} theta={} R={}", p.kappa, p.gamma, p.theta, p.r);
    let mut rep = InequalityReport::new("hardy", vec![SampleRow { label, lhs: l, rhs: r, ratio }], Extreme::Max);
    rep.bound = Some(hardy_constant(p.kappa, p.gamma, p.theta));
    Ok(rep)
}
