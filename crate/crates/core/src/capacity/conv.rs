//! Translation-invariant kernel application on a regular lattice through
//! zero-padded real FFTs. Lines that are entirely padding are skipped.

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

type C = Complex64;
const TILE: usize = 16;

pub(crate) struct Convolver {
    shape: Vec<usize>,
    pad: Vec<usize>,
    /// Half spectrum shape: `pad` with the last axis `pad/2 + 1`.
    half: Vec<usize>,
    kernel_hat: Vec<C>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

fn fast_size(min: usize) -> usize {
    let mut n = min.max(2);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 && n % 2 == 0 {
            return n;
        }
        n += 1;
    }
}

/// True when the row-major index `flat` over `sh` has every coordinate below `lim`.
fn within(mut flat: usize, sh: &[usize], lim: &[usize]) -> bool {
    for k in (0..sh.len()).rev() {
        if flat % sh[k] >= lim[k] {
            return false;
        }
        flat /= sh[k];
    }
    true
}

/// Maps a line index over `sh` (all coordinates below `lim`) to the line index over `lim`.
fn compact(mut flat: usize, sh: &[usize], lim: &[usize]) -> usize {
    let mut out = 0;
    let mut stride = 1;
    for k in (0..sh.len()).rev() {
        out += (flat % sh[k]) * stride;
        stride *= lim[k];
        flat /= sh[k];
    }
    out
}

fn for_chunks<T: Send>(buf: &mut [T], block: usize, f: impl Fn(usize, &mut [T]) + Sync + Send) {
    #[cfg(feature = "parallel")]
    buf.par_chunks_mut(block).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    buf.chunks_mut(block).enumerate().for_each(|(i, c)| f(i, c));
}

/// Complex FFT along `axis` of the array `buf` with shape `sh`, restricted to
/// lines whose leading coordinates (axes before `axis`) are below `lim`.
fn axis_fft(buf: &mut [C], sh: &[usize], axis: usize, lim: &[usize], plan: &Arc<dyn Fft<f64>>) {
    let len = sh[axis];
    let inner: usize = sh[axis + 1..].iter().product();
    let lead = &sh[..axis];
    let lead_lim = &lim[..axis];
    for_chunks(buf, len * inner, |outer, chunk| {
        if !within(outer, lead, lead_lim) {
            return;
        }
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        if inner == 1 {
            plan.process_with_scratch(chunk, &mut scratch);
            return;
        }
        let mut tile = vec![C::new(0.0, 0.0); TILE * len];
        let mut i0 = 0;
        while i0 < inner {
            let b = TILE.min(inner - i0);
            for k in 0..len {
                let row = &chunk[k * inner + i0..k * inner + i0 + b];
                for (j, v) in row.iter().enumerate() {
                    tile[j * len + k] = *v;
                }
            }
            plan.process_with_scratch(&mut tile[..b * len], &mut scratch);
            for k in 0..len {
                let row = &mut chunk[k * inner + i0..k * inner + i0 + b];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = tile[j * len + k];
                }
            }
            i0 += b;
        }
    });
}

impl Convolver {
    /// `kernel(d)` gives the weight coupling source `j` to target `j + d`,
    /// for `|d_i| < shape_i`.
    pub fn new(shape: &[usize], kernel: impl Fn(&[i64]) -> f64 + Sync) -> Self {
        let dim = shape.len();
        let pad: Vec<usize> = shape.iter().map(|&n| fast_size(2 * n - 1)).collect();
        let mut half = pad.clone();
        half[dim - 1] = pad[dim - 1] / 2 + 1;
        let mut planner = FftPlanner::new();
        let fwd = pad[..dim - 1].iter().map(|&p| planner.plan_fft_forward(p)).collect();
        let inv = pad[..dim - 1].iter().map(|&p| planner.plan_fft_inverse(p)).collect();
        let mut rp = RealFftPlanner::<f64>::new();
        let r2c = rp.plan_fft_forward(pad[dim - 1]);
        let c2r = rp.plan_fft_inverse(pad[dim - 1]);
        let mut c = Convolver { shape: shape.to_vec(), pad: pad.clone(), half, kernel_hat: Vec::new(), r2c, c2r, fwd, inv };

        // Kernel laid out with wrap-around offsets; entries with |d_i| ≥ n_i stay zero.
        let total: usize = pad.iter().product();
        let mut table = vec![0.0; total];
        let last = pad[dim - 1];
        for_chunks(&mut table, last, |line, row| {
            let mut d = vec![0i64; dim];
            let mut f = line;
            for k in (0..dim - 1).rev() {
                let i = (f % pad[k]) as i64;
                f /= pad[k];
                d[k] = if i < shape[k] as i64 { i } else { i - pad[k] as i64 };
                if d[k].unsigned_abs() as usize >= shape[k] {
                    return;
                }
            }
            for (i, v) in row.iter_mut().enumerate() {
                let i = i as i64;
                let dl = if i < shape[dim - 1] as i64 { i } else { i - last as i64 };
                if (dl.unsigned_abs() as usize) < shape[dim - 1] {
                    d[dim - 1] = dl;
                    *v = kernel(&d);
                }
            }
        });
        c.kernel_hat = c.spectrum(&table, &pad);
        c
    }

    /// Half spectrum of the real array `src` with shape `lim`, zero-padded to `pad`.
    fn spectrum(&self, src: &[f64], lim: &[usize]) -> Vec<C> {
        let dim = self.pad.len();
        let hl = self.half[dim - 1];
        let pl = self.pad[dim - 1];
        let nl = lim[dim - 1];
        let mut spec = vec![C::new(0.0, 0.0); self.half.iter().product()];
        let lead = &self.half[..dim - 1];
        let lead_lim = &lim[..dim - 1];
        for_chunks(&mut spec, hl, |line, out| {
            if !within(line, lead, lead_lim) {
                return;
            }
            let s = compact(line, lead, lead_lim) * nl;
            let mut input = vec![0.0; pl];
            input[..nl].copy_from_slice(&src[s..s + nl]);
            let mut scratch = self.r2c.make_scratch_vec();
            self.r2c.process_with_scratch(&mut input, out, &mut scratch).expect("fft sizes match");
        });
        for axis in (0..dim - 1).rev() {
            axis_fft(&mut spec, &self.half, axis, lim, &self.fwd[axis]);
        }
        spec
    }

    fn apply(&self, src: &[f64], adjoint: bool) -> Vec<f64> {
        let dim = self.pad.len();
        let mut spec = self.spectrum(src, &self.shape);
        let kh = &self.kernel_hat;
        let hl = self.half[dim - 1];
        for_chunks(&mut spec, hl, |line, row| {
            let k = &kh[line * hl..(line + 1) * hl];
            for (v, w) in row.iter_mut().zip(k) {
                *v *= if adjoint { w.conj() } else { *w };
            }
        });
        for axis in 0..dim - 1 {
            axis_fft(&mut spec, &self.half, axis, &self.shape, &self.inv[axis]);
        }
        let n: usize = self.shape.iter().product();
        let nl = self.shape[dim - 1];
        let pl = self.pad[dim - 1];
        let scale = 1.0 / self.pad.iter().product::<usize>() as f64;
        let mut out = vec![0.0; n];
        let lead_lim = &self.shape[..dim - 1];
        let lead = &self.half[..dim - 1];
        let lead_strides: Vec<usize> = (0..dim - 1).map(|k| lead[k + 1..].iter().product()).collect();
        let spec = &spec;
        for_chunks(&mut out, nl, |line, row| {
            // Line index over the compact shape -> line index over the spectrum.
            let mut f = line;
            let mut sline = 0;
            for k in (0..dim - 1).rev() {
                sline += (f % lead_lim[k]) * lead_strides[k];
                f /= lead_lim[k];
            }
            let mut buf = spec[sline * hl..(sline + 1) * hl].to_vec();
            buf[0].im = 0.0;
            buf[hl - 1].im = 0.0;
            let mut real = vec![0.0; pl];
            let mut scratch = self.c2r.make_scratch_vec();
            self.c2r.process_with_scratch(&mut buf, &mut real, &mut scratch).expect("fft sizes match");
            for (o, r) in row.iter_mut().zip(&real) {
                *o = r * scale;
            }
        });
        out
    }

    /// `out[e] = Σ_j K(e - j) src[j]`.
    pub fn forward(&self, src: &[f64]) -> Vec<f64> {
        self.apply(src, false)
    }

    /// `out[j] = Σ_e K(e - j) src[e]`.
    pub fn adjoint(&self, src: &[f64]) -> Vec<f64> {
        self.apply(src, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(shape: &[usize]) {
        let dim = shape.len();
        let kern = |d: &[i64]| {
            let q: f64 = d.iter().enumerate().map(|(i, v)| ((i + 1) * (v * v) as usize) as f64).sum();
            1.0 / (1.0 + q + 0.3 * d[dim - 1] as f64 + 5.0)
        };
        let c = Convolver::new(shape, kern);
        let n: usize = shape.iter().product();
        let src: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
        let unr = |mut f: usize| {
            let mut v = vec![0i64; dim];
            for k in (0..dim).rev() {
                v[k] = (f % shape[k]) as i64;
                f /= shape[k];
            }
            v
        };
        let fw = c.forward(&src);
        let ad = c.adjoint(&src);
        for e in 0..n {
            let (mut a, mut b) = (0.0, 0.0);
            for j in 0..n {
                let (ie, ij) = (unr(e), unr(j));
                let d: Vec<i64> = (0..dim).map(|k| ie[k] - ij[k]).collect();
                let dn: Vec<i64> = d.iter().map(|v| -v).collect();
                a += kern(&d) * src[j];
                b += kern(&dn) * src[j];
            }
            assert!((fw[e] - a).abs() < 1e-12, "{} {}", fw[e], a);
            assert!((ad[e] - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_sum() {
        check(&[7]);
        check(&[4, 6]);
        check(&[3, 4, 5]);
        check(&[5, 1, 2]);
    }
}
