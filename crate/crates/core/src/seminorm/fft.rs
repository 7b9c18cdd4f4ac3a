//! Two-dimensional linear convolution through zero-padded FFTs.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn next_fast(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

pub(crate) struct Fft2 {
    pub lx: usize,
    pub ly: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.lx, self.ly)
    }
}

impl Fft2 {
    /// Plan for linear convolution of data of size `n` with kernels of
    /// half-width `r` (offsets `-r..=r`), free of wrap-around.
    pub fn for_convolution(n: [usize; 2], r: [usize; 2]) -> Self {
        let lx = next_fast(n[0] + r[0]);
        let ly = if n[1] <= 1 && r[1] == 0 { 1 } else { next_fast(n[1] + r[1]) };
        let mut planner = FftPlanner::new();
        Fft2 {
            lx,
            ly,
            fx: planner.plan_fft_forward(lx),
            ix: planner.plan_fft_inverse(lx),
            fy: planner.plan_fft_forward(ly),
            iy: planner.plan_fft_inverse(ly),
        }
    }

    pub fn len(&self) -> usize {
        self.lx * self.ly
    }

    fn pass(&self, buf: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        let (lx, ly) = (self.lx, self.ly);
        buf.par_chunks_mut(lx).for_each(|r| row.process(r));
        if ly > 1 {
            let mut t = vec![Complex64::default(); lx * ly];
            t.par_chunks_mut(ly).enumerate().for_each(|(i, c)| {
                for (j, v) in c.iter_mut().enumerate() {
                    *v = buf[j * lx + i];
                }
                col.process(c);
            });
            buf.par_chunks_mut(lx).enumerate().for_each(|(j, r)| {
                for (i, v) in r.iter_mut().enumerate() {
                    *v = t[i * ly + j];
                }
            });
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.pass(buf, &self.fx, &self.fy);
    }

    /// Unnormalized inverse.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.pass(buf, &self.ix, &self.iy);
    }

    /// Spectrum of a kernel given on offsets within `r`.
    pub fn kernel_spectrum<F: Fn(i64, i64) -> f64 + Sync>(&self, r: [usize; 2], f: F) -> Vec<Complex64> {
        let (lx, ly) = (self.lx, self.ly);
        let mut buf = vec![Complex64::default(); lx * ly];
        let (rx, ry) = (r[0] as i64, r[1] as i64);
        buf.par_chunks_mut(lx).enumerate().for_each(|(j, row)| {
            let d2 = if (j as i64) <= ry { j as i64 } else { j as i64 - ly as i64 };
            if d2.abs() > ry {
                return;
            }
            for (i, v) in row.iter_mut().enumerate() {
                let d1 = if (i as i64) <= rx { i as i64 } else { i as i64 - lx as i64 };
                if d1.abs() <= rx {
                    v.re = f(d1, d2);
                }
            }
        });
        self.forward(&mut buf);
        buf
    }

    /// Linear convolution y = k * x, data of size `n` laid out row-major.
    pub fn convolve(&self, spectrum: &[Complex64], n: [usize; 2], x: &[f64]) -> Vec<f64> {
        let (lx, ly) = (self.lx, self.ly);
        let mut buf = vec![Complex64::default(); lx * ly];
        for j in 0..n[1] {
            for i in 0..n[0] {
                buf[j * lx + i].re = x[j * n[0] + i];
            }
        }
        self.forward(&mut buf);
        buf.par_iter_mut().zip(spectrum.par_iter()).for_each(|(b, k)| *b *= k);
        self.inverse(&mut buf);
        let norm = 1.0 / (lx * ly) as f64;
        let mut y = vec![0.0; n[0] * n[1]];
        for j in 0..n[1] {
            for i in 0..n[0] {
                y[j * n[0] + i] = buf[j * lx + i].re * norm;
            }
        }
        y
    }
}
