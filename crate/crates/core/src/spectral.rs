//! Periodic FFT operators on a [`Grid`]: the Beurling-type transform
//! `S = ∂ ∂̄⁻¹` and the ∂̄-inverse split into an affine and a periodic part.
//!
//! The grid is treated as one period (`nx·hx` by `ny·hy`), so inputs should be
//! tapered to zero near the edges (see [`crate::grid::taper`]); constant
//! inputs are exact.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec::Execution;
use crate::grid::Grid;

pub struct Spectral {
    grid: Grid,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// `½ i (kx + i ky)`, the ∂̄ symbol, row-major.
    dbar: Vec<Complex64>,
    exec: Execution,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let period = n as f64 * h;
    (0..n)
        .map(|m| {
            let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * std::f64::consts::PI * s / period
        })
        .collect()
}

impl Spectral {
    pub fn new(grid: Grid, exec: Execution) -> Self {
        let mut planner = FftPlanner::new();
        let kx = wavenumbers(grid.nx, grid.hx);
        let ky = wavenumbers(grid.ny, grid.hy);
        let dbar = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                0.5 * Complex64::new(0.0, 1.0) * Complex64::new(kx[i], ky[j])
            })
            .collect();
        Self {
            grid,
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
            dbar,
            exec,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (fx, fy) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        self.exec.for_each_chunk(data, nx, |_, row| fx.process(row));
        let mut t = transpose(data, nx, ny);
        self.exec.for_each_chunk(&mut t, ny, |_, col| fy.process(col));
        let back = transpose(&t, ny, nx);
        data.copy_from_slice(&back);
        if !forward {
            let s = 1.0 / (nx * ny) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true)
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false)
    }

    /// `S h`: the multiplier `(kx - i ky)/(kx + i ky)`, zero on the mean.
    pub fn beurling(&self, h: &[Complex64]) -> Vec<Complex64> {
        let mut buf = h.to_vec();
        self.forward(&mut buf);
        buf[0] = Complex64::new(0.0, 0.0);
        for (v, d) in buf.iter_mut().zip(&self.dbar).skip(1) {
            let k = *d * Complex64::new(0.0, -2.0); // kx + i ky
            *v *= k.conj() / k;
        }
        self.inverse(&mut buf);
        buf
    }

    /// `u` with `u_ζ̄ = g`, `u(ζ₀) = 0` at `pin`: the mean of `g` goes to the
    /// affine part `mean·(ζ̄ - ζ̄₀)`, the rest to a periodic part. Returns
    /// `(u, u_ζ)` with `u_ζ = S g` computed spectrally.
    pub fn dbar_inverse(&self, g: &[Complex64], pin: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf = g.to_vec();
        self.forward(&mut buf);
        let mean = buf[0] / self.grid.len() as f64;
        buf[0] = Complex64::new(0.0, 0.0);
        let mut dz = buf.clone();
        for k in 1..buf.len() {
            let d = self.dbar[k];
            buf[k] /= d;
            let kk = d * Complex64::new(0.0, -2.0);
            dz[k] *= kk.conj() / kk;
        }
        self.inverse(&mut buf);
        self.inverse(&mut dz);
        let (pi, pj) = self.grid.coords(pin);
        let z0 = self.grid.node(pi, pj);
        let shift = buf[pin];
        let u = (0..buf.len())
            .map(|k| {
                let (i, j) = self.grid.coords(k);
                buf[k] - shift + mean * (self.grid.node(i, j) - z0).conj()
            })
            .collect();
        (u, dz)
    }
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for j in 0..ny {
        for i in 0..nx {
            out[i * ny + j] = data[j * nx + i];
        }
    }
    out
}
