//! Beltrami equation `χ_ζ̄ = σ χ_ζ` on a rectangle.
//!
//! Writing `χ = ζ + ψ` with `h = ψ_ζ̄`, the equation becomes the fixed point
//! `h = σ (1 + S h)`, `S` the periodic Beurling transform; since `S` is an
//! L² isometry on mean-free fields the map is a contraction for `sup|σ| < 1`.
//! `σ` is tapered to zero near the edges so the periodization is harmless.
//! The solution is pinned by `χ(ζ₀) = ζ₀` at the centre node, and the mean of
//! `χ_ζ` is one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{interpolate, l2, taper, wirtinger_field, Grid};
use crate::spectral::Spectral;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeltramiOptions {
    /// Accept when the relative fixed-point update drops below this.
    pub update_tol: f64,
    /// Acceptance threshold for the finite-difference residual.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Largest admissible `sup|σ|`.
    pub k_max: f64,
    /// Taper band as a fraction of each side (0 disables the taper).
    pub margin: f64,
    /// Relaxation factor in `(0, 1]`.
    pub damping: f64,
    pub exec: Execution,
}

impl Default for BeltramiOptions {
    fn default() -> Self {
        Self {
            update_tol: 1e-12,
            residual_tol: 1e-4,
            max_iter: 500,
            k_max: 0.9,
            margin: 0.15,
            damping: 1.0,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuasiconformalMap {
    pub grid: Grid,
    pub chi: Vec<Complex64>,
    /// `χ_ζ` and `χ_ζ̄` from the spectral solve.
    pub chi_z: Vec<Complex64>,
    pub chi_zbar: Vec<Complex64>,
    /// The tapered coefficient actually solved for.
    pub sigma: Vec<Complex64>,
    pub margin: f64,
    /// `‖χ_ζ̄ - σχ_ζ‖₂/‖χ_ζ‖₂` with fourth-order differences.
    pub residual_l2: f64,
    /// Per-node `|χ_ζ̄ - σχ_ζ|` with the same differences.
    pub local_residual: Vec<f64>,
    /// `min(|χ_ζ|² - |χ_ζ̄|²)` over the nodes.
    pub jacobian_min: f64,
    pub iterations: usize,
    /// Relative update per iteration.
    pub history: Vec<f64>,
    pin: usize,
    affine: (Complex64, Complex64),
}

fn rel_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// Fixed point `h = w (1 + S h)`-type iteration shared with the similarity
/// solver: `step(h)` returns the undamped update.
pub(crate) fn picard<F>(
    h0: Vec<Complex64>,
    damping: f64,
    update_tol: f64,
    max_iter: usize,
    mut step: F,
) -> Result<(Vec<Complex64>, usize, Vec<f64>)>
where
    F: FnMut(&[Complex64]) -> Vec<Complex64>,
{
    let mut h = h0;
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    for it in 1..=max_iter {
        let next = step(&h);
        let upd = rel_norm(&next, &h);
        if damping < 1.0 {
            for (a, b) in h.iter_mut().zip(&next) {
                *a = (1.0 - damping) * *a + damping * b;
            }
        } else {
            h = next;
        }
        history.push(upd);
        if !upd.is_finite() || (it > 5 && upd > 1e3 * best.max(1e-300) && upd > 1.0) {
            return Err(Error::NoConvergence {
                iterations: it,
                update: upd,
            });
        }
        best = best.min(upd);
        if upd < update_tol {
            return Ok((h, it, history));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        update: *history.last().unwrap_or(&f64::INFINITY),
    })
}

/// `‖F_ζ̄ - σF_ζ‖/‖F_ζ‖` and the per-node residual with difference `order`.
pub fn beltrami_residual(
    grid: &Grid,
    chi: &[Complex64],
    sigma: &[Complex64],
    order: usize,
    exec: Execution,
) -> (f64, Vec<f64>) {
    let (dz, dzb) = wirtinger_field(grid, chi, order, exec);
    let local: Vec<Complex64> = (0..grid.len()).map(|k| dzb[k] - sigma[k] * dz[k]).collect();
    let all: Vec<usize> = (0..grid.len()).collect();
    let r = l2(&local, &all) / l2(&dz, &all);
    (r, local.iter().map(|v| v.norm()).collect())
}

pub fn solve_beltrami(sigma: &[Complex64], grid: Grid, opts: &BeltramiOptions) -> Result<QuasiconformalMap> {
    if sigma.len() != grid.len() {
        return Err(Error::Invalid("σ field does not match the grid".into()));
    }
    let sup = sigma.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if !(sup <= opts.k_max) || sup >= 1.0 {
        return Err(Error::ModulusBound {
            what: "sigma",
            value: sup,
        });
    }
    let exec = opts.exec;
    let w = taper(&grid, opts.margin);
    let sig: Vec<Complex64> = sigma.iter().zip(&w).map(|(s, t)| s * *t).collect();
    let sp = Spectral::new(grid, exec);
    let (h, iterations, history) = picard(sig.clone(), opts.damping, opts.update_tol, opts.max_iter, |h| {
        let s = sp.beurling(h);
        exec.map_range(h.len(), |k| sig[k] * (1.0 + s[k]))
    })?;
    let pin = grid.center_index();
    let (psi, psi_z) = sp.dbar_inverse(&h, pin);
    let nodes = grid.nodes();
    let chi: Vec<Complex64> = nodes.iter().zip(&psi).map(|(z, p)| z + p).collect();
    let chi_z: Vec<Complex64> = psi_z.iter().map(|p| 1.0 + p).collect();
    let jacobian_min = chi_z
        .iter()
        .zip(&h)
        .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    let (residual_l2, local_residual) = beltrami_residual(&grid, &chi, &sig, 4, exec);
    let n = grid.len() as f64;
    let affine = (chi_z.iter().sum::<Complex64>() / n, h.iter().sum::<Complex64>() / n);
    Ok(QuasiconformalMap {
        grid,
        chi,
        chi_z,
        chi_zbar: h,
        sigma: sig,
        margin: opts.margin,
        residual_l2,
        local_residual,
        jacobian_min,
        iterations,
        history,
        pin,
        affine,
    })
}

impl QuasiconformalMap {
    /// Residual against the stored coefficient with sixth-order differences,
    /// independent of the solver's own stencil.
    pub fn residual(&self) -> f64 {
        beltrami_residual(&self.grid, &self.chi, &self.sigma, 6, Execution::default()).0
    }

    /// Residual against a raw coefficient, tapered the same way as the solve.
    pub fn residual_against(&self, sigma: &[Complex64]) -> f64 {
        let w = taper(&self.grid, self.margin);
        let s: Vec<Complex64> = sigma.iter().zip(&w).map(|(a, b)| a * *b).collect();
        beltrami_residual(&self.grid, &self.chi, &s, 6, Execution::default()).0
    }

    pub fn accepted(&self, residual_tol: f64) -> bool {
        self.residual_l2 < residual_tol && self.jacobian_min > 0.0
    }

    pub fn pin(&self) -> Complex64 {
        let (i, j) = self.grid.coords(self.pin);
        self.grid.node(i, j)
    }

    /// `(χ, χ_ζ, χ_ζ̄)` of the interpolant at `ζ`.
    pub fn eval(&self, zeta: Complex64) -> (Complex64, Complex64, Complex64) {
        let (v, vx, vy) = interpolate(&self.grid, &self.chi, zeta);
        let i = Complex64::new(0.0, 1.0);
        (v, 0.5 * (vx - i * vy), 0.5 * (vx + i * vy))
    }

    fn newton(&self, target: Complex64, mut zeta: Complex64) -> Option<Complex64> {
        let scale = target.norm().max(self.grid.cell());
        for _ in 0..60 {
            let (v, dz, dzb) = self.eval(zeta);
            let r = target - v;
            if r.norm() <= 1e-13 * scale {
                return Some(zeta);
            }
            let j = dz.norm_sqr() - dzb.norm_sqr();
            if !(j > 0.0) {
                return None;
            }
            let step = (dz.conj() * r - dzb * r.conj()) / j;
            // keep the iterate near the lattice
            let lim = 4.0 * self.grid.cell();
            zeta += if step.norm() > lim { step * (lim / step.norm()) } else { step };
        }
        None
    }

    /// `ζ` with `χ(ζ) = target`, by Newton on the cubic interpolant seeded
    /// from the mean affine part of `χ` (nearest node as fallback).
    pub fn invert(&self, target: Complex64) -> Result<Complex64> {
        match self.invert_extrapolated(target) {
            Ok(z) if self.grid.contains(z, 1e-9 * self.grid.cell()) => Ok(z),
            _ => Err(Error::OutsideImage { chi: target }),
        }
    }

    /// As [`invert`](Self::invert), but accepts preimages slightly outside
    /// the grid (the interpolant is extrapolated from the edge cells).
    pub fn invert_extrapolated(&self, target: Complex64) -> Result<Complex64> {
        let (a, b) = self.affine;
        let z0 = self.pin();
        let w = target - z0;
        let seed = z0 + (a.conj() * w - b * w.conj()) / (a.norm_sqr() - b.norm_sqr());
        let found = self.newton(target, seed).or_else(|| {
            let k = (0..self.chi.len())
                .min_by(|&p, &q| (self.chi[p] - target).norm().total_cmp(&(self.chi[q] - target).norm()))?;
            let (i, j) = self.grid.coords(k);
            self.newton(target, self.grid.node(i, j))
        });
        found.ok_or(Error::OutsideImage { chi: target })
    }
}
