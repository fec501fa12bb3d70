//! Similarity principle and the canonical-form parametrization.
//!
//! With `W = Z - κZ̄`, the canonical equation `Z_χ̄ = κ Z̄_χ̄` turns into
//! `W_χ̄ = B W + C W̄`, and every such `W` is `e^s f` with `f` analytic. Given
//! `f` and `κ` on a χ-grid, `s` solves `s_χ̄ = B + C W̄/W`, here by damped
//! Picard iteration through the periodic ∂̄-inverse. The φ-field of the
//! eikonal then follows pointwise and is integrated over the ζ-grid.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{core_nodes, l2, taper, wirtinger_field, Grid, Window};
use crate::quasiconformal::picard;
use crate::rays::{solve_ray, BBox, Line, RaySolution};
use crate::refraction::{coeffs_bc, MODULUS_SLACK};
use crate::regions::Category;
use crate::spectral::Spectral;
use crate::wirtinger::WirtingerPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityOptions {
    pub damping: f64,
    pub max_iter: usize,
    /// Relative update below which the iteration stops.
    pub update_tol: f64,
    /// Acceptance threshold for the W-equation residual.
    pub residual_tol: f64,
    /// Taper band for the right-hand side (fraction of each side).
    pub margin: f64,
    pub exec: Execution,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 200,
            update_tol: 1e-10,
            residual_tol: 1e-4,
            margin: 0.15,
            exec: Execution::default(),
        }
    }
}

/// `κ_χ̄` by fourth-order central differences, with the largest relative
/// gap to the second-order estimate as a Richardson-style accuracy check.
pub fn kappa_chi_bar(grid: &Grid, kappa: &[Complex64], exec: Execution) -> (Vec<Complex64>, f64) {
    // constant fields differentiate to exact zeros, not to rounding noise
    if kappa.iter().all(|k| *k == kappa[0]) {
        return (vec![Complex64::new(0.0, 0.0); kappa.len()], 0.0);
    }
    let (_, d4) = wirtinger_field(grid, kappa, 4, exec);
    let (_, d2) = wirtinger_field(grid, kappa, 2, exec);
    let scale = d4.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let gap = d4
        .iter()
        .zip(&d2)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let rel = if scale > 0.0 { gap / scale } else { 0.0 };
    (d4, rel)
}

/// `(B, C)` over a field.
pub fn coeffs_bc_field(
    kappa: &[Complex64],
    kappa_cb: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut b = Vec::with_capacity(kappa.len());
    let mut c = Vec::with_capacity(kappa.len());
    for (k, kc) in kappa.iter().zip(kappa_cb) {
        let (x, y) = coeffs_bc(*k, *kc)?;
        b.push(x);
        c.push(y);
    }
    Ok((b, c))
}

#[derive(Clone, Debug)]
pub struct SimilaritySolution {
    pub s: Vec<Complex64>,
    /// `W = e^s f`.
    pub w: Vec<Complex64>,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// `‖W_χ̄ - BW - CW̄‖₂/‖W‖₂` over the untapered core.
    pub residual: f64,
}

/// `‖W_χ̄ - BW - CW̄‖₂ / ‖W‖₂` on `nodes`, fourth-order differences.
pub fn w_equation_residual(
    grid: &Grid,
    w: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    nodes: &[usize],
    exec: Execution,
) -> f64 {
    let (_, wb) = wirtinger_field(grid, w, 4, exec);
    let r: Vec<Complex64> = (0..w.len()).map(|k| wb[k] - b[k] * w[k] - c[k] * w[k].conj()).collect();
    l2(&r, nodes) / l2(w, nodes)
}

pub fn solve_similarity(
    grid: &Grid,
    f: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    opts: &SimilarityOptions,
) -> Result<SimilaritySolution> {
    if let Some(node) = f.iter().position(|v| v.norm() == 0.0 || !v.is_finite()) {
        return Err(Error::ZeroOfF { node });
    }
    let exec = opts.exec;
    let t = taper(grid, opts.margin);
    let phase: Vec<Complex64> = f.iter().map(|v| v.conj() / v).collect();
    let sp = Spectral::new(*grid, exec);
    let pin = grid.center_index();
    let s0 = vec![Complex64::new(0.0, 0.0); grid.len()];
    let (s, iterations, history) = picard(s0, opts.damping, opts.update_tol, opts.max_iter, |s| {
        let g = exec.map_range(s.len(), |k| {
            let ratio = (s[k].conj() - s[k]).exp() * phase[k];
            t[k] * (b[k] + c[k] * ratio)
        });
        sp.dbar_inverse(&g, pin).0
    })?;
    let w: Vec<Complex64> = s.iter().zip(f).map(|(s, f)| s.exp() * f).collect();
    let core = core_nodes(grid, opts.margin);
    let residual = w_equation_residual(grid, &w, b, c, &core, exec);
    Ok(SimilaritySolution {
        s,
        w,
        iterations,
        history,
        residual,
    })
}

/// `Z = (W + κW̄)/(1 - |κ|²)` node by node.
pub fn assemble_z(w: &[Complex64], kappa: &[Complex64]) -> Result<Vec<Complex64>> {
    w.iter()
        .zip(kappa)
        .map(|(w, k)| {
            let m = k.norm_sqr();
            if m.sqrt() >= 1.0 - MODULUS_SLACK {
                return Err(Error::ModulusBound {
                    what: "kappa",
                    value: m.sqrt(),
                });
            }
            Ok((w + k * w.conj()) / (1.0 - m))
        })
        .collect()
}

/// `‖Z_χ̄ - κ Z̄_χ̄‖₂ / (‖Z_χ‖₂ + ‖Z_χ̄‖₂)` on `nodes`.
pub fn canonical_residual(
    grid: &Grid,
    z: &[Complex64],
    kappa: &[Complex64],
    nodes: &[usize],
    exec: Execution,
) -> f64 {
    let (zc, zcb) = wirtinger_field(grid, z, 4, exec);
    // Z̄_χ̄ = conj(Z_χ)
    let r: Vec<Complex64> = (0..z.len()).map(|k| zcb[k] - kappa[k] * zc[k].conj()).collect();
    l2(&r, nodes) / (l2(&zc, nodes) + l2(&zcb, nodes))
}

/// `(φ_ζ, φ_ζ̄)` from the canonical-form data at one node, with
/// `T = Z_χ χ_ζ`:
/// `φ_ζ = N/(2ζ) [(1 + ζ²κ̄) T + σ̄(κ + ζ²) T̄]`,
/// `φ_ζ̄ = N/(2ζ) [σ(1 + ζ²κ̄) T + (κ + ζ²) T̄]`.
pub fn phi_wirtinger_variable(
    zeta: Complex64,
    z_chi: Complex64,
    chi_zeta: Complex64,
    sigma: Complex64,
    kappa: Complex64,
    n: f64,
) -> Result<WirtingerPair> {
    if zeta.norm() == 0.0 {
        return Err(Error::ZeroParameter);
    }
    let t = z_chi * chi_zeta;
    let z2 = zeta * zeta;
    let pre = n / (2.0 * zeta);
    let p = (1.0 + z2 * kappa.conj()) * t;
    let q = (kappa + z2) * t.conj();
    Ok(WirtingerPair::new(pre * (p + sigma.conj() * q), pre * (sigma * p + q)))
}

#[derive(Clone, Debug)]
pub struct PhiField {
    pub window: Window,
    /// `φ` at every grid node inside the window (`None` outside).
    pub phi: Vec<Option<Complex64>>,
    /// Largest `|∂_ζ̄φ_ζ - ∂_ζφ_ζ̄|` relative to the second-derivative scale.
    pub mixed_defect: f64,
    /// Largest loop integral around single cells, and its cell.
    pub cell_loop_max: f64,
    pub worst_cell: (usize, usize),
    /// Largest loop integral around random sub-rectangles.
    pub random_loop_max: f64,
}

/// Interval integrals `∫_m^{m+1} g` (unit spacing) of a line of samples,
/// cubic Lagrange on interior intervals, one-sided cubic at the ends.
fn line_integrals(g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    (0..n - 1)
        .map(|m| {
            if n == 2 {
                0.5 * (g[0] + g[1])
            } else if n == 3 {
                let (a, b) = if m == 0 { (g[0], g[2]) } else { (g[2], g[0]) };
                (5.0 * a + 8.0 * g[1] - b) / 12.0
            } else if m == 0 {
                (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
            } else if m == n - 2 {
                (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4]) / 24.0
            } else {
                (-g[m - 1] + 13.0 * g[m] + 13.0 * g[m + 1] - g[m + 2]) / 24.0
            }
        })
        .collect()
}

/// Integrates `dφ = φ_ζ dζ + φ_ζ̄ dζ̄` over `window`: along the base row, then
/// up and down every column (a comb spanning tree). The mixed-partial
/// consistency is checked first and reported as `NotExact` above
/// `exactness_tol`; loop integrals are audited afterwards.
#[allow(clippy::too_many_arguments)]
pub fn integrate_phi(
    grid: &Grid,
    window: Window,
    phi_z: &[Complex64],
    phi_zb: &[Complex64],
    base: usize,
    base_value: Complex64,
    exactness_tol: f64,
    exec: Execution,
) -> Result<PhiField> {
    let (bi, bj) = grid.coords(base);
    if !window.contains(bi, bj) || window.width() < 4 || window.height() < 4 {
        return Err(Error::Invalid("base node outside the integration window".into()));
    }
    let i_unit = Complex64::new(0.0, 1.0);
    // mixed partials, differenced inside the window only
    let sub = window.subgrid(grid)?;
    let idx = window.indices(grid);
    let take = |v: &[Complex64]| idx.iter().map(|&k| v[k]).collect::<Vec<_>>();
    let (_, d1) = wirtinger_field(&sub, &take(phi_z), 4, exec);
    let (d2, _) = wirtinger_field(&sub, &take(phi_zb), 4, exec);
    let mut scale: f64 = 0.0;
    let mut worst = (0.0, (bi, bj));
    for m in 0..idx.len() {
        scale = scale.max(d1[m].norm()).max(d2[m].norm());
        let defect = (d1[m] - d2[m]).norm();
        if defect > worst.0 {
            worst = (defect, grid.coords(idx[m]));
        }
    }
    let mixed_defect = worst.0 / scale.max(1.0);
    if mixed_defect > exactness_tol {
        return Err(Error::NotExact {
            cell: worst.1,
            defect: mixed_defect,
        });
    }
    let gx = |k: usize| (phi_z[k] + phi_zb[k]) * grid.hx;
    let gy = |k: usize| (phi_z[k] - phi_zb[k]) * i_unit * grid.hy;
    let mut phi = vec![None; grid.len()];
    // base row
    let row: Vec<Complex64> = (window.i0..=window.i1).map(|i| gx(grid.index(i, bj))).collect();
    let ri = line_integrals(&row);
    let mut row_vals = vec![Complex64::new(0.0, 0.0); window.width()];
    let b_local = bi - window.i0;
    row_vals[b_local] = base_value;
    for m in b_local + 1..window.width() {
        row_vals[m] = row_vals[m - 1] + ri[m - 1];
    }
    for m in (0..b_local).rev() {
        row_vals[m] = row_vals[m + 1] - ri[m];
    }
    // columns
    let b_row = bj - window.j0;
    let cols = exec.map_range(window.width(), |m| {
        let i = window.i0 + m;
        let col: Vec<Complex64> = (window.j0..=window.j1).map(|j| gy(grid.index(i, j))).collect();
        let ci = line_integrals(&col);
        let mut v = vec![Complex64::new(0.0, 0.0); window.height()];
        v[b_row] = row_vals[m];
        for r in b_row + 1..window.height() {
            v[r] = v[r - 1] + ci[r - 1];
        }
        for r in (0..b_row).rev() {
            v[r] = v[r + 1] - ci[r];
        }
        v
    });
    for (m, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            phi[grid.index(window.i0 + m, window.j0 + r)] = Some(*v);
        }
    }
    // loop audits: every side from the same cubic interval rule
    let rows: Vec<Vec<Complex64>> = (window.j0..=window.j1)
        .map(|j| line_integrals(&(window.i0..=window.i1).map(|i| gx(grid.index(i, j))).collect::<Vec<_>>()))
        .collect();
    let cols: Vec<Vec<Complex64>> = (window.i0..=window.i1)
        .map(|i| line_integrals(&(window.j0..=window.j1).map(|j| gy(grid.index(i, j))).collect::<Vec<_>>()))
        .collect();
    let mut cell_worst = (0.0, (window.i0, window.j0));
    for j in 0..window.height() - 1 {
        for i in 0..window.width() - 1 {
            let l = (rows[j][i] + cols[i + 1][j] - rows[j + 1][i] - cols[i][j]).norm();
            if l > cell_worst.0 {
                cell_worst = (l, (window.i0 + i, window.j0 + j));
            }
        }
    }
    let span = |v: &[Complex64], a: usize, b: usize| -> Complex64 { v[a..b].iter().sum() };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut random_loop_max: f64 = 0.0;
    let (w, h) = (window.width() - 1, window.height() - 1);
    for _ in 0..64 {
        let i0 = rng.random_range(0..w);
        let i1 = rng.random_range(i0 + 1..=w);
        let j0 = rng.random_range(0..h);
        let j1 = rng.random_range(j0 + 1..=h);
        let acc = span(&rows[j0], i0, i1) + span(&cols[i1], j0, j1)
            - span(&rows[j1], i0, i1)
            - span(&cols[i0], j0, j1);
        random_loop_max = random_loop_max.max(acc.norm());
    }
    Ok(PhiField {
        window,
        phi,
        mixed_defect,
        cell_loop_max: cell_worst.0,
        worst_cell: cell_worst.1,
        random_loop_max,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformedSample {
    pub chi: Complex64,
    pub category: Category,
    /// `Z` for shadow points.
    pub z: Option<Complex64>,
    /// `{Z : Z - κZ̄ = W}` for light points.
    pub line: Option<Line>,
}

/// Classification of a χ-plane point by the degenerate deformed-ray system
/// `Z - κZ̄ = W`, `W = e^s f`: rank one when `||κ| - 1| < rank_tol`, and then a
/// light segment iff `W + κW̄ = 0` (within `consistency_tol`).
pub fn deformed_classify(
    chi: Complex64,
    kappa: Complex64,
    w: Complex64,
    rank_tol: f64,
    consistency_tol: f64,
) -> DeformedSample {
    match solve_ray(kappa, w, rank_tol, consistency_tol) {
        RaySolution::Point(z) => DeformedSample {
            chi,
            category: Category::Shadow,
            z: Some(z),
            line: None,
        },
        RaySolution::Line(l) => DeformedSample {
            chi,
            category: Category::LightSegment,
            z: None,
            line: Some(l),
        },
        RaySolution::Inconsistent { .. } => DeformedSample {
            chi,
            category: Category::MapsToInfinity,
            z: None,
            line: None,
        },
    }
}

/// Samples a light line inside `bbox` and pulls each sample back through
/// `inverse` (typically `χ⁻¹`), dropping points outside its image.
pub fn pullback_polyline<F>(line: &Line, bbox: &BBox, samples: usize, inverse: F) -> Vec<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let Some((a, b)) = line.clip(bbox) else {
        return Vec::new();
    };
    let n = samples.max(2);
    (0..n)
        .filter_map(|k| inverse(a + (b - a) * (k as f64 / (n - 1) as f64)).ok())
        .collect()
}
