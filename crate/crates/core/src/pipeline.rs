//! End-to-end variable-index run: coefficients over the ζ-grid, the Beltrami
//! map `χ`, the similarity solve for `W = e^s f` on the χ-grid, assembly of
//! `Z`, and recovery of `φ` with its eikonal residual.
//!
//! The χ-grid is the same rectangle as the ζ-grid. `κ` at a χ-node is taken
//! from the coefficient chain at `χ⁻¹` of that node, so no interpolation of
//! `κ` is involved.

use num_complex::Complex64;

use crate::analytic::AnalyticFunction;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{core_nodes, interpolate, wirtinger_field, Grid, Window};
use crate::quasiconformal::{solve_beltrami, BeltramiOptions, QuasiconformalMap};
use crate::refraction::{CoefficientField, CoefficientPoint, Convention, RefractionField};
use crate::similarity::{
    assemble_z, canonical_residual, coeffs_bc_field, integrate_phi, kappa_chi_bar, phi_wirtinger_variable,
    solve_similarity, PhiField, SimilarityOptions, SimilaritySolution,
};
use crate::wirtinger::{legendre_invert, WirtingerPair};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariableOptions {
    pub beltrami: BeltramiOptions,
    pub similarity: SimilarityOptions,
    pub convention: Convention,
    /// Relative mixed-partial defect above which φ is not integrated.
    pub exactness_tol: f64,
    /// φ at the base node (the window centre).
    pub base_value: Complex64,
    pub exec: Execution,
}

impl Default for VariableOptions {
    fn default() -> Self {
        Self {
            beltrami: BeltramiOptions::default(),
            similarity: SimilarityOptions::default(),
            convention: Convention::Rederived,
            exactness_tol: 1e-4,
            base_value: Complex64::new(0.0, 0.0),
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VariableIndexSolution {
    pub f: AnalyticFunction,
    pub zeta_grid: Grid,
    pub coefficients: CoefficientField,
    pub chi_map: QuasiconformalMap,
    /// Per χ-node: κ, `s`, `W`, `Z`.
    pub kappa: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub z_chi: Vec<Complex64>,
    pub similarity: SimilaritySolution,
    /// Largest relative gap between second- and fourth-order `κ_χ̄`.
    pub kappa_richardson: f64,
    pub canonical_residual: f64,
    /// ζ-nodes where φ was recovered.
    pub window: Window,
    /// Per ζ-node (inside the window): `z(ζ) = Z(χ(ζ))`, the Wirtinger pair
    /// of φ, and `N`.
    pub z: Vec<Option<Complex64>>,
    pub phi_pair: Vec<Option<WirtingerPair>>,
    pub n: Vec<f64>,
    pub phi: PhiField,
    /// `|4φ_zφ_z̄ - N²|` from differences of the recovered φ and z, at nodes
    /// two or more cells inside the window (`None` elsewhere).
    pub eikonal_residual: Vec<Option<f64>>,
}

impl VariableIndexSolution {
    pub fn max_eikonal_residual(&self) -> f64 {
        self.eikonal_residual.iter().flatten().fold(0.0, |a, b| a.max(*b))
    }

    pub fn elliptic_fraction(&self) -> f64 {
        self.coefficients.elliptic_fraction()
    }
}

fn coefficient_at(index: &RefractionField, zeta: Complex64, convention: Convention) -> Result<CoefficientPoint> {
    let jet = index.ell_zeta(zeta)?;
    let p = CoefficientPoint::compute(zeta, &jet, convention)?;
    if !p.moduli_ok {
        return Err(Error::ModulusBound {
            what: "kappa",
            value: p.kappa.map_or(f64::INFINITY, |k| k.norm()),
        });
    }
    Ok(p)
}

pub fn solve_variable(
    f: &AnalyticFunction,
    index: &RefractionField,
    grid: Grid,
    opts: &VariableOptions,
) -> Result<VariableIndexSolution> {
    let exec = opts.exec;
    let nodes = grid.nodes();
    let coefficients = CoefficientField::build(&nodes, index, opts.convention, exec)?;
    let mut sigma = Vec::with_capacity(grid.len());
    for p in &coefficients.points {
        match p {
            Some(p) if p.moduli_ok => sigma.push(p.sigma.unwrap_or_default()),
            Some(p) => {
                return Err(Error::ModulusBound {
                    what: "kappa",
                    value: p.kappa.map_or(f64::INFINITY, |k| k.norm()),
                })
            }
            None => return Err(Error::Degenerate("coefficient chain undefined on the grid")),
        }
    }
    let chi_map = solve_beltrami(&sigma, grid, &BeltramiOptions { exec, ..opts.beltrami })?;

    // κ on the χ-grid through the preimages of its nodes
    let kappa = exec
        .map(&nodes, |&x| {
            let zeta = chi_map.invert_extrapolated(x)?;
            coefficient_at(index, zeta, opts.convention)?
                .kappa
                .ok_or(Error::Degenerate("κ undefined"))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (kappa_cb, kappa_richardson) = kappa_chi_bar(&grid, &kappa, exec);
    let (b, c) = coeffs_bc_field(&kappa, &kappa_cb)?;

    let f_chi = exec
        .map(&nodes, |&x| f.eval(x))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let similarity = solve_similarity(&grid, &f_chi, &b, &c, &SimilarityOptions { exec, ..opts.similarity })?;
    let z_chi = assemble_z(&similarity.w, &kappa)?;
    let chi_core = core_nodes(&grid, opts.similarity.margin);
    let canonical = canonical_residual(&grid, &z_chi, &kappa, &chi_core, exec);
    let (dz_chi, _) = wirtinger_field(&grid, &z_chi, 4, exec);

    // ζ-window: outside both taper bands, with χ(ζ) inside the χ-core
    let margin = opts.beltrami.margin.max(opts.similarity.margin);
    let core_window = Window::core(&grid, margin).ok_or(Error::Invalid("grid too small for the taper".into()))?;
    let core_box = core_window.subgrid(&grid)?;
    let mut window = core_window;
    while window
        .indices(&grid)
        .iter()
        .any(|&k| !core_box.contains(chi_map.chi[k], 1e-12 * grid.cell()))
    {
        window = window
            .shrink(1)
            .ok_or(Error::Invalid("χ maps the ζ-core outside the χ-core".into()))?;
    }
    if window.width() < 8 || window.height() < 8 {
        return Err(Error::Invalid("recovery window below 8 nodes".into()));
    }

    let n: Vec<f64> = nodes
        .iter()
        .map(|&z| index.ell_zeta(z).map(|j| j.ell.exp()))
        .collect::<Result<_>>()?;
    let inside = window.indices(&grid);
    let per_node = exec.map(&inside, |&k| -> Result<(Complex64, WirtingerPair)> {
        let p = coefficients.points[k].as_ref().ok_or(Error::Degenerate("coefficient chain undefined"))?;
        let x = chi_map.chi[k];
        let zv = interpolate(&grid, &z_chi, x).0;
        let zc = interpolate(&grid, &dz_chi, x).0;
        let pair = phi_wirtinger_variable(
            nodes[k],
            zc,
            chi_map.chi_z[k],
            p.sigma.unwrap_or_default(),
            p.kappa.unwrap_or_default(),
            n[k],
        )?;
        Ok((zv, pair))
    });
    let mut z = vec![None; grid.len()];
    let mut phi_pair = vec![None; grid.len()];
    for (&k, r) in inside.iter().zip(per_node) {
        let (zv, pair) = r?;
        z[k] = Some(zv);
        phi_pair[k] = Some(pair);
    }
    let zero = Complex64::new(0.0, 0.0);
    let pz: Vec<Complex64> = phi_pair.iter().map(|p| p.map_or(zero, |p| p.d_zeta)).collect();
    let pzb: Vec<Complex64> = phi_pair.iter().map(|p| p.map_or(zero, |p| p.d_zeta_bar)).collect();
    let base = grid.index((window.i0 + window.i1) / 2, (window.j0 + window.j1) / 2);
    let phi = integrate_phi(&grid, window, &pz, &pzb, base, opts.base_value, opts.exactness_tol, exec)?;

    let eikonal_residual = eikonal_residual_window(&grid, window, &phi.phi, &z, &n, exec)?;

    Ok(VariableIndexSolution {
        f: f.clone(),
        zeta_grid: grid,
        coefficients,
        chi_map,
        kappa,
        s: similarity.s.clone(),
        w: similarity.w.clone(),
        z_chi,
        similarity,
        kappa_richardson,
        canonical_residual: canonical,
        window,
        z,
        phi_pair,
        n,
        phi,
        eikonal_residual,
    })
}

/// `|4φ_zφ_z̄ - N²|` from fourth-order differences of φ(ζ) and z(ζ) on the
/// window, at nodes two or more cells inside it; `None` elsewhere.
pub fn eikonal_residual_window(
    grid: &Grid,
    window: Window,
    phi: &[Option<Complex64>],
    z: &[Option<Complex64>],
    n: &[f64],
    exec: Execution,
) -> Result<Vec<Option<f64>>> {
    let zero = Complex64::new(0.0, 0.0);
    let inside = window.indices(grid);
    let sub = window.subgrid(grid)?;
    let phi_sub: Vec<Complex64> = inside.iter().map(|&k| phi[k].unwrap_or(zero)).collect();
    let z_sub: Vec<Complex64> = inside.iter().map(|&k| z[k].unwrap_or(zero)).collect();
    let (fz, fzb) = wirtinger_field(&sub, &phi_sub, 4, exec);
    let (zz, zzb) = wirtinger_field(&sub, &z_sub, 4, exec);
    let mut out = vec![None; grid.len()];
    let interior = Window::full(&sub).shrink(2);
    for (m, &k) in inside.iter().enumerate() {
        let (i, j) = sub.coords(m);
        if !interior.is_some_and(|w| w.contains(i, j)) {
            continue;
        }
        let r = legendre_invert(WirtingerPair::new(fz[m], fzb[m]), WirtingerPair::new(zz[m], zzb[m]))
            .map(|(a, b)| (4.0 * a * b - n[k] * n[k]).norm())
            .unwrap_or(f64::INFINITY);
        out[k] = Some(r);
    }
    Ok(out)
}
