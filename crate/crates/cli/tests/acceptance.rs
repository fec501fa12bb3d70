//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every derived quantity is checked against an oracle computed here rather
//! than inside the library: finite differences of the sampled maps with an
//! explicit chain rule, closed forms, or exact identities.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use complex_eikonal::constant::ParametrizedEikonal;
use complex_eikonal::grid::core_nodes;
use complex_eikonal::refraction::{coefficient_oracle, BiholomorphicReduction, CoefficientField};
use complex_eikonal::similarity::{
    assemble_z, canonical_residual, coeffs_bc_field, kappa_chi_bar, solve_similarity, SimilarityOptions,
};
use complex_eikonal::{
    quadratic_closed_form, solve_beltrami, solve_variable, AnalyticFunction, BeltramiOptions, BoundaryProfile,
    Complex64, Convention, EllProfile, Execution, Grid, RefractionField, RegionAnalyzer, SPhiComponent,
    VariableOptions,
};
use eikonal_cli::{execute, verify, RunConfig, Subcommand};

type C = Complex64;

fn c(a: f64, b: f64) -> C {
    C::new(a, b)
}

/// Collects the sub-checks of one criterion.
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn that(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn poly(terms: &[(i32, C)]) -> AnalyticFunction {
    AnalyticFunction::from_terms(terms.iter().copied()).unwrap()
}

fn dist_f() -> AnalyticFunction {
    poly(&[(0, c(-1.0, 0.0)), (2, c(-1.0, 0.0))])
}

fn random_c(rng: &mut ChaCha8Rng) -> C {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Ten Laurent seeds: the distance example, the identity, five random
/// quadratics and three with higher or negative powers.
fn corpus() -> Vec<(String, AnalyticFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut v = vec![
        ("-1-ζ²".to_owned(), dist_f()),
        ("ζ".to_owned(), poly(&[(1, c(1.0, 0.0))])),
    ];
    for k in 0..5 {
        let t = [(0, random_c(&mut rng)), (1, random_c(&mut rng)), (2, random_c(&mut rng))];
        v.push((format!("random quadratic {k}"), poly(&t)));
    }
    v.push(("ζ³-1/2".into(), poly(&[(0, c(-0.5, 0.0)), (3, c(1.0, 0.0))])));
    v.push((
        "0.3/ζ+1+0.2ζ²".into(),
        poly(&[(-1, c(0.3, 0.0)), (0, c(1.0, 0.0)), (2, c(0.2, 0.0))]),
    ));
    v.push((
        "2+0.5iζ+0.1ζ⁴".into(),
        poly(&[(0, c(2.0, 0.0)), (1, c(0.0, 0.5)), (4, c(0.1, 0.0))]),
    ));
    v
}

/// Cell-centred samples of `[-a, a]²`, `n` per side, away from the unit circle.
fn zeta_samples(a: f64, n: usize, guard: f64) -> Vec<C> {
    let h = 2.0 * a / n as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| c(-a + (i as f64 + 0.5) * h, -a + (j as f64 + 0.5) * h)))
        .filter(|z| (1.0 - z.norm_sqr().powi(2)).abs() >= guard)
        .collect()
}

/// Fourth-order central Wirtinger derivatives of a sampled map.
fn fd_wirtinger(f: impl Fn(C) -> C, z: C, h: f64) -> (C, C) {
    let d = |e: C| (-f(z + 2.0 * e) + 8.0 * f(z + e) - 8.0 * f(z - e) + f(z - 2.0 * e)) / (12.0 * h);
    let (fx, fy) = (d(c(h, 0.0)), d(c(0.0, h)));
    ((fx - C::i() * fy) * 0.5, (fx + C::i() * fy) * 0.5)
}

/// `(φ_z, φ_z̄)` from parameter derivatives of φ and z by inverting the
/// Jacobian of `ζ ↦ z`.
fn chain_to_z(phi: (C, C), z: (C, C)) -> (C, C) {
    let (a, b) = z;
    let j = a.norm_sqr() - b.norm_sqr();
    let (zeta_z, zeta_zb) = (a.conj() / j, -b / j);
    (
        phi.0 * zeta_z + phi.1 * zeta_zb.conj(),
        phi.0 * zeta_zb + phi.1 * zeta_z.conj(),
    )
}

// 1 ---------------------------------------------------------------------
fn master_residual(k: &mut Check) {
    let zetas = zeta_samples(2.0, 110, 1e-3);
    let t0 = Instant::now();
    let mut total = 0;
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    let fs = corpus();
    for (_, f) in &fs {
        let pe = ParametrizedEikonal::new(f.clone()).unwrap();
        let r = Execution::default().map(&zetas, |&z| pe.eikonal_residual(z).ok());
        for v in r {
            match v {
                Some(v) => {
                    worst = worst.max(v);
                    total += 1;
                }
                None => failed += 1,
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    k.that(fs.len() >= 10, format!("{} seeds", fs.len()));
    k.that(total >= 10_000 * fs.len() / 2 && total >= 10_000, format!("{total} residuals"));
    k.that(failed == 0, format!("{failed} failed evaluations"));
    k.that(worst < 1e-8, format!("max |4φ_zφ_z̄-1| = {worst:.2e}"));
    k.that(secs < 5.0, format!("{secs:.2} s"));

    // independent oracle on a subset: differences of the sampled φ and z
    let mut fd_worst: f64 = 0.0;
    for (_, f) in &fs {
        let pe = ParametrizedEikonal::new(f.clone()).unwrap();
        for &z in zetas.iter().step_by(211) {
            if (z.norm() - 1.0).abs() < 0.05 || z.norm() < 0.15 {
                continue;
            }
            let h = 1e-4 * z.norm().max(0.5);
            let pz = fd_wirtinger(|w| pe.eval_phi(w).unwrap(), z, h);
            let zz = fd_wirtinger(|w| pe.eval_z(w).unwrap(), z, h);
            let (a, b) = chain_to_z(pz, zz);
            fd_worst = fd_worst.max((4.0 * a * b - 1.0).norm());
        }
    }
    k.that(fd_worst < 1e-5, format!("difference oracle {fd_worst:.1e}"));
}

// 2 ---------------------------------------------------------------------
fn distance_oracle(k: &mut Check) {
    let pe = ParametrizedEikonal::new(dist_f()).unwrap();
    let d = |z: C| (z + 1.0) * (z.conj() - 1.0);
    let z0 = pe.eval_z(c(2.0, 0.0)).unwrap();
    let p0 = pe.eval_phi(c(2.0, 0.0)).unwrap();
    k.that((z0 - c(5.0 / 3.0, 0.0)).norm() < 1e-12, format!("z(2) = {z0}"));
    k.that((p0 - c(4.0 / 3.0, 0.0)).norm() < 1e-12, format!("φ(2) = {p0}"));
    // one additive constant, fitted at ζ = 2
    let r0 = d(z0).sqrt();
    let shift = [r0 - p0, -r0 - p0].into_iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for zeta in zeta_samples(2.5, 80, 1e-3) {
        let (Ok(z), Ok(p)) = (pe.eval_z(zeta), pe.eval_phi(zeta)) else {
            continue;
        };
        worst = worst.max(((p + shift).powi(2) - d(z)).norm());
        n += 1;
    }
    k.note(format!("constant {shift:.1e}"));
    k.that(worst < 1e-8, format!("max |φ²-(z+1)(z̄-1)| = {worst:.2e} over {n}"));
}

// 3 ---------------------------------------------------------------------
fn quadratic_oracle(k: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x21);
    let mut worst: f64 = 0.0;
    let mut jumps = 0;
    for _ in 0..6 {
        let (f0, f1, f2) = (random_c(&mut rng), random_c(&mut rng), random_c(&mut rng));
        let pe = ParametrizedEikonal::new(poly(&[(0, f0), (1, f1), (2, f2)])).unwrap();
        let mut offset: Option<C> = None;
        let mut matched = 0;
        for _ in 0..60 {
            let r = if rng.random_range(0.0..1.0) < 0.5 {
                rng.random_range(0.3..0.9)
            } else {
                rng.random_range(1.1..2.5)
            };
            let zeta = C::from_polar(r, rng.random_range(-PI..PI));
            let (Ok(z), Ok(p)) = (pe.eval_z(zeta), pe.eval_phi(zeta)) else {
                continue;
            };
            let Ok(br) = quadratic_closed_form(f0, f1, f2, z, c(0.0, 0.0)) else {
                continue;
            };
            let Some(hit) = br.iter().find(|b| (b.zeta - zeta).norm() < 1e-8 * zeta.norm().max(1.0)) else {
                continue;
            };
            let Some(q) = hit.phi else { continue };
            matched += 1;
            let d = p - q;
            let o = *offset.get_or_insert(d);
            // the logarithm's branch: differences are whole multiples of iπ f1
            let m = ((d - o) / (C::i() * PI * f1)).re.round();
            if m != 0.0 {
                jumps += 1;
            }
            worst = worst.max((d - o - m * C::i() * PI * f1).norm());
        }
        k.that(matched >= 30, format!("{matched} matched samples"));
    }
    k.note(format!("{jumps} samples on another log sheet"));
    k.that(worst < 1e-8, format!("sup |Δφ - const| = {worst:.2e}"));
}

// 4 ---------------------------------------------------------------------
fn region_atlas(k: &mut Check) {
    let ra = RegionAnalyzer::new(dist_f()).unwrap();
    let s = ra.find_s_phi(720, Execution::default());
    let pts: Vec<f64> = s
        .iter()
        .filter_map(|c| match c {
            SPhiComponent::Point(t) => Some(*t),
            _ => None,
        })
        .collect();
    k.that(s.len() == 2 && pts.len() == 2, format!("S_φ = {s:?}"));
    if pts.len() == 2 {
        let e = (pts[0] + FRAC_PI_2).abs().max((pts[1] - FRAC_PI_2).abs());
        k.that(e < 1e-10, format!("±π/2 to {e:.1e}"));
    }
    for t in [FRAC_PI_2, -FRAC_PI_2] {
        let l = ra.light_segment(t).unwrap();
        let ok = l.point.re.abs() < 1e-12 && l.direction.re.abs() < 1e-12 * l.direction.norm();
        k.that(ok, format!("light line at θ={t:.4} is x=0"));
    }
    let b = ra.boundary_limit_point(FRAC_PI_2).unwrap();
    k.that(b.norm() < 1e-12, format!("boundary limit {b:.1e}"));
    let pe = ParametrizedEikonal::new(dist_f()).unwrap();
    for side in [-1.0, 1.0] {
        let errs: Vec<f64> = (3..=6)
            .map(|p| {
                let eps = 10f64.powi(-p);
                (pe.eval_z(C::from_polar(1.0 + side * eps, FRAC_PI_2)).unwrap() - b).norm() / eps
            })
            .collect();
        // err/ε settles to a constant: first-order approach
        let settled = (errs[3] - errs[2]).abs() < 0.05 * errs[3].max(1e-300);
        k.that(errs.iter().all(|e| *e < 10.0) && settled, format!("radial limit err/ε = {errs:.3?}"));
    }
}

// 5 ---------------------------------------------------------------------
fn side_of(poly: &[(f64, C)], z: C) -> Option<f64> {
    let j = (0..poly.len()).min_by(|&a, &b| (poly[a].1 - z).norm().total_cmp(&(poly[b].1 - z).norm()))?;
    if j == 0 || j + 1 == poly.len() {
        return None;
    }
    let tangent = poly[j + 1].1 - poly[j - 1].1;
    Some(((z - poly[j].1) * tangent.conj()).im.signum())
}

fn poisson_caustic(k: &mut Check, scratch: &Path) {
    let tau = FRAC_PI_2;
    let f = AnalyticFunction::poisson(tau, BoundaryProfile::Hinge).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..64 {
        let th = -tau + 0.02 + (2.0 * tau - 0.04) * j as f64 / 63.0;
        let e = C::from_polar(1.0, th);
        let v = (f.eval(e).unwrap() * e.conj()).re;
        worst = worst.max((v - BoundaryProfile::Hinge.value(th, tau)).abs());
    }
    k.that(worst < 1e-8, format!("boundary data off γ {worst:.1e}"));
    // on γ the profile is approached radially
    let th = 2.5;
    let v = (f.eval(C::from_polar(1.0 - 1e-5, th)).unwrap() * C::from_polar(1.0, -th)).re;
    k.note(format!("on γ at r=1-1e-5: {:.1e}", (v - (th - tau)).abs()));

    let ra = RegionAnalyzer::new(f.clone()).unwrap();
    let s = ra.find_s_phi(512, Execution::default());
    let h = 2.0 * PI / 512.0;
    let arc_ok = matches!(s.as_slice(), [SPhiComponent::Arc { start, end }]
        if (start + tau).abs() <= h && (end - tau).abs() <= h);
    k.that(arc_ok, format!("S_φ = {s:?}"));

    let cfg = RunConfig::from_json(&format!(
        r#"{{"f":{{"type":"poisson","tau":{tau:?},"profile":"hinge"}},"classify":{{"theta_samples":512}}}}"#
    ))
    .unwrap();
    let out = scratch.join("poisson");
    let t0 = Instant::now();
    let o = execute(Subcommand::Classify, &cfg, &out, Execution::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    k.that(o.passed(), format!("classify gates {:?}", o.gates.iter().map(|g| (&g.name, g.passed)).collect::<Vec<_>>()));
    k.that(secs < 30.0, format!("{secs:.2} s at 512 θ"));
    let svg = std::fs::read_to_string(out.join("atlas.svg")).unwrap();
    k.that(svg.matches("<polyline").count() == 1, "one caustic polyline in the atlas");
    let caustic = std::fs::read_to_string(out.join("caustic.csv")).unwrap();
    let poly: Vec<(f64, C)> = caustic
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            (v[0], c(v[1], v[2]))
        })
        .collect();
    k.that(poly.len() > 100, format!("{} caustic vertices", poly.len()));
    let pe = ParametrizedEikonal::new(f).unwrap();
    let mut signs = Vec::new();
    for j in 0..24 {
        let t = -1.3 + 2.6 * j as f64 / 23.0;
        for r in [0.8, 0.9, 0.95, 0.99, 1.01, 1.05, 1.1, 1.25] {
            if let Some(s) = pe.eval_z(C::from_polar(r, t)).ok().and_then(|z| side_of(&poly, z)) {
                signs.push(s);
            }
        }
    }
    let one_side = !signs.is_empty() && signs.iter().all(|&s| s == signs[0]);
    k.that(one_side, format!("{} shadow samples on one side", signs.len()));
}

// 6 ---------------------------------------------------------------------
fn constant_ell_regression(k: &mut Check) {
    let grid = Grid::new((-2.0, 2.0), (-2.0, 2.0), 81, 81).unwrap();
    let nodes: Vec<C> = grid.nodes().into_iter().map(|z| z + c(1e-3, 7e-4)).collect();
    let mut sig_published: f64 = 0.0;
    let mut sig_red: f64 = 0.0;
    for idx in [
        RefractionField::constant(1.0).unwrap(),
        RefractionField::ParametricEll(EllProfile::Constant { ell: 0.4 }),
    ] {
        let published = CoefficientField::build(&nodes, &idx, Convention::Published, Execution::default()).unwrap();
        sig_published = sig_published.max(published.max_sigma_on_elliptic());
        let red = CoefficientField::build(&nodes, &idx, Convention::Rederived, Execution::default()).unwrap();
        for p in red.points.iter().flatten() {
            sig_red = sig_red.max(p.sigma.map_or(0.0, |s| s.norm()));
        }
        // ellipticity map of the published flag, inside vs outside the disk
        let (mut ins, mut inside_e, mut outs, mut outside_e) = (0, 0, 0, 0);
        for (z, p) in nodes.iter().zip(&published.points) {
            let e = p.as_ref().is_some_and(|p| p.elliptic);
            if z.norm() < 1.0 {
                ins += 1;
                inside_e += e as usize;
            } else {
                outs += 1;
                outside_e += e as usize;
            }
        }
        k.note(format!("elliptic: {inside_e}/{ins} inside, {outside_e}/{outs} outside"));
    }
    k.that(sig_published < 1e-12, format!("σ on elliptic nodes {sig_published:.1e}"));
    k.that(sig_red < 1e-12, format!("re-derived σ {sig_red:.1e}"));

    let onodes: Vec<C> = zeta_samples(2.2, 12, 1e-3)
        .into_iter()
        .filter(|z| (z.norm() - 1.0).abs() > 0.3 && z.norm() > 0.25)
        .collect();
    let (mut i_max, mut red_max, mut published_min): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for (_, f) in corpus() {
        let r = coefficient_oracle(&f, &onodes, 1e-3, Execution::default());
        i_max = i_max.max(r.max_inverse_schwarz());
        red_max = red_max.max(r.max_rederived().unwrap_or(f64::INFINITY));
        published_min = published_min.min(r.max_published().unwrap_or(f64::INFINITY));
    }
    k.that(i_max < 1e-8, format!("oracle (i) {i_max:.1e}"));
    k.that(red_max < 1e-8, format!("oracle (ii) re-derived {red_max:.1e}"));
    k.note(format!("oracle (ii) published μ,ν: residual ≥ {published_min:.2e} per seed"));
}

// 7 ---------------------------------------------------------------------
fn beltrami(k: &mut Check) {
    let g = Grid::square(c(0.0, 0.0), 1.0, 64).unwrap();
    let kc = c(0.3, -0.4);
    let opts = |margin| BeltramiOptions {
        margin,
        ..Default::default()
    };
    let m = solve_beltrami(&vec![kc; g.len()], g, &opts(0.0)).unwrap();
    let z0 = m.pin();
    let err = g
        .nodes()
        .iter()
        .zip(&m.chi)
        .map(|(z, x)| (x - (z + kc * (z - z0).conj())).norm())
        .fold(0.0, f64::max);
    k.that(err < 1e-8, format!("σ≡c affine error {err:.1e}"));

    let g = Grid::square(c(0.0, 0.0), 1.0, 256).unwrap();
    let raw: Vec<C> = g
        .nodes()
        .iter()
        .map(|z| (-2.0 * z.norm_sqr()).exp() * C::from_polar(1.0, 2.0 * z.re - z.im) * (1.0 + 0.5 * z))
        .collect();
    let sup = raw.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let sigma: Vec<C> = raw.iter().map(|s| s * (0.5 / sup)).collect();
    let t0 = Instant::now();
    let m = solve_beltrami(&sigma, g, &opts(0.15)).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    k.that(m.residual_l2 < 1e-4, format!("256² residual {:.1e}", m.residual_l2));
    k.that(secs < 60.0, format!("{secs:.2} s, {} iterations", m.iterations));
    k.that(m.jacobian_min > 0.0, format!("jacobian_min {:.3}", m.jacobian_min));
    let cell = g.cell();
    let mut rt: f64 = 0.0;
    let nodes = g.nodes();
    for kk in (0..g.len()).step_by(997) {
        rt = rt.max((m.invert(m.chi[kk]).map_or(f64::INFINITY, |z| (z - nodes[kk]).norm())) / cell);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..64 {
        let x = c(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        let back = m.invert(x).map_or(f64::INFINITY, |z| (m.eval(z).0 - x).norm());
        rt = rt.max(back / cell);
    }
    k.that(rt < 1.0, format!("round trip {rt:.1e} cells"));
}

// 8 / 9 -----------------------------------------------------------------
fn reduction_case() -> (ParametrizedEikonal, complex_eikonal::VariableIndexSolution, Grid) {
    let f = poly(&[(0, c(0.3, -0.2)), (1, c(0.5, 0.1)), (2, c(-0.4, 0.7))]);
    let grid = Grid::new((0.3, 0.7), (-0.2, 0.2), 64, 64).unwrap();
    let index = RefractionField::ParametricEll(EllProfile::Constant { ell: 0.0 });
    let sol = solve_variable(&f, &index, grid, &VariableOptions::default()).unwrap();
    (ParametrizedEikonal::new(f).unwrap(), sol, grid)
}

fn similarity(k: &mut Check) {
    let ex = Execution::default();
    let g = Grid::square(c(0.4, 0.1), 0.2, 32).unwrap();
    let kappa = vec![c(0.3, 0.2); g.len()];
    let (kc, _) = kappa_chi_bar(&g, &kappa, ex);
    let (b, cc) = coeffs_bc_field(&kappa, &kc).unwrap();
    let f = g.sample(ex, |z| 1.0 + z);
    let sol = solve_similarity(&g, &f, &b, &cc, &SimilarityOptions::default()).unwrap();
    k.that(sol.s.iter().all(|v| *v == c(0.0, 0.0)), "κ constant: s ≡ 0");

    let eps = 0.05;
    let g = Grid::square(c(0.0, 0.0), 1.0, 128).unwrap();
    let kappa: Vec<C> = g.nodes().iter().map(|z| eps * z.conj()).collect();
    let (kc, _) = kappa_chi_bar(&g, &kappa, ex);
    let (b, cc) = coeffs_bc_field(&kappa, &kc).unwrap();
    let f = g.sample(ex, |z| 1.0 + 0.5 * z);
    let sol = solve_similarity(&g, &f, &b, &cc, &SimilarityOptions::default()).unwrap();
    k.that(sol.residual < 1e-4, format!("κ=εχ̄ W residual {:.1e}", sol.residual));
    let z = assemble_z(&sol.w, &kappa).unwrap();
    let ident = (0..g.len())
        .map(|i| (z[i] - kappa[i] * z[i].conj() - sol.w[i]).norm() / sol.w[i].norm())
        .fold(0.0, f64::max);
    k.that(ident < 1e-14, format!("deformed identity {ident:.1e}"));
    let cr = canonical_residual(&g, &z, &kappa, &core_nodes(&g, 0.15), ex);
    k.that(cr < 5e-4, format!("canonical {cr:.1e}"));

    let (pe, sol, grid) = reduction_case();
    let nodes = grid.nodes();
    let sig = sol.chi_map.sigma.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let kap = (0..grid.len()).map(|i| (sol.kappa[i] - nodes[i] * nodes[i]).norm()).fold(0.0, f64::max);
    let s = sol.s.iter().map(|s| s.norm()).fold(0.0, f64::max);
    k.that(sig < 1e-12 && kap < 1e-12 && s < 1e-10, format!("σ {sig:.0e}, κ-χ² {kap:.0e}, s {s:.0e}"));
    let w = sol.window;
    let base = grid.index((w.i0 + w.i1) / 2, (w.j0 + w.j1) / 2);
    let off = pe.eval_phi(nodes[base]).unwrap();
    let (mut ez, mut ep): (f64, f64) = (0.0, 0.0);
    for i in w.indices(&grid) {
        ez = ez.max((sol.z[i].unwrap() - pe.eval_z(nodes[i]).unwrap()).norm());
        ep = ep.max((sol.phi.phi[i].unwrap() - (pe.eval_phi(nodes[i]).unwrap() - off)).norm());
    }
    k.that(ez < 1e-6 && ep < 1e-6, format!("z error {ez:.1e}, φ error {ep:.1e}"));
}

fn phi_recovery(k: &mut Check) {
    let (_, sol, _) = reduction_case();
    k.that(sol.phi.cell_loop_max < 1e-8, format!("cell loops {:.1e}", sol.phi.cell_loop_max));
    k.note(format!("random loops {:.1e}", sol.phi.random_loop_max));
    let r = sol.max_eikonal_residual();
    let n = sol.eikonal_residual.iter().flatten().count();
    k.that(r < 1e-4 && n > 100, format!("|4φ_zφ_z̄-N²| {r:.1e} at {n} nodes"));
}

// 10 --------------------------------------------------------------------
fn biholomorphic(k: &mut Check) {
    let ws = [
        ("z²", poly(&[(2, c(1.0, 0.0))])),
        ("e^z", AnalyticFunction::exponential(c(1.0, 0.0), c(1.0, 0.0))),
    ];
    let fs = [
        dist_f(),
        poly(&[(0, c(0.3, -0.2)), (1, c(0.5, 0.1)), (2, c(-0.4, 0.7))]),
        poly(&[(-1, c(0.2, 0.1)), (0, c(1.5, 0.0)), (1, c(0.0, 0.3))]),
    ];
    let zetas: Vec<C> = zeta_samples(2.0, 24, 1e-2).into_iter().filter(|z| z.norm() > 0.2).collect();
    for (name, w) in &ws {
        let dw = w.derivative().unwrap();
        let (mut worst, mut ok, mut fd): (f64, usize, f64) = (0.0, 0, 0.0);
        for f in &fs {
            let red = BiholomorphicReduction::new(w.clone(), f.clone()).unwrap();
            for (i, &zeta) in zetas.iter().enumerate() {
                let Ok(s) = red.sample(zeta, None) else { continue };
                let n2 = dw.eval(s.z).unwrap().norm_sqr();
                worst = worst.max((4.0 * s.phi_z * s.phi_zbar - n2).norm());
                ok += 1;
                if i % 37 == 0 {
                    // φ(z) differenced in the physical plane
                    let h = 1e-4;
                    let probe = |z: C| red.phi_at(z, zeta).unwrap_or(c(f64::NAN, f64::NAN));
                    let (a, b) = fd_wirtinger(probe, s.z, h);
                    if a.is_finite() && b.is_finite() {
                        fd = fd.max((4.0 * a * b - n2).norm() / n2.max(1.0));
                    }
                }
            }
        }
        k.that(ok >= zetas.len() * 3 / 2, format!("w={name}: {ok} samples"));
        k.that(worst < 1e-8, format!("w={name}: |4φ_zφ_z̄-|w'|²| {worst:.1e}"));
        k.that(fd < 1e-6, format!("w={name}: difference oracle {fd:.1e}"));
    }
}

// 11 --------------------------------------------------------------------
fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism(k: &mut Check, scratch: &Path) {
    let runs = [
        (
            Subcommand::Constant,
            r#"{"f":{"type":"laurent","terms":[[0,-1,0],[2,-1,0]]},"grid":{"re":[-2,2],"im":[-2,2],"resolution":41},"samples":[[2,0]]}"#,
        ),
        (
            Subcommand::Constant,
            r#"{"f":{"type":"laurent","terms":[[0,-1,0],[2,-1,0]]},"n":{"type":"mod-analytic","w":{"type":"exp","coeff":[1,0],"rate":[1,0]}},"grid":{"re":[1.2,2.4],"im":[-0.6,0.6],"resolution":16}}"#,
        ),
        (
            Subcommand::Classify,
            r#"{"f":{"type":"poisson","tau":1.0,"profile":"hinge"},"classify":{"theta_samples":256}}"#,
        ),
        (
            Subcommand::Variable,
            r#"{"f":{"type":"laurent","terms":[[0,1,0.2],[1,0.3,0]]},"n":{"type":"parametric-ell","ell":{"profile":"gaussian","ell0":0,"amplitude":0.05,"center":[0.4,0],"width":0.1}},"grid":{"re":[0.2,0.6],"im":[-0.2,0.2],"resolution":128}}"#,
        ),
        (
            Subcommand::Field,
            r#"{"f":{"type":"laurent","terms":[[0,-1,0],[2,-1,0]]},"grid":{"re":[1.2,2.5],"im":[-1,1],"resolution":32},"field":{"k":8}}"#,
        ),
    ];
    for (i, (sub, text)) in runs.iter().enumerate() {
        let cfg = RunConfig::from_json(text).unwrap();
        let dirs: Vec<_> = (0..3).map(|r| scratch.join(format!("run{i}_{r}"))).collect();
        let mut passed = true;
        for (r, d) in dirs.iter().enumerate() {
            let exec = if r == 2 { Execution::Sequential } else { Execution::default() };
            passed &= execute(*sub, &cfg, d, exec).unwrap().passed();
        }
        let a = files(&dirs[0]);
        let same = a == files(&dirs[1]) && a == files(&dirs[2]);
        k.that(passed, format!("{} run {i} gates", sub.name()));
        k.that(same && a.len() >= 2, format!("{} run {i}: {} files byte-identical", sub.name(), a.len()));
        let v = verify(&dirs[0], Execution::default()).unwrap();
        let mismatch = v.gates.iter().find(|g| g.name == "recompute_mismatch").map_or(f64::NAN, |g| g.value);
        k.that(v.passed(), format!("{} run {i}: verify passes (mismatch {mismatch:.1e})", sub.name()));
    }
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let s = scratch.path();
    let criteria: Vec<(&str, Box<dyn Fn(&mut Check)>)> = vec![
        ("master PDE residual, constant index", Box::new(master_residual)),
        ("distance-function oracle", Box::new(distance_oracle)),
        ("quadratic closed-form oracle", Box::new(quadratic_oracle)),
        ("region atlas for -1-ζ²", Box::new(region_atlas)),
        ("Poisson hinge caustic", Box::new(|k: &mut Check| poisson_caustic(k, s))),
        ("constant-ℓ coefficient regression", Box::new(constant_ell_regression)),
        ("Beltrami solver", Box::new(beltrami)),
        ("similarity principle and assembly", Box::new(similarity)),
        ("φ recovery on the reduction case", Box::new(phi_recovery)),
        ("biholomorphic reduction", Box::new(biholomorphic)),
        ("CLI determinism and verify", Box::new(|k: &mut Check| determinism(k, s))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut k = Check::new();
        let t0 = Instant::now();
        let panicked = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut k))).is_err();
        if panicked {
            k.failures.push("panicked".into());
        }
        let ok = k.failures.is_empty();
        failed += (!ok) as usize;
        println!(
            "{} [{:>2}] {name} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t0.elapsed().as_secs_f64()
        );
        for f in &k.failures {
            println!("        failed: {f}");
        }
        for n in &k.notes {
            println!("        {n}");
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
