//! Subcommand runners. Each writes its artifacts into the output directory
//! and returns the residual gates it evaluated; `manifest.json` records the
//! configuration echo, gates and summary for `verify`.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{Map, Value};

use complex_eikonal::constant::seed_to_z;
use complex_eikonal::field::{eval_field, light_offset};
use complex_eikonal::refraction::BiholomorphicReduction;
use complex_eikonal::regions::{Payload, SPhiComponent};
use complex_eikonal::grid::{core_nodes, taper};
use complex_eikonal::pipeline::eikonal_residual_window;
use complex_eikonal::quasiconformal::beltrami_residual;
use complex_eikonal::refraction::CoefficientField;
use complex_eikonal::similarity::{canonical_residual, coeffs_bc_field, integrate_phi, kappa_chi_bar, w_equation_residual};
use complex_eikonal::{
    caustic_side, FieldSample, Window, WirtingerPair, AnalyticFunction, BBox, Category, Complex64, Execution, Grid, ParametrizedEikonal,
    RefractionField, RegionAnalyzer, VariableOptions,
};

use crate::config::RunConfig;
use crate::emit::{cplx, fmt, num, opt, write_json, Gate, Svg, Table};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Constant,
    Classify,
    Variable,
    Verify,
    Field,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Constant => "constant",
            Subcommand::Classify => "classify",
            Subcommand::Variable => "variable",
            Subcommand::Verify => "verify",
            Subcommand::Field => "field",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "constant" => Subcommand::Constant,
            "classify" => Subcommand::Classify,
            "variable" => Subcommand::Variable,
            "verify" => Subcommand::Verify,
            "field" => Subcommand::Field,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub gates: Vec<Gate>,
    pub summary: Map<String, Value>,
    pub files: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    fn file(&mut self, name: &str) {
        self.files.push(name.to_owned());
    }
}

pub const MANIFEST: &str = "manifest.json";

/// Runs one of the producing subcommands and writes the manifest (when JSON
/// output is enabled). Numerical failures are recorded in the manifest and
/// reported as a failed gate.
pub fn execute(sub: Subcommand, cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let result = match sub {
        Subcommand::Constant => run_constant(cfg, out, exec),
        Subcommand::Classify => run_classify(cfg, out, exec),
        Subcommand::Variable => run_variable(cfg, out, exec),
        Subcommand::Field => run_field(cfg, out, exec),
        Subcommand::Verify => return crate::verify::verify(out, exec),
    };
    let (mut outcome, error) = match result {
        Ok(o) => (o, None),
        Err(CliError::Core(e)) => {
            let mut o = Outcome::default();
            o.gates.push(Gate {
                name: "completed".into(),
                value: 1.0,
                tol: 0.0,
                passed: false,
            });
            (o, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    if cfg.wants("json") {
        outcome.file(MANIFEST);
        let mut m = Map::new();
        m.insert("tool".into(), Value::String("eikonal".into()));
        m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        m.insert("subcommand".into(), Value::String(sub.name().into()));
        m.insert(
            "config".into(),
            serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?,
        );
        m.insert("gates".into(), Value::Array(outcome.gates.iter().map(Gate::to_json).collect()));
        m.insert("passed".into(), Value::Bool(outcome.passed()));
        m.insert("summary".into(), Value::Object(outcome.summary.clone()));
        m.insert(
            "files".into(),
            Value::Array(outcome.files.iter().map(|f| Value::String(f.clone())).collect()),
        );
        if let Some(e) = error {
            m.insert("error".into(), Value::String(e));
        }
        write_json(&out.join(MANIFEST), &Value::Object(m))?;
    }
    Ok(outcome)
}

fn grid_of(cfg: &RunConfig) -> Result<Grid, CliError> {
    let g = &cfg.grid;
    Ok(Grid::new(g.re, g.im, g.resolution, g.resolution)?)
}

/// ζ samples of the `constant` and `field` runs: grid nodes then extras.
pub fn constant_samples(cfg: &RunConfig) -> Result<Vec<Complex64>, CliError> {
    let mut v = grid_of(cfg)?.nodes();
    v.extend(cfg.samples.iter().map(|&(a, b)| Complex64::new(a, b)));
    Ok(v)
}

pub enum ConstantSource {
    /// `n ≡ n0`: the closed-form parametrization scaled by `n0`.
    Plain { pe: ParametrizedEikonal, n0: f64 },
    /// `n = |w'|` through the biholomorphic reduction.
    Reduced(BiholomorphicReduction),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantRow {
    pub zeta: Complex64,
    pub z: Complex64,
    pub phi: Complex64,
    pub n: f64,
    pub residual: f64,
}

impl ConstantSource {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let f = cfg.f.build()?;
        match cfg.n.build()? {
            RefractionField::Constant { n0 } => Ok(ConstantSource::Plain {
                pe: ParametrizedEikonal::new(f)?,
                n0,
            }),
            RefractionField::ModAnalytic { w } => Ok(ConstantSource::Reduced(BiholomorphicReduction::new(w, f)?)),
            RefractionField::ParametricEll(_) => Err(CliError::Config(
                "a parametric-ell index needs the `variable` subcommand".into(),
            )),
        }
    }

    pub fn row(&self, zeta: Complex64) -> complex_eikonal::Result<ConstantRow> {
        match self {
            ConstantSource::Plain { pe, n0 } => {
                let z = pe.eval_z(zeta)?;
                let phi = pe.eval_phi(zeta)? * *n0;
                let residual = pe.eikonal_residual(zeta)? * n0 * n0;
                Ok(ConstantRow {
                    zeta,
                    z,
                    phi,
                    n: *n0,
                    residual,
                })
            }
            ConstantSource::Reduced(r) => {
                let s = r.sample(zeta, None)?;
                Ok(ConstantRow {
                    zeta,
                    z: s.z,
                    phi: s.phi,
                    n: s.n,
                    residual: s.residual,
                })
            }
        }
    }

    /// `∇v` in complex form where available (constant index only).
    pub fn grad_v(&self, zeta: Complex64) -> Option<Complex64> {
        match self {
            ConstantSource::Plain { pe, n0 } => pe.grad_v(zeta).ok().map(|g| g * *n0),
            ConstantSource::Reduced(_) => None,
        }
    }
}

pub const CONSTANT_HEADERS: [&str; 9] =
    ["zeta_re", "zeta_im", "z_re", "z_im", "phi_re", "phi_im", "n", "residual", "status"];

/// Rows of the `constant` run; ζ too close to the unit circle are skipped,
/// failed evaluations kept with an `error` status.
pub fn constant_table(cfg: &RunConfig, exec: Execution) -> Result<(Table, usize), CliError> {
    let src = ConstantSource::new(cfg)?;
    let guard = cfg.tolerances.unit_circle;
    let zetas: Vec<Complex64> = constant_samples(cfg)?
        .into_iter()
        .filter(|z| (1.0 - z.norm_sqr().powi(2)).abs() >= guard)
        .collect();
    let skipped = constant_samples(cfg)?.len() - zetas.len();
    let rows = exec.map(&zetas, |&z| constant_cells(&src, z));
    let mut t = Table::new(&CONSTANT_HEADERS);
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, skipped))
}

pub fn constant_cells(src: &ConstantSource, zeta: Complex64) -> Vec<String> {
    let [a, b] = cplx(zeta);
    match src.row(zeta) {
        Ok(r) => {
            let [zr, zi] = cplx(r.z);
            let [pr, pi] = cplx(r.phi);
            vec![a, b, zr, zi, pr, pi, fmt(r.n), fmt(r.residual), "ok".into()]
        }
        Err(_) => vec![a, b, String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), "error".into()],
    }
}

fn max_column(t: &Table, col: usize) -> (f64, usize) {
    let vals: Vec<f64> = t.rows.iter().filter_map(|r| r[col].parse::<f64>().ok()).collect();
    (vals.iter().fold(0.0, |a, b| a.max(*b)), vals.len())
}

fn run_constant(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Outcome, CliError> {
    let (table, skipped) = constant_table(cfg, exec)?;
    let mut o = Outcome::default();
    let (max_res, evaluated) = max_column(&table, 7);
    let failed = table.rows.len() - evaluated;
    o.gates.push(Gate::below("max_eikonal_residual", max_res, cfg.tolerances.residual));
    o.gates.push(Gate {
        name: "evaluated_samples".into(),
        value: evaluated as f64,
        tol: 1.0,
        passed: evaluated >= 1,
    });
    o.summary.insert("samples".into(), Value::from(table.rows.len()));
    o.summary.insert("skipped_near_unit_circle".into(), Value::from(skipped));
    o.summary.insert("failed".into(), Value::from(failed));
    if cfg.wants("csv") {
        table.write(&out.join("constant.csv"))?;
        o.file("constant.csv");
    }
    Ok(o)
}

// ---------------------------------------------------------------- classify

pub const CLASSIFY_HEADERS: [&str; 9] = [
    "theta",
    "category",
    "condition",
    "point_re",
    "point_im",
    "dir_re",
    "dir_im",
    "caustic_re",
    "caustic_im",
];

pub fn theta_samples(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

pub fn classify_cells(ra: &RegionAnalyzer, theta: f64) -> Vec<String> {
    let s = ra.classify(Complex64::from_polar(1.0, theta));
    let cond = opt(ra.condition(theta).ok());
    let e = String::new;
    let (p, d, c) = match s.payload {
        Payload::Segment { line, caustic } => (Some(line.point), Some(line.direction), caustic),
        Payload::Point(z) => (Some(z), None, None),
        Payload::None => (None, None, None),
    };
    let pair = |z: Option<Complex64>| z.map_or([e(), e()], cplx);
    let [pr, pi] = pair(p);
    let [dr, di] = pair(d);
    let [cr, ci] = pair(c);
    vec![fmt(theta), s.category.as_str().into(), cond, pr, pi, dr, di, cr, ci]
}

/// Largest residual of the two degenerate ray equations at the line point
/// and one unit along the line, over all light rows.
pub fn light_line_residual(f: &AnalyticFunction, theta: f64, point: Complex64, dir: Complex64) -> complex_eikonal::Result<f64> {
    let fv = f.eval(Complex64::from_polar(1.0, theta))?;
    let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let r = |z: Complex64| {
        let e1 = (1.0 - c2) * z.re - s2 * z.im - fv.re;
        let e2 = -s2 * z.re + (1.0 + c2) * z.im - fv.im;
        e1.abs().max(e2.abs())
    };
    Ok(r(point).max(r(point + dir)))
}

pub const SIGN_TEST_RADII: [f64; 4] = [0.9, 0.95, 1.05, 1.1];

/// Shadow samples near one caustic arc and their side of it: `(plus, minus)`.
pub fn caustic_sign_counts(ra: &RegionAnalyzer, polyline: &[(f64, Complex64)]) -> (usize, usize) {
    let (mut plus, mut minus) = (0, 0);
    for &(t, _) in polyline.iter().skip(2).step_by(4).take_while(|_| polyline.len() > 4) {
        for r in SIGN_TEST_RADII {
            let zeta = Complex64::from_polar(r, t);
            let Ok(z) = ra.f().eval(zeta).and_then(|fv| seed_to_z(fv, zeta)) else {
                continue;
            };
            if let Some((s, _)) = caustic_side(polyline, z) {
                if s > 0.0 {
                    plus += 1;
                } else if s < 0.0 {
                    minus += 1;
                }
            }
        }
    }
    (plus, minus)
}

fn component_row(c: &SPhiComponent) -> Vec<String> {
    match *c {
        SPhiComponent::Point(t) => vec!["point".into(), fmt(t), fmt(t)],
        SPhiComponent::Arc { start, end } => vec!["arc".into(), fmt(start), fmt(end)],
    }
}

pub struct ClassifyAudit {
    pub gates: Vec<Gate>,
    pub light: usize,
    pub sign_tested: usize,
}

/// Gates of a `classify` run from its θ table and caustic polylines: light
/// rows satisfy the light condition and lie on the line of both degenerate
/// ray equations; sampled shadow points stay on one side of each caustic.
pub fn classify_audit(ra: &RegionAnalyzer, table: &Table, polylines: &[Vec<(f64, Complex64)>]) -> Result<ClassifyAudit, CliError> {
    let num_at = |r: &[String], c: usize| r[c].parse::<f64>().unwrap_or(f64::NAN);
    let mut cond_max: f64 = 0.0;
    let mut line_max: f64 = 0.0;
    let mut light = 0;
    for r in &table.rows {
        if r[1] != Category::LightSegment.as_str() {
            continue;
        }
        light += 1;
        let t = num_at(r, 0);
        cond_max = cond_max.max(num_at(r, 2).abs());
        let p = Complex64::new(num_at(r, 3), num_at(r, 4));
        let d = Complex64::new(num_at(r, 5), num_at(r, 6));
        let res = light_line_residual(ra.f(), t, p, d).unwrap_or(f64::NAN);
        line_max = if res.is_nan() { f64::INFINITY } else { line_max.max(res) };
    }
    let mut gates = vec![
        Gate::below("light_condition_max", cond_max, ra.tolerance().max(f64::MIN_POSITIVE)),
        Gate::below("light_line_residual", line_max, 1e-8 * ra.scale().max(1.0)),
    ];
    let (mut plus, mut minus) = (0, 0);
    for poly in polylines {
        let (p, m) = caustic_sign_counts(ra, poly);
        plus += p;
        minus += m;
    }
    let tested = plus + minus;
    if !polylines.is_empty() {
        let minority = if tested == 0 { 1.0 } else { plus.min(minus) as f64 / tested as f64 };
        gates.push(Gate::below("caustic_sign_minority", minority, 1e-12));
    }
    Ok(ClassifyAudit {
        gates,
        light,
        sign_tested: tested,
    })
}

fn run_classify(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Outcome, CliError> {
    let opts = &cfg.classify;
    let f = cfg.f.build()?;
    let ra = RegionAnalyzer::new(f.clone())?;
    let mut o = Outcome::default();

    let thetas = theta_samples(opts.theta_samples);
    let rows = exec.map(&thetas, |&t| classify_cells(&ra, t));
    let mut table = Table::new(&CLASSIFY_HEADERS);
    rows.into_iter().for_each(|r| table.push(r));

    let comps = ra.find_s_phi(opts.theta_samples, exec);
    let mut comp_table = Table::new(&["kind", "start", "end"]);
    comps.iter().for_each(|c| comp_table.push(component_row(c)));

    let mut caustic_table = Table::new(&["arc", "theta", "x", "y"]);
    let mut polylines = Vec::new();
    for (a, c) in comps.iter().enumerate() {
        let poly = ra.caustic_polyline(*c, opts.caustic_samples);
        if poly.len() < 2 {
            continue;
        }
        for (t, z) in &poly {
            caustic_table.push(vec![a.to_string(), fmt(*t), fmt(z.re), fmt(z.im)]);
        }
        polylines.push(poly);
    }
    let audit = classify_audit(&ra, &table, &polylines)?;
    o.gates = audit.gates;
    o.summary.insert("light_samples".into(), Value::from(audit.light));
    o.summary.insert("s_phi_components".into(), Value::from(comps.len()));
    o.summary.insert("caustic_arcs".into(), Value::from(polylines.len()));
    o.summary.insert("sign_test_samples".into(), Value::from(audit.sign_tested));
    o.summary.insert("analyzer_tolerance".into(), num(ra.tolerance()));

    let (x0, x1, y0, y1) = opts.bbox;
    let bbox = BBox::new(x0, x1, y0, y1);
    let pencil = ra.light_pencil(&comps, opts.per_arc, &bbox, exec);
    let mut pencil_table = Table::new(&["theta", "a_re", "a_im", "b_re", "b_im"]);
    for s in &pencil {
        let [ar, ai] = cplx(s.a);
        let [br, bi] = cplx(s.b);
        pencil_table.push(vec![fmt(s.theta), ar, ai, br, bi]);
    }

    if cfg.wants("csv") {
        for (name, t) in [
            ("classify.csv", &table),
            ("s_phi.csv", &comp_table),
            ("caustic.csv", &caustic_table),
            ("pencil.csv", &pencil_table),
        ] {
            t.write(&out.join(name))?;
            o.file(name);
        }
    }
    if cfg.wants("svg") {
        let mut svg = Svg::new(opts.bbox);
        for s in &pencil {
            svg.line(s.a, s.b, "light");
        }
        let ring: Vec<Complex64> = [0.5, 0.7, 0.9, 1.1, 1.4, 2.0]
            .iter()
            .flat_map(|&r| theta_samples(96).into_iter().map(move |t| Complex64::from_polar(r, t)))
            .collect();
        let shadow = exec.map(&ring, |&zeta| f.eval(zeta).and_then(|fv| seed_to_z(fv, zeta)).ok());
        for z in shadow.into_iter().flatten() {
            svg.dot(z, "shadow");
        }
        for poly in &polylines {
            svg.polyline(&poly.iter().map(|p| p.1).collect::<Vec<_>>(), "caustic");
        }
        crate::emit::write_text(&out.join("atlas.svg"), &svg.render())?;
        o.file("atlas.svg");
    }
    Ok(o)
}

// ---------------------------------------------------------------- variable

pub const VARIABLE_HEADERS: [&str; 16] = [
    "i",
    "j",
    "zeta_re",
    "zeta_im",
    "chi_re",
    "chi_im",
    "z_re",
    "z_im",
    "phi_re",
    "phi_im",
    "dphi_re",
    "dphi_im",
    "dbphi_re",
    "dbphi_im",
    "n",
    "eikonal_residual",
];

pub const CHI_HEADERS: [&str; 11] = [
    "i",
    "j",
    "zeta_re",
    "zeta_im",
    "chi_re",
    "chi_im",
    "dchi_re",
    "dchi_im",
    "dbchi_re",
    "dbchi_im",
    "local_residual",
];

pub const SIMILARITY_HEADERS: [&str; 12] = [
    "i", "j", "chi_re", "chi_im", "kappa_re", "kappa_im", "s_re", "s_im", "w_re", "w_im", "Z_re", "Z_im",
];

pub fn variable_index(cfg: &RunConfig) -> Result<RefractionField, CliError> {
    match cfg.n.build()? {
        RefractionField::ModAnalytic { .. } => Err(CliError::Config(
            "a mod-analytic index goes through the `constant` subcommand (biholomorphic reduction)".into(),
        )),
        other => Ok(other),
    }
}

pub fn variable_options(cfg: &RunConfig, exec: Execution) -> VariableOptions {
    let mut o = VariableOptions {
        exec,
        ..Default::default()
    };
    o.beltrami.residual_tol = cfg.tolerances.solver;
    o.similarity.residual_tol = cfg.tolerances.solver;
    o
}

/// `max |Z - κZ̄ - W| / |W|` over the χ-grid.
pub fn deformed_identity(kappa: &[Complex64], w: &[Complex64], z: &[Complex64]) -> f64 {
    (0..z.len())
        .map(|k| (z[k] - kappa[k] * z[k].conj() - w[k]).norm() / w[k].norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// The sampled fields of a `variable` run, as written to its CSV files.
#[derive(Clone, Debug)]
pub struct VariableRecord {
    pub grid: Grid,
    pub chi: Vec<Complex64>,
    pub chi_z: Vec<Complex64>,
    pub chi_zbar: Vec<Complex64>,
    pub kappa: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub z_chi: Vec<Complex64>,
    pub window: Window,
    pub z: Vec<Option<Complex64>>,
    pub phi: Vec<Option<Complex64>>,
    pub phi_pair: Vec<Option<WirtingerPair>>,
    pub n: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct VariableAudit {
    pub gates: Vec<Gate>,
    pub local_residual: Vec<f64>,
    pub eikonal_residual: Vec<Option<f64>>,
    pub phi: Vec<Option<Complex64>>,
}

/// The tapered Beltrami coefficient the solver works with, from the config.
pub fn tapered_sigma(cfg: &RunConfig, grid: &Grid, exec: Execution) -> Result<Vec<Complex64>, CliError> {
    let opts = variable_options(cfg, exec);
    let field = CoefficientField::build(&grid.nodes(), &variable_index(cfg)?, opts.convention, exec)?;
    let t = taper(grid, opts.beltrami.margin);
    field
        .points
        .iter()
        .zip(t)
        .map(|(p, t)| {
            p.as_ref()
                .map(|p| p.sigma.unwrap_or_default() * t)
                .ok_or_else(|| CliError::Core(complex_eikonal::Error::Degenerate("coefficient chain undefined")))
        })
        .collect()
}

/// Every residual gate of a `variable` run recomputed from its sampled
/// fields alone.
pub fn variable_audit(
    cfg: &RunConfig,
    rec: &VariableRecord,
    sigma: &[Complex64],
    exec: Execution,
) -> Result<VariableAudit, CliError> {
    let grid = &rec.grid;
    let tol = &cfg.tolerances;
    let opts = variable_options(cfg, exec);
    let mut gates = Vec::new();
    let (belt, local_residual) = beltrami_residual(grid, &rec.chi, sigma, 4, exec);
    gates.push(Gate::below("beltrami_residual", belt, tol.solver));
    let jac = rec
        .chi_z
        .iter()
        .zip(&rec.chi_zbar)
        .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    gates.push(Gate {
        name: "jacobian_min".into(),
        value: jac,
        tol: 0.0,
        passed: jac > 0.0,
    });
    let core = core_nodes(grid, opts.similarity.margin);
    let (kcb, _) = kappa_chi_bar(grid, &rec.kappa, exec);
    let (b, c) = coeffs_bc_field(&rec.kappa, &kcb)?;
    let wres = w_equation_residual(grid, &rec.w, &b, &c, &core, exec);
    gates.push(Gate::below("similarity_residual", wres, tol.solver));
    let canon = canonical_residual(grid, &rec.z_chi, &rec.kappa, &core, exec);
    gates.push(Gate::below("canonical_residual", canon, 5.0 * tol.solver));
    let ident = deformed_identity(&rec.kappa, &rec.w, &rec.z_chi);
    gates.push(Gate::below("deformed_ray_identity", ident, 1e-12));

    let zero = Complex64::new(0.0, 0.0);
    let pz: Vec<Complex64> = rec.phi_pair.iter().map(|p| p.map_or(zero, |p| p.d_zeta)).collect();
    let pzb: Vec<Complex64> = rec.phi_pair.iter().map(|p| p.map_or(zero, |p| p.d_zeta_bar)).collect();
    let w = rec.window;
    let base = grid.index((w.i0 + w.i1) / 2, (w.j0 + w.j1) / 2);
    let phi = integrate_phi(grid, w, &pz, &pzb, base, opts.base_value, opts.exactness_tol, exec)?;
    gates.push(Gate::below("loop_cell_max", phi.cell_loop_max, tol.loop_cell));
    let eik = eikonal_residual_window(grid, w, &rec.phi, &rec.z, &rec.n, exec)?;
    let eik_max = eik.iter().flatten().fold(0.0, |a: f64, b| a.max(*b));
    gates.push(Gate::below("eikonal_residual_max", eik_max, tol.phi));
    Ok(VariableAudit {
        gates,
        local_residual,
        eikonal_residual: eik,
        phi: phi.phi,
    })
}

fn run_variable(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Outcome, CliError> {
    let f = cfg.f.build()?;
    let index = variable_index(cfg)?;
    let grid = grid_of(cfg)?;
    let sol = complex_eikonal::solve_variable(&f, &index, grid, &variable_options(cfg, exec))?;
    let qc = &sol.chi_map;
    let rec = VariableRecord {
        grid,
        chi: qc.chi.clone(),
        chi_z: qc.chi_z.clone(),
        chi_zbar: qc.chi_zbar.clone(),
        kappa: sol.kappa.clone(),
        w: sol.w.clone(),
        z_chi: sol.z_chi.clone(),
        window: sol.window,
        z: sol.z.clone(),
        phi: sol.phi.phi.clone(),
        phi_pair: sol.phi_pair.clone(),
        n: sol.n.clone(),
    };
    let audit = variable_audit(cfg, &rec, &qc.sigma, exec)?;
    let mut o = Outcome {
        gates: audit.gates,
        ..Default::default()
    };

    let s = &mut o.summary;
    s.insert("beltrami_iterations".into(), Value::from(qc.iterations));
    s.insert("similarity_iterations".into(), Value::from(sol.similarity.iterations));
    s.insert("elliptic_fraction".into(), num(sol.elliptic_fraction()));
    s.insert("kappa_richardson".into(), num(sol.kappa_richardson));
    s.insert("mixed_defect".into(), num(sol.phi.mixed_defect));
    s.insert("random_loop_max".into(), num(sol.phi.random_loop_max));
    s.insert(
        "window".into(),
        Value::Array([sol.window.i0, sol.window.i1, sol.window.j0, sol.window.j1].map(Value::from).to_vec()),
    );

    if cfg.wants("csv") {
        let nodes = grid.nodes();
        let mut t = Table::new(&VARIABLE_HEADERS);
        for k in sol.window.indices(&grid) {
            let (i, j) = grid.coords(k);
            let pair = sol.phi_pair[k].expect("window nodes carry φ data");
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(cplx(nodes[k]));
            row.extend(cplx(qc.chi[k]));
            row.extend(cplx(sol.z[k].unwrap_or_default()));
            row.extend(cplx(sol.phi.phi[k].unwrap_or_default()));
            row.extend(cplx(pair.d_zeta));
            row.extend(cplx(pair.d_zeta_bar));
            row.push(fmt(sol.n[k]));
            row.push(opt(sol.eikonal_residual[k]));
            t.push(row);
        }
        t.write(&out.join("variable.csv"))?;
        o.file("variable.csv");

        let mut c = Table::new(&CHI_HEADERS);
        let mut sim = Table::new(&SIMILARITY_HEADERS);
        for k in 0..grid.len() {
            let (i, j) = grid.coords(k);
            let mut row = vec![i.to_string(), j.to_string()];
            for v in [nodes[k], qc.chi[k], qc.chi_z[k], qc.chi_zbar[k]] {
                row.extend(cplx(v));
            }
            row.push(fmt(qc.local_residual[k]));
            c.push(row);
            let mut row = vec![i.to_string(), j.to_string()];
            for v in [nodes[k], sol.kappa[k], sol.s[k], sol.w[k], sol.z_chi[k]] {
                row.extend(cplx(v));
            }
            sim.push(row);
        }
        c.write(&out.join("chi_grid.csv"))?;
        o.file("chi_grid.csv");
        sim.write(&out.join("similarity.csv"))?;
        o.file("similarity.csv");
    }
    Ok(o)
}

// ---------------------------------------------------------------- field

pub const FIELD_HEADERS: [&str; 6] = ["x", "y", "u", "v", "k", "W_leading"];

/// `(z, φ)` samples and the additive offset for `v`: the largest `v` over
/// samples with `|∇v|` below the light tolerance, or over all samples when
/// none qualifies.
pub fn field_points(cfg: &RunConfig, exec: Execution) -> Result<(Vec<(Complex64, Complex64)>, f64, bool), CliError> {
    let src = ConstantSource::new(cfg)?;
    let guard = cfg.tolerances.unit_circle;
    let zetas: Vec<Complex64> = constant_samples(cfg)?
        .into_iter()
        .filter(|z| (1.0 - z.norm_sqr().powi(2)).abs() >= guard)
        .collect();
    let rows = exec.map(&zetas, |&z| {
        let r = src.row(z).ok()?;
        let light = src.grad_v(z).is_some_and(|g| g.norm() < cfg.field.light_tol);
        Some((r.z, r.phi, light))
    });
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let phis: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    let light: Vec<bool> = rows.iter().map(|r| r.2).collect();
    let has_light = light.iter().any(|&l| l);
    let offset = if has_light {
        light_offset(&phis, &light)
    } else {
        light_offset(&phis, &vec![true; phis.len()])
    };
    Ok((rows.iter().map(|r| (r.0, r.1)).collect(), offset, has_light))
}

pub fn field_row(s: &FieldSample) -> Vec<String> {
    vec![fmt(s.z.re), fmt(s.z.im), fmt(s.u), fmt(s.v), fmt(s.k), fmt(s.w_leading)]
}

/// No sample above the normalized light level, and `|W| ≤ e^{kv}` everywhere.
pub fn field_gates(samples: &[FieldSample]) -> Vec<Gate> {
    let positive = samples.iter().filter(|s| s.v > 0.0).count();
    let excess = samples
        .iter()
        .map(|s| (s.w_leading.abs() - s.envelope()).max(0.0))
        .fold(0.0, f64::max);
    vec![
        Gate::below("positive_v_samples", positive as f64, 0.5),
        Gate::below("envelope_excess", excess, 1e-15),
    ]
}

fn run_field(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Outcome, CliError> {
    let (points, offset, has_light) = field_points(cfg, exec)?;
    let rep = eval_field(&points, cfg.field.k, offset, exec)?;
    let mut o = Outcome {
        gates: field_gates(&rep.samples),
        ..Default::default()
    };
    o.summary.insert("samples".into(), Value::from(rep.samples.len()));
    o.summary.insert("v_offset".into(), num(offset));
    o.summary.insert(
        "offset_source".into(),
        Value::String(if has_light { "light" } else { "all" }.into()),
    );
    if cfg.wants("csv") {
        let mut t = Table::new(&FIELD_HEADERS);
        rep.samples.iter().for_each(|s| t.push(field_row(s)));
        t.write(&out.join("field.csv"))?;
        o.file("field.csv");
    }
    Ok(o)
}
