//! Residual-only audit of a finished run: every residual and gate is
//! recomputed from the sampled values in the CSV files and compared with
//! what the run recorded.

use std::path::Path;

use serde_json::Value;

use complex_eikonal::{Complex64, Execution, FieldSample, Grid, RegionAnalyzer, Window, WirtingerPair};

use crate::config::RunConfig;
use crate::csv::CsvData;
use crate::emit::{fmt, Gate, Table};
use crate::run::{self, Outcome, Subcommand, VariableRecord, MANIFEST};
use crate::CliError;

/// Relative agreement demanded between recorded and recomputed values.
pub const MATCH_TOL: f64 = 1e-12;

fn rel(a: f64, b: f64) -> f64 {
    if a == b || (a.is_nan() && b.is_nan()) {
        return 0.0;
    }
    let d = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Largest relative difference between two cells; text cells must agree
/// exactly.
fn cell_gap(a: &str, b: &str) -> f64 {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => rel(x, y),
        _ if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

fn row_gap(recorded: &[String], recomputed: &[String]) -> f64 {
    if recorded.len() != recomputed.len() {
        return f64::INFINITY;
    }
    recorded.iter().zip(recomputed).map(|(a, b)| cell_gap(a, b)).fold(0.0, f64::max)
}

/// Tracks the worst disagreement found during the audit.
#[derive(Default)]
struct Tally {
    worst: f64,
    checked: usize,
    note: Option<String>,
}

impl Tally {
    fn add(&mut self, what: &str, gap: f64) {
        self.checked += 1;
        if gap > self.worst {
            self.worst = gap;
            if gap > MATCH_TOL {
                self.note = Some(what.to_owned());
            }
        }
    }
}

fn load_csv(dir: &Path, name: &str, headers: &[&str]) -> Result<CsvData, CliError> {
    let d = CsvData::read(&dir.join(name))?;
    if d.headers != headers {
        return Err(CliError::Io(format!("{name}: unexpected header line")));
    }
    Ok(d)
}

fn zeta_of(d: &CsvData, r: usize) -> Result<Complex64, CliError> {
    d.complex(r, "zeta")
}

pub fn verify(dir: &Path, exec: Execution) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.join(MANIFEST).display())))?;
    let manifest: Value = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{MANIFEST}: {e}")))?;
    let sub = manifest["subcommand"]
        .as_str()
        .and_then(Subcommand::parse)
        .filter(|s| *s != Subcommand::Verify)
        .ok_or_else(|| CliError::Io(format!("{MANIFEST}: missing or invalid subcommand")))?;
    let cfg: RunConfig = serde_json::from_value(manifest["config"].clone())
        .map_err(|e| CliError::Io(format!("{MANIFEST}: config echo: {e}")))?;
    cfg.validate()?;
    if !cfg.wants("csv") {
        return Err(CliError::Config("the audited run wrote no csv files".into()));
    }

    let mut tally = Tally::default();
    let recomputed = match sub {
        Subcommand::Constant => audit_constant(dir, &cfg, &mut tally, exec)?,
        Subcommand::Classify => audit_classify(dir, &cfg, &mut tally)?,
        Subcommand::Variable => audit_variable(dir, &cfg, &mut tally, exec)?,
        Subcommand::Field => audit_field(dir, &cfg, &mut tally)?,
        Subcommand::Verify => unreachable!(),
    };

    // recorded gates against their recomputation
    let recorded = manifest["gates"].as_array().cloned().unwrap_or_default();
    for g in &recomputed {
        let found = recorded.iter().find(|r| r["name"].as_str() == Some(&g.name));
        let gap = match found.map(|r| &r["value"]) {
            Some(Value::Number(n)) => rel(n.as_f64().unwrap_or(f64::NAN), g.value),
            Some(Value::Null) if !g.value.is_finite() => 0.0,
            _ => f64::INFINITY,
        };
        tally.add(&format!("manifest gate {}", g.name), gap);
    }
    if recorded.len() != recomputed.len() {
        tally.add("manifest gate count", f64::INFINITY);
    }

    let mut o = Outcome::default();
    o.summary.insert("audited".into(), Value::String(sub.name().into()));
    o.summary.insert("values_checked".into(), Value::from(tally.checked));
    if let Some(n) = &tally.note {
        o.summary.insert("first_mismatch".into(), Value::String(n.clone()));
    }
    if let Some(e) = manifest.get("error").and_then(Value::as_str) {
        o.summary.insert("recorded_error".into(), Value::String(e.into()));
        o.gates.push(Gate {
            name: "completed".into(),
            value: 1.0,
            tol: 0.0,
            passed: false,
        });
    }
    o.gates.push(Gate {
        name: "recompute_mismatch".into(),
        value: tally.worst,
        tol: MATCH_TOL,
        passed: tally.worst <= MATCH_TOL,
    });
    o.gates.extend(recomputed);
    Ok(o)
}

fn audit_constant(dir: &Path, cfg: &RunConfig, tally: &mut Tally, exec: Execution) -> Result<Vec<Gate>, CliError> {
    let d = load_csv(dir, "constant.csv", &run::CONSTANT_HEADERS)?;
    let src = run::ConstantSource::new(cfg)?;
    let zetas = (0..d.rows.len()).map(|r| zeta_of(&d, r)).collect::<Result<Vec<_>, _>>()?;
    let rows = exec.map(&zetas, |&z| run::constant_cells(&src, z));
    let mut t = Table::new(&run::CONSTANT_HEADERS);
    for (r, row) in rows.into_iter().enumerate() {
        tally.add(&format!("constant.csv row {}", r + 1), row_gap(&d.rows[r], &row));
        t.push(row);
    }
    let (max_res, evaluated) = max_residual(&t);
    Ok(vec![
        Gate::below("max_eikonal_residual", max_res, cfg.tolerances.residual),
        Gate {
            name: "evaluated_samples".into(),
            value: evaluated as f64,
            tol: 1.0,
            passed: evaluated >= 1,
        },
    ])
}

fn max_residual(t: &Table) -> (f64, usize) {
    let vals: Vec<f64> = t.rows.iter().filter_map(|r| r[7].parse::<f64>().ok()).collect();
    (vals.iter().fold(0.0, |a, b| a.max(*b)), vals.len())
}

fn audit_classify(dir: &Path, cfg: &RunConfig, tally: &mut Tally) -> Result<Vec<Gate>, CliError> {
    let d = load_csv(dir, "classify.csv", &run::CLASSIFY_HEADERS)?;
    let ra = RegionAnalyzer::new(cfg.f.build()?)?;
    let mut t = Table::new(&run::CLASSIFY_HEADERS);
    for r in 0..d.rows.len() {
        let row = run::classify_cells(&ra, d.req(r, "theta")?);
        tally.add(&format!("classify.csv row {}", r + 1), row_gap(&d.rows[r], &row));
        t.push(d.rows[r].clone());
    }
    let c = load_csv(dir, "caustic.csv", &["arc", "theta", "x", "y"])?;
    let mut polylines: Vec<(String, Vec<(f64, Complex64)>)> = Vec::new();
    for r in 0..c.rows.len() {
        let theta = c.req(r, "theta")?;
        let z = Complex64::new(c.req(r, "x")?, c.req(r, "y")?);
        let again = ra.caustic_point(theta).map_or(f64::INFINITY, |p| rel(p.re, z.re).max(rel(p.im, z.im)));
        tally.add(&format!("caustic.csv row {}", r + 1), again);
        let arc = c.cell(r, "arc")?;
        match polylines.last_mut() {
            Some((a, poly)) if a == arc => poly.push((theta, z)),
            _ => polylines.push((arc.to_owned(), vec![(theta, z)])),
        }
    }
    let polys: Vec<_> = polylines.into_iter().map(|p| p.1).collect();
    Ok(run::classify_audit(&ra, &t, &polys)?.gates)
}

fn audit_field(dir: &Path, cfg: &RunConfig, tally: &mut Tally) -> Result<Vec<Gate>, CliError> {
    let d = load_csv(dir, "field.csv", &run::FIELD_HEADERS)?;
    let mut samples = Vec::with_capacity(d.rows.len());
    for r in 0..d.rows.len() {
        let k = d.req(r, "k")?;
        tally.add("field.csv k", rel(k, cfg.field.k));
        let s = FieldSample::new(
            Complex64::new(d.req(r, "x")?, d.req(r, "y")?),
            d.req(r, "u")?,
            d.req(r, "v")?,
            k,
        );
        tally.add(&format!("field.csv row {}", r + 1), row_gap(&d.rows[r], &run::field_row(&s)));
        samples.push(s);
    }
    Ok(run::field_gates(&samples))
}

fn audit_variable(dir: &Path, cfg: &RunConfig, tally: &mut Tally, exec: Execution) -> Result<Vec<Gate>, CliError> {
    let g = &cfg.grid;
    let grid = Grid::new(g.re, g.im, g.resolution, g.resolution)?;
    let nodes = grid.nodes();
    let chi_d = load_csv(dir, "chi_grid.csv", &run::CHI_HEADERS)?;
    let sim = load_csv(dir, "similarity.csv", &run::SIMILARITY_HEADERS)?;
    let var = load_csv(dir, "variable.csv", &run::VARIABLE_HEADERS)?;
    if chi_d.rows.len() != grid.len() || sim.rows.len() != grid.len() {
        return Err(CliError::Io("χ-grid tables do not match the configured grid".into()));
    }
    let node_index = |d: &CsvData, r: usize| -> Result<usize, CliError> {
        let i: usize = d.cell(r, "i")?.parse().map_err(|_| CliError::Io("bad node index".into()))?;
        let j: usize = d.cell(r, "j")?.parse().map_err(|_| CliError::Io("bad node index".into()))?;
        if i >= grid.nx || j >= grid.ny {
            return Err(CliError::Io("node index outside the grid".into()));
        }
        Ok(grid.index(i, j))
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut rec = VariableRecord {
        grid,
        chi: vec![zero; grid.len()],
        chi_z: vec![zero; grid.len()],
        chi_zbar: vec![zero; grid.len()],
        kappa: vec![zero; grid.len()],
        w: vec![zero; grid.len()],
        z_chi: vec![zero; grid.len()],
        window: Window::full(&grid),
        z: vec![None; grid.len()],
        phi: vec![None; grid.len()],
        phi_pair: vec![None; grid.len()],
        n: vec![0.0; grid.len()],
    };
    let mut local = vec![f64::NAN; grid.len()];
    for r in 0..grid.len() {
        let k = node_index(&chi_d, r)?;
        tally.add("chi_grid.csv zeta", rel(zeta_of(&chi_d, r)?.re, nodes[k].re).max(rel(zeta_of(&chi_d, r)?.im, nodes[k].im)));
        rec.chi[k] = chi_d.complex(r, "chi")?;
        rec.chi_z[k] = chi_d.complex(r, "dchi")?;
        rec.chi_zbar[k] = chi_d.complex(r, "dbchi")?;
        local[k] = chi_d.req(r, "local_residual")?;
        let k2 = node_index(&sim, r)?;
        rec.kappa[k2] = sim.complex(r, "kappa")?;
        rec.w[k2] = sim.complex(r, "w")?;
        rec.z_chi[k2] = sim.complex(r, "Z")?;
    }

    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    let mut recorded_eik = vec![None; grid.len()];
    let index = run::variable_index(cfg)?;
    for r in 0..var.rows.len() {
        let k = node_index(&var, r)?;
        let (i, j) = grid.coords(k);
        (i0, i1, j0, j1) = (i0.min(i), i1.max(i), j0.min(j), j1.max(j));
        rec.z[k] = Some(var.complex(r, "z")?);
        rec.phi[k] = Some(var.complex(r, "phi")?);
        rec.phi_pair[k] = Some(WirtingerPair::new(var.complex(r, "dphi")?, var.complex(r, "dbphi")?));
        rec.n[k] = var.req(r, "n")?;
        let n_again = index.ell_zeta(nodes[k])?.ell.exp();
        tally.add("variable.csv n", rel(n_again, rec.n[k]));
        let chi = var.complex(r, "chi")?;
        tally.add("variable.csv chi", rel(chi.re, rec.chi[k].re).max(rel(chi.im, rec.chi[k].im)));
        recorded_eik[k] = var.f64(r, "eikonal_residual")?;
    }
    if var.rows.is_empty() {
        return Err(CliError::Io("variable.csv has no rows".into()));
    }
    rec.window = Window { i0, i1, j0, j1 };
    if rec.window.width() * rec.window.height() != var.rows.len() {
        return Err(CliError::Io("variable.csv rows do not fill a rectangle".into()));
    }

    let sigma = run::tapered_sigma(cfg, &grid, exec)?;
    let audit = run::variable_audit(cfg, &rec, &sigma, exec)?;
    for k in 0..grid.len() {
        tally.add("chi_grid.csv local_residual", rel(local[k], audit.local_residual[k]));
        match (recorded_eik[k], audit.eikonal_residual[k]) {
            (Some(a), Some(b)) => tally.add("variable.csv eikonal_residual", rel(a, b)),
            (None, None) => {}
            _ => tally.add("variable.csv eikonal_residual", f64::INFINITY),
        }
        if let (Some(a), Some(b)) = (rec.phi[k], audit.phi[k]) {
            tally.add("variable.csv phi", rel(a.re, b.re).max(rel(a.im, b.im)));
        }
    }
    Ok(audit.gates)
}

/// One line per gate, for the terminal.
pub fn report(o: &Outcome) -> String {
    let mut s = String::new();
    for g in &o.gates {
        s.push_str(&format!(
            "{} {:<24} {} (tol {})\n",
            if g.passed { "ok  " } else { "FAIL" },
            g.name,
            fmt(g.value),
            fmt(g.tol)
        ));
    }
    s
}
