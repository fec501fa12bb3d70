//! Artifact writers. CSV floats are written with 17 significant digits in a
//! fixed exponent format, JSON numbers in their shortest round-trip form, so
//! identical runs give identical bytes and every value parses back to the
//! same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use complex_eikonal::Complex64;

use crate::CliError;

pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_text(path, &self.render())
    }
}

/// `[re, im]` as two cells.
pub fn cplx(z: Complex64) -> [String; 2] {
    [fmt(z.re), fmt(z.im)]
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Gate {
    /// Passes when `value < tol`.
    pub fn below(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            passed: value < tol,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("value".into(), num(self.value));
        m.insert("tol".into(), num(self.tol));
        m.insert("passed".into(), Value::Bool(self.passed));
        Value::Object(m)
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

/// Minimal SVG canvas with a fixed mapping of a plane box onto `0..SIZE`.
pub struct Svg {
    bbox: (f64, f64, f64, f64),
    body: String,
}

const SIZE: f64 = 800.0;

impl Svg {
    pub fn new(bbox: (f64, f64, f64, f64)) -> Self {
        Self {
            bbox,
            body: String::new(),
        }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.bbox;
        ((z.re - x0) / (x1 - x0) * SIZE, (y1 - z.im) / (y1 - y0) * SIZE)
    }

    pub fn line(&mut self, a: Complex64, b: Complex64, class: &str) {
        let (p, q) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            p.0, p.1, q.0, q.1
        );
    }

    pub fn dot(&mut self, z: Complex64, class: &str) {
        let p = self.map(z);
        if p.0.is_finite() && p.1.is_finite() && (-SIZE..=2.0 * SIZE).contains(&p.0) && (-SIZE..=2.0 * SIZE).contains(&p.1) {
            let _ = writeln!(self.body, r#"<circle class="{class}" cx="{:.3}" cy="{:.3}" r="1.5"/>"#, p.0, p.1);
        }
    }

    pub fn polyline(&mut self, pts: &[Complex64], class: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|z| {
                let p = self.map(*z);
                format!("{:.3},{:.3}", p.0, p.1)
            })
            .collect();
        let _ = writeln!(self.body, r#"<polyline class="{class}" points="{}"/>"#, coords.join(" "));
    }

    pub fn render(&self) -> String {
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {s} {s}" width="{s}" height="{s}">"#,
                "\n<style>.light{{stroke:#d9a400;stroke-width:0.6}} .shadow{{fill:#3a4a6b}} ",
                ".caustic{{fill:none;stroke:#c0262d;stroke-width:2}} .light-point{{fill:#d9a400}}</style>\n",
                r#"<rect width="{s}" height="{s}" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            s = SIZE,
            body = self.body
        )
    }
}
