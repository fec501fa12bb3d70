//! Run configuration (JSON).
//!
//! ```json
//! {
//!   "f": {"type": "laurent", "terms": [[0, -1, 0], [2, -1, 0]]},
//!   "n": {"type": "constant", "value": 1},
//!   "grid": {"re": [1, 3], "im": [-1, 1], "resolution": 17}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use complex_eikonal::refraction::EllProfile;
use complex_eikonal::{AnalyticFunction, BoundaryProfile, Complex64, RefractionField, Ring};

use crate::CliError;

pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum SeedConfig {
    /// `[k, re, im]` triples: `Σ (re + i im) ζ^k`.
    #[serde(rename = "laurent")]
    Laurent {
        terms: Vec<(i32, f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ring: Option<(f64, f64)>,
    },
    #[serde(rename = "poisson")]
    Poisson { tau: f64, profile: String },
    /// `coeff · e^{rate ζ}`.
    #[serde(rename = "exp")]
    Exp { coeff: (f64, f64), rate: (f64, f64) },
}

impl SeedConfig {
    pub fn build(&self) -> Result<AnalyticFunction, CliError> {
        let f = match self {
            SeedConfig::Laurent { terms, ring } => {
                let f = AnalyticFunction::from_terms(terms.iter().map(|&(k, a, b)| (k, Complex64::new(a, b))))?;
                match ring {
                    Some((a, b)) => f.with_ring(Ring::new(*a, *b)?),
                    None => f,
                }
            }
            SeedConfig::Poisson { tau, profile } => {
                let p = match profile.as_str() {
                    "hinge" => BoundaryProfile::Hinge,
                    other => return Err(CliError::Config(format!("unknown boundary profile {other:?}"))),
                };
                AnalyticFunction::poisson(*tau, p)?
            }
            SeedConfig::Exp { coeff, rate } => {
                AnalyticFunction::exponential(Complex64::new(coeff.0, coeff.1), Complex64::new(rate.0, rate.1))
            }
        };
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", deny_unknown_fields)]
pub enum EllConfig {
    #[serde(rename = "constant")]
    Constant { ell: f64 },
    #[serde(rename = "linear")]
    Linear { ell0: f64, gradient: (f64, f64) },
    #[serde(rename = "gaussian")]
    Gaussian {
        ell0: f64,
        amplitude: f64,
        center: (f64, f64),
        width: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum IndexConfig {
    #[serde(rename = "constant")]
    Constant { value: f64 },
    #[serde(rename = "mod-analytic")]
    ModAnalytic { w: SeedConfig },
    #[serde(rename = "parametric-ell")]
    ParametricEll { ell: EllConfig },
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig::Constant { value: 1.0 }
    }
}

impl IndexConfig {
    pub fn build(&self) -> Result<RefractionField, CliError> {
        Ok(match self {
            IndexConfig::Constant { value } => RefractionField::constant(*value)?,
            IndexConfig::ModAnalytic { w } => RefractionField::ModAnalytic { w: w.build()? },
            IndexConfig::ParametricEll { ell } => RefractionField::ParametricEll(match *ell {
                EllConfig::Constant { ell } => EllProfile::Constant { ell },
                EllConfig::Linear { ell0, gradient } => EllProfile::Linear {
                    ell0,
                    gradient: Complex64::new(gradient.0, gradient.1),
                },
                EllConfig::Gaussian {
                    ell0,
                    amplitude,
                    center,
                    width,
                } => {
                    if !(width > 0.0) {
                        return Err(CliError::Config("gaussian width must be positive".into()));
                    }
                    EllProfile::Gaussian {
                        ell0,
                        amplitude,
                        center: Complex64::new(center.0, center.1),
                        width,
                    }
                }
            }),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            re: (-2.0, 2.0),
            im: (-2.0, 2.0),
            resolution: 64,
        }
    }
}

/// Gate tolerances; every field is optional in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eikonal residual gate (`constant`).
    pub residual: f64,
    /// Beltrami and similarity residual gates (`variable`).
    pub solver: f64,
    /// Recovered-φ eikonal residual gate (`variable`).
    pub phi: f64,
    /// Per-cell loop integral gate (`variable`).
    pub loop_cell: f64,
    /// Skip ζ with `|1 - |ζ|⁴|` below this (`constant`).
    pub unit_circle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            solver: 1e-4,
            phi: 1e-4,
            loop_cell: 1e-8,
            unit_circle: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub theta_samples: usize,
    /// Light segments drawn per arc of `S_φ`.
    pub per_arc: usize,
    pub caustic_samples: usize,
    /// `[re_min, re_max, im_min, im_max]` for clipping light segments.
    pub bbox: (f64, f64, f64, f64),
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            theta_samples: 512,
            per_arc: 16,
            caustic_samples: 128,
            bbox: (-3.0, 3.0, -3.0, 3.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldOptions {
    pub k: f64,
    /// `|∇v|` below which a sample counts as light for the normalization.
    pub light_tol: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            k: 10.0,
            light_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub f: SeedConfig,
    #[serde(default)]
    pub n: IndexConfig,
    #[serde(default)]
    pub grid: GridConfig,
    /// Extra ζ samples `[re, im]` evaluated alongside the grid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<(f64, f64)>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub classify: ClassifyOptions,
    #[serde(default)]
    pub field: FieldOptions,
}

fn default_outputs() -> Vec<String> {
    vec!["csv".into(), "json".into(), "svg".into()]
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if g.resolution < MIN_RESOLUTION {
            return Err(CliError::Config(format!(
                "grid resolution {} is below the minimum {MIN_RESOLUTION}",
                g.resolution
            )));
        }
        if !(g.re.0 < g.re.1 && g.im.0 < g.im.1) {
            return Err(CliError::Config("grid bounds must be increasing".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("solver", t.solver),
            ("phi", t.phi),
            ("loop_cell", t.loop_cell),
            ("unit_circle", t.unit_circle),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        for o in &self.outputs {
            if !matches!(o.as_str(), "csv" | "json" | "svg") {
                return Err(CliError::Config(format!("unknown output format {o:?}")));
            }
        }
        if self.classify.theta_samples < 8 {
            return Err(CliError::Config("classify.theta_samples must be at least 8".into()));
        }
        if !(self.field.k > 0.0) {
            return Err(CliError::Config("field.k must be positive".into()));
        }
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        self.outputs.iter().any(|o| o == format)
    }
}
