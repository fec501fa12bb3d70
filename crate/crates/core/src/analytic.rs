//! Analytic seed functions: Laurent polynomials, the hinge-profile Poisson
//! construction, and exponentials.
//!
//! All three kinds are immutable once built and evaluation is pure, so a single
//! [`AnalyticFunction`] can be shared across worker threads.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Closed annulus `r_min <= |ζ| <= r_max` on which a function may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub r_min: f64,
    pub r_max: f64,
}

impl Ring {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min >= 0.0 && r_min < r_max) {
            return Err(Error::Invalid(format!(
                "ring needs 0 <= r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(Self { r_min, r_max })
    }

    pub fn whole_plane() -> Self {
        Self {
            r_min: 0.0,
            r_max: f64::INFINITY,
        }
    }

    pub fn contains(&self, zeta: Complex64) -> bool {
        let r = zeta.norm();
        r >= self.r_min && r <= self.r_max
    }
}

/// Branch of `log ζ` whose cut is the ray at angle `cut_angle`; arguments take
/// values in `(cut_angle - 2π, cut_angle]`. The default cut is the negative
/// real axis (principal branch).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogBranch {
    pub cut_angle: f64,
}

impl Default for LogBranch {
    fn default() -> Self {
        Self { cut_angle: PI }
    }
}

impl LogBranch {
    pub fn new(cut_angle: f64) -> Self {
        Self { cut_angle }
    }

    pub fn arg(&self, zeta: Complex64) -> f64 {
        let shift = self.cut_angle - PI;
        (zeta * Complex64::from_polar(1.0, -shift)).arg() + shift
    }

    pub fn ln(&self, zeta: Complex64) -> Complex64 {
        Complex64::new(zeta.norm().ln(), self.arg(zeta))
    }

    /// Whether the straight segment `a -> b` crosses the cut ray.
    pub fn crosses_cut(&self, a: Complex64, b: Complex64) -> bool {
        let rot = Complex64::from_polar(1.0, -self.cut_angle);
        // In rotated coordinates the cut is the positive real axis.
        let (p, q) = (a * rot, b * rot);
        if (p.im > 0.0) == (q.im > 0.0) && p.im != 0.0 && q.im != 0.0 {
            return false;
        }
        if p.im == q.im {
            return p.im == 0.0 && (p.re > 0.0 || q.re > 0.0);
        }
        let t = p.im / (p.im - q.im);
        p.re + t * (q.re - p.re) > 0.0
    }
}

/// Finite sum `Σ c_k ζ^k` over distinct integer exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    terms: Vec<(i32, Complex64)>,
}

impl LaurentPoly {
    pub fn new<I: IntoIterator<Item = (i32, Complex64)>>(terms: I) -> Result<Self> {
        let mut terms: Vec<(i32, Complex64)> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("Laurent exponents must be distinct".into()));
        }
        terms.retain(|t| t.1 != Complex64::new(0.0, 0.0));
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(i32, Complex64)] {
        &self.terms
    }

    pub fn coefficient(&self, k: i32) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.0 == k)
            .map_or(Complex64::new(0.0, 0.0), |t| t.1)
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.first().map(|t| t.0)
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.terms.iter().map(|&(k, c)| c * zeta.powi(k)).sum()
    }

    pub fn derivative(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|t| t.0 != 0)
                .map(|&(k, c)| (k - 1, c * k as f64))
                .collect(),
        }
    }

    /// Coefficients with every coefficient conjugated.
    pub fn conjugate_coefficients(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|&(k, c)| (k, c.conj())).collect(),
        }
    }
}

/// Named boundary profiles for the Poisson construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryProfile {
    /// `max(|t| - τ, 0)`
    Hinge,
}

impl BoundaryProfile {
    pub fn value(&self, t: f64, tau: f64) -> f64 {
        match self {
            BoundaryProfile::Hinge => (t.abs() - tau).max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    Laurent(LaurentPoly),
    /// `d^order/dζ^order` of `ζ g(ζ)`, where `g` is the Poisson integral of the
    /// boundary profile. Analytic off the arc `γ = {e^{iθ} : τ <= |θ| <= π}`.
    Poisson {
        tau: f64,
        profile: BoundaryProfile,
        order: u32,
    },
    /// `coeff · exp(rate · ζ)`
    Exponential { coeff: Complex64, rate: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFunction {
    kind: FunctionKind,
    ring: Ring,
    quadrature: QuadratureOptions,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl AnalyticFunction {
    pub fn laurent(poly: LaurentPoly) -> Self {
        Self {
            kind: FunctionKind::Laurent(poly),
            ring: Ring::whole_plane(),
            quadrature: QuadratureOptions::default(),
        }
    }

    /// Convenience constructor from `(exponent, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (i32, Complex64)>>(terms: I) -> Result<Self> {
        Ok(Self::laurent(LaurentPoly::new(terms)?))
    }

    /// The Poisson-defined `f` whose boundary data `Re[f(e^{it}) e^{-it}]`
    /// equals the profile, for `0 < τ < π`.
    pub fn poisson(tau: f64, profile: BoundaryProfile) -> Result<Self> {
        if !(tau > 0.0 && tau < PI) {
            return Err(Error::Invalid(format!("tau must lie in (0, π), got {tau}")));
        }
        Ok(Self {
            kind: FunctionKind::Poisson {
                tau,
                profile,
                order: 0,
            },
            ring: Ring::whole_plane(),
            quadrature: QuadratureOptions::default(),
        })
    }

    pub fn exponential(coeff: Complex64, rate: Complex64) -> Self {
        Self {
            kind: FunctionKind::Exponential { coeff, rate },
            ring: Ring::whole_plane(),
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn with_ring(mut self, ring: Ring) -> Self {
        self.ring = ring;
        self
    }

    pub fn with_quadrature(mut self, opts: QuadratureOptions) -> Self {
        self.quadrature = opts;
        self
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    fn check_domain(&self, zeta: Complex64) -> Result<()> {
        if !self.ring.contains(zeta) {
            return Err(Error::OutsideRing {
                zeta,
                r_min: self.ring.r_min,
                r_max: self.ring.r_max,
            });
        }
        match &self.kind {
            FunctionKind::Laurent(p) => {
                if zeta == c(0.0, 0.0) && p.min_exponent().is_some_and(|k| k < 0) {
                    return Err(Error::PoleAtOrigin);
                }
            }
            FunctionKind::Poisson { tau, .. } => {
                if self.on_arc(zeta, *tau) {
                    return Err(Error::OnArc { zeta });
                }
            }
            FunctionKind::Exponential { .. } => {}
        }
        Ok(())
    }

    fn on_arc(&self, zeta: Complex64, tau: f64) -> bool {
        (zeta.norm() - 1.0).abs() < 1e-12 && zeta.arg().abs() >= tau - 1e-12
    }

    /// Whether `ζ` lies on the arc where the Poisson kind is not analytic.
    /// Always false for the closed-form kinds.
    pub fn is_on_arc(&self, zeta: Complex64) -> bool {
        match &self.kind {
            FunctionKind::Poisson { tau, .. } => self.on_arc(zeta, *tau),
            _ => false,
        }
    }

    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        self.check_domain(zeta)?;
        match &self.kind {
            FunctionKind::Laurent(p) => Ok(p.eval(zeta)),
            FunctionKind::Exponential { coeff, rate } => Ok(coeff * (rate * zeta).exp()),
            FunctionKind::Poisson {
                tau,
                profile,
                order,
            } => self.eval_poisson(zeta, *tau, *profile, *order),
        }
    }

    fn eval_poisson(
        &self,
        zeta: Complex64,
        tau: f64,
        profile: BoundaryProfile,
        order: u32,
    ) -> Result<Complex64> {
        // ζ g(ζ) with g(ζ) = (1/2π)∫ (e^{it}+ζ)/(e^{it}-ζ) h(t) dt. For even h
        // supported on τ <= |t| <= π the two halves combine into the kernel
        // ζ(1-ζ²)/(1+ζ²-2ζ cos t), integrated against h(t) over [τ, π].
        let z = zeta;
        let kernel = move |t: f64| -> Complex64 {
            let cs = t.cos();
            let n = z - z * z * z;
            let d = 1.0 + z * z - 2.0 * cs * z;
            match order {
                0 => n / d,
                1 => {
                    let n1 = 1.0 - 3.0 * z * z;
                    let d1 = 2.0 * z - 2.0 * cs;
                    (n1 * d - n * d1) / (d * d)
                }
                _ => {
                    let n1 = 1.0 - 3.0 * z * z;
                    let n2 = -6.0 * z;
                    let d1 = 2.0 * z - 2.0 * cs;
                    let d2 = c(2.0, 0.0);
                    (n2 * d - n * d2) / (d * d) - 2.0 * d1 * (n1 * d - n * d1) / (d * d * d)
                }
            }
        };
        if order > 2 {
            return Err(Error::UnsupportedDerivative(order));
        }
        let q = integrate(
            |t| Ok(kernel(t) * profile.value(t, tau)),
            tau,
            PI,
            &self.quadrature,
        )?;
        Ok(q.value / PI)
    }

    pub fn derivative(&self) -> Result<Self> {
        let kind = match &self.kind {
            FunctionKind::Laurent(p) => FunctionKind::Laurent(p.derivative()),
            FunctionKind::Exponential { coeff, rate } => FunctionKind::Exponential {
                coeff: coeff * rate,
                rate: *rate,
            },
            FunctionKind::Poisson {
                tau,
                profile,
                order,
            } => {
                if *order >= 2 {
                    return Err(Error::UnsupportedDerivative(order + 1));
                }
                FunctionKind::Poisson {
                    tau: *tau,
                    profile: *profile,
                    order: order + 1,
                }
            }
        };
        Ok(Self {
            kind,
            ring: self.ring,
            quadrature: self.quadrature,
        })
    }

    /// Evaluator for `∫ f(ζ)/ζ² dζ`.
    pub fn antiderivative_over_zeta_squared(
        &self,
        branch: LogBranch,
    ) -> Result<ZetaSquaredAntiderivative> {
        match &self.kind {
            FunctionKind::Laurent(p) => {
                let log_coeff = p.coefficient(1);
                let powers = LaurentPoly::new(
                    p.terms()
                        .iter()
                        .filter(|t| t.0 != 1)
                        .map(|&(k, c)| (k - 1, c / (k - 1) as f64)),
                )?;
                Ok(ZetaSquaredAntiderivative::Laurent {
                    powers,
                    log_coeff,
                    branch,
                })
            }
            FunctionKind::Poisson { order: 0, .. } => Ok(ZetaSquaredAntiderivative::Path {
                f: self.clone(),
                branch,
            }),
            _ => Err(Error::Invalid(
                "antiderivative over ζ² is available for Laurent and Poisson kinds".into(),
            )),
        }
    }

    /// Best-effort closed-form preimage of `target`, used to seed Newton solves.
    pub fn inverse_seed(&self, target: Complex64) -> Option<Complex64> {
        match &self.kind {
            FunctionKind::Exponential { coeff, rate } => Some((target / coeff).ln() / rate),
            FunctionKind::Laurent(p) => {
                let t = p.terms();
                let c0 = p.coefficient(0);
                match t.iter().map(|x| x.0).max() {
                    Some(1) if t.iter().all(|x| x.0 == 0 || x.0 == 1) => {
                        Some((target - c0) / p.coefficient(1))
                    }
                    Some(2) if t.iter().all(|x| x.0 == 0 || x.0 == 2) => {
                        Some(((target - c0) / p.coefficient(2)).sqrt())
                    }
                    _ => None,
                }
            }
            FunctionKind::Poisson { .. } => None,
        }
    }

    /// Newton solve of `f(z) = target` from `seed`.
    pub fn solve(&self, target: Complex64, seed: Complex64) -> Result<Complex64> {
        let df = self.derivative()?;
        let mut z = seed;
        let scale = target.norm().max(1.0);
        for it in 0..100 {
            let r = self.eval(z)? - target;
            if r.norm() <= 1e-15 * scale {
                return Ok(z);
            }
            let d = df.eval(z)?;
            if d.norm() == 0.0 {
                return Err(Error::Degenerate("Newton step (vanishing derivative)"));
            }
            let step = r / d;
            z -= step;
            if step.norm() <= 1e-16 * z.norm().max(1.0) && it > 2 {
                return Ok(z);
            }
        }
        let r = (self.eval(z)? - target).norm();
        if r <= 1e-12 * scale {
            Ok(z)
        } else {
            Err(Error::NoConvergence {
                iterations: 100,
                update: r,
            })
        }
    }
}

/// Evaluator for `∫ f(ζ)/ζ² dζ`.
#[derive(Clone, Debug)]
pub enum ZetaSquaredAntiderivative {
    /// Termwise `Σ f_k ζ^{k-1}/(k-1)` plus `f_1 log ζ`.
    Laurent {
        powers: LaurentPoly,
        log_coeff: Complex64,
        branch: LogBranch,
    },
    /// Numerical integral along the path `1 -> |ζ|` (real axis) followed by
    /// the circular arc of radius `|ζ|` to `ζ`, with the angle taken on `branch`.
    Path { f: AnalyticFunction, branch: LogBranch },
}

impl ZetaSquaredAntiderivative {
    pub fn log_flag(&self) -> bool {
        match self {
            ZetaSquaredAntiderivative::Laurent { log_coeff, .. } => {
                *log_coeff != Complex64::new(0.0, 0.0)
            }
            ZetaSquaredAntiderivative::Path { .. } => true,
        }
    }

    pub fn branch(&self) -> LogBranch {
        match self {
            ZetaSquaredAntiderivative::Laurent { branch, .. }
            | ZetaSquaredAntiderivative::Path { branch, .. } => *branch,
        }
    }

    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == c(0.0, 0.0) {
            return Err(Error::ZeroParameter);
        }
        match self {
            ZetaSquaredAntiderivative::Laurent {
                powers,
                log_coeff,
                branch,
            } => {
                let mut v = powers.eval(zeta);
                if *log_coeff != c(0.0, 0.0) {
                    v += log_coeff * branch.ln(zeta);
                }
                Ok(v)
            }
            ZetaSquaredAntiderivative::Path { f, branch } => {
                let tau = match f.kind() {
                    FunctionKind::Poisson { tau, .. } => *tau,
                    _ => unreachable!("path evaluator is built for the Poisson kind"),
                };
                let r = zeta.norm();
                let theta = branch.arg(zeta);
                let (lo, hi) = (theta.min(0.0), theta.max(0.0));
                if (r - 1.0).abs() < 1e-12 && hi.max(-lo) >= tau - 1e-12 {
                    return Err(Error::PathCrossesArc { zeta });
                }
                let opts = f.quadrature;
                let radial = integrate(
                    |x| Ok(f.eval(c(x, 0.0))? / (x * x)),
                    1.0,
                    r,
                    &opts,
                )?;
                let arc = if theta == 0.0 {
                    c(0.0, 0.0)
                } else {
                    integrate(
                        |a| {
                            let p = Complex64::from_polar(r, a);
                            Ok(f.eval(p)? / (p * p) * c(0.0, 1.0) * p)
                        },
                        0.0,
                        theta,
                        &opts,
                    )?
                    .value
                };
                Ok(radial.value + arc)
            }
        }
    }
}
