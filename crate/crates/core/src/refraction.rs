//! Variable refraction index: the coefficient chain from `ℓ = log n` to the
//! canonical-form data, and the biholomorphic shortcut for `n = |w'|`.
//!
//! The inverse map `z(ζ)` of a solution obeys
//! `b z_ζ + a z̄_ζ̄ - c z_ζ̄ - d z̄_ζ = 0` with
//! `a = 1 + ζℓ_ζ`, `b = -ℓ_ζ̄/ζ`, `c = (1 - ζℓ_ζ)/ζ²`, `d = ζℓ_ζ̄`.
//!
//! Two conventions for the reduced equation `z_ζ̄ = μ z_ζ + ν z̄_ζ̄` are kept
//! side by side: [`mu_nu_published`] evaluates the published quotients in the
//! `A_ij`, while [`mu_nu_from_abcd`] solves the equation above and its
//! conjugate for `(z_ζ̄, z̄_ζ)` directly. Only the latter reproduces
//! `ν = ζ²` for a constant index (see the tests).

use num_complex::Complex64;

use crate::analytic::AnalyticFunction;
use crate::constant::ParametrizedEikonal;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::wirtinger::{legendre_invert, wirtinger_central4, WirtingerPair};

/// Slack for the claimed modulus bounds `|μ|+|ν|`, `|σ|`, `|κ|` `< 1`.
pub const MODULUS_SLACK: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ℓ` with its Wirtinger derivatives at a point (`ℓ` real, so
/// `ℓ_ζ̄ = conj ℓ_ζ`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllJet {
    pub ell: f64,
    pub d: Complex64,
    pub d_bar: Complex64,
}

impl EllJet {
    pub fn from_gradient(ell: f64, d: Complex64) -> Self {
        Self {
            ell,
            d,
            d_bar: d.conj(),
        }
    }
}

/// Named `ℓ(ζ)` profiles over the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EllProfile {
    Constant { ell: f64 },
    /// `ℓ₀ + Re(ḡ ζ)`, i.e. gradient `g` in `(x, y)` form.
    Linear { ell0: f64, gradient: Complex64 },
    /// `ℓ₀ + A exp(-|ζ - c|²/w²)`.
    Gaussian {
        ell0: f64,
        amplitude: f64,
        center: Complex64,
        width: f64,
    },
}

impl EllProfile {
    pub fn jet(&self, zeta: Complex64) -> EllJet {
        match *self {
            EllProfile::Constant { ell } => EllJet::from_gradient(ell, c(0.0, 0.0)),
            EllProfile::Linear { ell0, gradient } => {
                let ell = ell0 + (gradient.conj() * zeta).re;
                EllJet::from_gradient(ell, 0.5 * gradient.conj())
            }
            EllProfile::Gaussian {
                ell0,
                amplitude,
                center,
                width,
            } => {
                let dz = zeta - center;
                let g = amplitude * (-dz.norm_sqr() / (width * width)).exp();
                EllJet::from_gradient(ell0 + g, -g * dz.conj() / (width * width))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            EllProfile::Constant { .. } => true,
            EllProfile::Linear { gradient, .. } => gradient == c(0.0, 0.0),
            EllProfile::Gaussian { amplitude, .. } => amplitude == 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum RefractionField {
    Constant { n0: f64 },
    /// `n = |w'(z)|`.
    ModAnalytic { w: AnalyticFunction },
    /// `ℓ` prescribed over the ζ-plane.
    ParametricEll(EllProfile),
}

impl RefractionField {
    pub fn constant(n0: f64) -> Result<Self> {
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::Invalid(format!("index must be positive, got {n0}")));
        }
        Ok(RefractionField::Constant { n0 })
    }

    /// `ℓ` over the ζ-plane. Only defined for the constant and parametric
    /// kinds; for `|w'|` the index lives on the z-plane (see [`Self::ell_z`]).
    pub fn ell_zeta(&self, zeta: Complex64) -> Result<EllJet> {
        match self {
            RefractionField::Constant { n0 } => Ok(EllJet::from_gradient(n0.ln(), c(0.0, 0.0))),
            RefractionField::ParametricEll(p) => Ok(p.jet(zeta)),
            RefractionField::ModAnalytic { .. } => Err(Error::Invalid(
                "ℓ of a |w'| index depends on z; use the biholomorphic reduction".into(),
            )),
        }
    }

    /// `ℓ` with z-plane Wirtinger derivatives, for the kinds defined on z.
    pub fn ell_z(&self, z: Complex64) -> Result<EllJet> {
        match self {
            RefractionField::Constant { n0 } => Ok(EllJet::from_gradient(n0.ln(), c(0.0, 0.0))),
            RefractionField::ModAnalytic { w } => {
                let dw = w.derivative()?;
                let w1 = dw.eval(z)?;
                if w1.norm() == 0.0 {
                    return Err(Error::Degenerate("w' vanishes"));
                }
                let w2 = dw.derivative()?.eval(z)?;
                // ℓ = Re log w', so ℓ_z = w''/(2w')
                Ok(EllJet::from_gradient(w1.norm().ln(), w2 / (2.0 * w1)))
            }
            RefractionField::ParametricEll(_) => Err(Error::Invalid(
                "parametric ℓ is given over the ζ-plane".into(),
            )),
        }
    }
}

/// `ℓ_ζ` implied by a z-plane index through a computed `z(ζ)`; comparing it
/// with the prescribed `ℓ_ζ` measures self-consistency.
pub fn chain_ell_zeta(ell_z: &EllJet, z: &WirtingerPair) -> Complex64 {
    ell_z.d * z.d_zeta + ell_z.d_bar * z.d_zeta_bar.conj()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

pub fn coeffs_abcd(ell_zeta: Complex64, ell_zeta_bar: Complex64, zeta: Complex64) -> Result<Abcd> {
    if zeta.norm() == 0.0 {
        return Err(Error::ZeroParameter);
    }
    Ok(Abcd {
        a: 1.0 + zeta * ell_zeta,
        b: -ell_zeta_bar / zeta,
        c: (1.0 - zeta * ell_zeta) / (zeta * zeta),
        d: zeta * ell_zeta_bar,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ACoeffs {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl ACoeffs {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    /// `4A₁₂A₂₁ - (A₁₁+A₂₂)²`.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.a12 * self.a21 - (self.a11 + self.a22).powi(2)
    }

    /// The published condition: positive discriminant and `A₁₂ > 0`.
    pub fn is_elliptic(&self) -> bool {
        self.discriminant() > 0.0 && self.a12 > 0.0
    }

    /// Ellipticity without the orientation requirement on `A₁₂`.
    pub fn is_elliptic_unsigned(&self) -> bool {
        self.discriminant() > 0.0
    }
}

/// Coefficients of the real system `y_ξ = A₁₁x_ξ + A₁₂x_η`,
/// `-y_η = A₂₁x_ξ + A₂₂x_η`.
pub fn coeffs_a(k: &Abcd) -> Result<ACoeffs> {
    let (a, b, cc, d) = (k.a, k.b, k.c, k.d);
    let den = (a + cc).norm_sqr() - (b + d).norm_sqr();
    let scale = (a.norm() + b.norm() + cc.norm() + d.norm()).powi(2);
    if den.abs() <= 1e-14 * scale {
        return Err(Error::Degenerate("|a+c|² - |b+d|² vanishes"));
    }
    Ok(ACoeffs {
        a11: 2.0 * ((a + b) * (cc + d).conj()).im / den,
        a12: ((a + d).norm_sqr() - (b + cc).norm_sqr()) / den,
        a21: ((a - d).norm_sqr() - (b - cc).norm_sqr()) / den,
        a22: 2.0 * ((a - b).conj() * (cc - d)).im / den,
    })
}

/// The published quotients for `(μ, ν)` in terms of the `A_ij`.
pub fn mu_nu_published(a: &ACoeffs) -> Result<(Complex64, Complex64)> {
    let den = 2.0 - (a.a12 + a.a21) + a.a12 * a.a21 - a.a11 * a.a22;
    if den.abs() <= 1e-14 {
        return Err(Error::Degenerate("μ,ν denominator vanishes"));
    }
    let mu = c(a.a11 + a.a22, a.a12 - a.a21) / den;
    let nu = c(1.0 + a.a11 * a.a22 - a.a12 * a.a21, -(a.a22 - a.a11)) / den;
    Ok((mu, nu))
}

/// `(μ, ν)` from solving the inverse equation and its conjugate for
/// `(z_ζ̄, z̄_ζ)`: `μ = (b c̄ - ā d)/(|c|² - |d|²)`, `ν = (a c̄ - b̄ d)/(|c|² - |d|²)`.
pub fn mu_nu_from_abcd(k: &Abcd) -> Result<(Complex64, Complex64)> {
    let den = k.c.norm_sqr() - k.d.norm_sqr();
    let scale = k.c.norm_sqr() + k.d.norm_sqr();
    if den.abs() <= 1e-14 * scale || scale == 0.0 {
        return Err(Error::Degenerate("|c|² - |d|² vanishes"));
    }
    let mu = (k.b * k.c.conj() - k.a.conj() * k.d) / den;
    let nu = (k.a * k.c.conj() - k.b.conj() * k.d) / den;
    Ok((mu, nu))
}

/// `(μ, ν)` read off the real system in `A_ij`: both sides of
/// `z_ζ̄ = μ z_ζ + ν z̄_ζ̄` are R-linear in `(x_ξ, x_η)`, so the two basis
/// choices `(1, 0)` and `(0, 1)` determine `μ, ν`.
pub fn mu_nu_from_a(a: &ACoeffs) -> Result<(Complex64, Complex64)> {
    let i = c(0.0, 1.0);
    let wirt = |p: f64, q: f64| {
        let (yx, yy) = (a.a11 * p + a.a12 * q, -(a.a21 * p + a.a22 * q));
        let (zx, zy) = (c(p, yx), c(q, yy));
        (0.5 * (zx - i * zy), 0.5 * (zx + i * zy))
    };
    let (d1, db1) = wirt(1.0, 0.0);
    let (d2, db2) = wirt(0.0, 1.0);
    // [d1 d̄1; d2 d̄2] (μ, ν)ᵀ = (db1, db2)ᵀ
    let det = d1 * d2.conj() - d1.conj() * d2;
    if det.norm() <= 1e-14 * (d1.norm() * d2.norm()).max(1e-300) {
        return Err(Error::Degenerate("real system does not determine μ,ν"));
    }
    let mu = (db1 * d2.conj() - d1.conj() * db2) / det;
    let nu = (d1 * db2 - d2 * db1) / det;
    Ok((mu, nu))
}

/// The published Beltrami coefficient in terms of the `A_ij`.
pub fn sigma_published(a: &ACoeffs) -> Result<Complex64> {
    if !a.is_elliptic() {
        return Err(Error::NonElliptic);
    }
    let num = c(a.a12 - a.a21, -(a.a11 + a.a22));
    Ok(num / (a.a12 + a.a21 + a.discriminant().sqrt()))
}

/// Beltrami coefficient making `Z = z∘χ⁻¹` canonical: the root of
/// `μ̄σ² - (1 + |μ|² - |ν|²)σ + μ = 0` of modulus below one.
pub fn sigma_from_mu_nu(mu: Complex64, nu: Complex64) -> Result<Complex64> {
    let p = 1.0 + mu.norm_sqr() - nu.norm_sqr();
    if mu.norm() == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let disc = p * p - 4.0 * mu.norm_sqr();
    if disc < 0.0 {
        return Err(Error::NonElliptic);
    }
    // stable small root: 2μ/(p ± √disc) with the sign of p
    let q = p + p.signum() * disc.sqrt();
    if q == 0.0 {
        return Err(Error::NonElliptic);
    }
    let s = 2.0 * mu / q;
    if s.norm() >= 1.0 {
        return Err(Error::ModulusBound {
            what: "sigma",
            value: s.norm(),
        });
    }
    Ok(s)
}

pub fn kappa(mu: Complex64, nu: Complex64, sigma: Complex64) -> Result<Complex64> {
    let den = 1.0 - mu * sigma.conj();
    if den.norm() <= 1e-14 {
        return Err(Error::Degenerate("1 - μσ̄ vanishes"));
    }
    Ok(nu / den)
}

/// `B = -κ̄ κ_χ̄/(1 - |κ|²)`, `C = -κ_χ̄/(1 - |κ|²)`.
pub fn coeffs_bc(kappa: Complex64, kappa_chi_bar: Complex64) -> Result<(Complex64, Complex64)> {
    let m = kappa.norm();
    if m >= 1.0 - MODULUS_SLACK {
        return Err(Error::ModulusBound {
            what: "kappa",
            value: m,
        });
    }
    let cc = -kappa_chi_bar / (1.0 - m * m);
    Ok((kappa.conj() * cc, cc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// The published `μ, ν` and `σ` quotients.
    Published,
    /// `μ, ν` solved from `a, b, c, d`; `σ` from the canonical-form quadratic.
    #[default]
    Rederived,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientPoint {
    pub zeta: Complex64,
    pub abcd: Abcd,
    pub a: Option<ACoeffs>,
    pub mu: Option<Complex64>,
    pub nu: Option<Complex64>,
    pub sigma: Option<Complex64>,
    pub kappa: Option<Complex64>,
    /// Published ellipticity (`A₁₂ > 0` included).
    pub elliptic: bool,
    /// `|μ|+|ν|`, `|σ|`, `|κ|` all below one (with slack).
    pub moduli_ok: bool,
}

impl CoefficientPoint {
    pub fn compute(zeta: Complex64, jet: &EllJet, convention: Convention) -> Result<Self> {
        let abcd = coeffs_abcd(jet.d, jet.d_bar, zeta)?;
        let a = coeffs_a(&abcd).ok();
        let elliptic = a.map_or(false, |a| a.is_elliptic());
        let (mu, nu, sigma) = match convention {
            Convention::Published => {
                let mn = a.and_then(|a| mu_nu_published(&a).ok());
                let s = a.and_then(|a| sigma_published(&a).ok());
                (mn.map(|x| x.0), mn.map(|x| x.1), s)
            }
            Convention::Rederived => {
                let mn = mu_nu_from_abcd(&abcd).ok();
                let s = mn.and_then(|(m, n)| sigma_from_mu_nu(m, n).ok());
                (mn.map(|x| x.0), mn.map(|x| x.1), s)
            }
        };
        let kappa = match (mu, nu, sigma) {
            (Some(m), Some(n), Some(s)) => kappa(m, n, s).ok(),
            _ => None,
        };
        let bound = 1.0 - MODULUS_SLACK;
        let moduli_ok = match (mu, nu, sigma, kappa) {
            (Some(m), Some(n), Some(s), Some(k)) => {
                m.norm() + n.norm() < bound && s.norm() < bound && k.norm() < bound
            }
            _ => false,
        };
        Ok(Self {
            zeta,
            abcd,
            a,
            mu,
            nu,
            sigma,
            kappa,
            elliptic,
            moduli_ok,
        })
    }
}

/// Coefficient bundle over a set of parameter nodes (row-major grid order
/// when built from a grid). Written once, then read-only.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub convention: Convention,
    pub points: Vec<Option<CoefficientPoint>>,
}

impl CoefficientField {
    pub fn build(
        nodes: &[Complex64],
        index: &RefractionField,
        convention: Convention,
        exec: Execution,
    ) -> Result<Self> {
        if matches!(index, RefractionField::ModAnalytic { .. }) {
            return Err(Error::Invalid(
                "|w'| indices go through the biholomorphic reduction".into(),
            ));
        }
        let points = exec.map(nodes, |&z| {
            let jet = index.ell_zeta(z).ok()?;
            CoefficientPoint::compute(z, &jet, convention).ok()
        });
        Ok(Self { convention, points })
    }

    pub fn elliptic_fraction(&self) -> f64 {
        let n = self.points.len().max(1);
        self.points.iter().flatten().filter(|p| p.elliptic).count() as f64 / n as f64
    }

    pub fn max_sigma_on_elliptic(&self) -> f64 {
        self.points
            .iter()
            .flatten()
            .filter(|p| p.elliptic)
            .filter_map(|p| p.sigma.map(|s| s.norm()))
            .fold(0.0, f64::max)
    }
}

/// Residuals of the constant-index consistency checks at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSample {
    pub zeta: Complex64,
    /// `|ζ² z̄_ζ̄ - z_ζ̄|`, relative.
    pub inverse_schwarz: f64,
    /// `|z_ζ̄ - μ z_ζ - ν z̄_ζ̄|`, relative, for each convention.
    pub published: Option<f64>,
    pub rederived: Option<f64>,
    pub from_a: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub samples: Vec<OracleSample>,
}

impl OracleReport {
    fn max_of(&self, g: impl Fn(&OracleSample) -> Option<f64>) -> Option<f64> {
        self.samples.iter().filter_map(g).reduce(f64::max)
    }
    pub fn max_inverse_schwarz(&self) -> f64 {
        self.max_of(|s| Some(s.inverse_schwarz)).unwrap_or(0.0)
    }
    pub fn max_published(&self) -> Option<f64> {
        self.max_of(|s| s.published)
    }
    pub fn max_rederived(&self) -> Option<f64> {
        self.max_of(|s| s.rederived)
    }
    pub fn max_from_a(&self) -> Option<f64> {
        self.max_of(|s| s.from_a)
    }
}

/// Differentiates the constant-index `z(ζ)` numerically at `nodes` and checks
/// the inverse-Schwarz equation and the reduced equation under each `μ, ν`
/// convention. Nodes where `z` is not defined are skipped.
pub fn coefficient_oracle(f: &AnalyticFunction, nodes: &[Complex64], h: f64, exec: Execution) -> OracleReport {
    let jet = EllJet::from_gradient(0.0, c(0.0, 0.0));
    let samples = exec.map(nodes, |&zeta| {
        let pe = ParametrizedEikonal::new(f.clone()).ok();
        // z only needs f; build it without the φ primitive when unavailable
        let zfun = |w: Complex64| -> Complex64 {
            match &pe {
                Some(p) => p.eval_z(w).unwrap_or(c(f64::NAN, f64::NAN)),
                None => f
                    .eval(w)
                    .and_then(|fv| crate::constant::seed_to_z(fv, w))
                    .unwrap_or(c(f64::NAN, f64::NAN)),
            }
        };
        let d = wirtinger_central4(zfun, zeta, h);
        if !d.is_finite() {
            return None;
        }
        let (zz, zzb) = (d.d_zeta, d.d_zeta_bar);
        let zbar_zb = zz.conj();
        let scale = zz.norm() + zzb.norm();
        let inverse_schwarz = (zeta * zeta * zbar_zb - zzb).norm() / scale;
        let resid = |(m, n): (Complex64, Complex64)| (zzb - m * zz - n * zbar_zb).norm() / scale;
        let abcd = coeffs_abcd(jet.d, jet.d_bar, zeta).ok()?;
        let a = coeffs_a(&abcd).ok();
        Some(OracleSample {
            zeta,
            inverse_schwarz,
            published: a.and_then(|a| mu_nu_published(&a).ok()).map(resid),
            rederived: mu_nu_from_abcd(&abcd).ok().map(resid),
            from_a: a.and_then(|a| mu_nu_from_a(&a).ok()).map(resid),
        })
    });
    OracleReport {
        samples: samples.into_iter().flatten().collect(),
    }
}

/// `φ(z) = ψ(w(z))` for `n = |w'|`, where `ψ` solves the unit-index problem
/// in the `w`-plane.
#[derive(Clone, Debug)]
pub struct BiholomorphicReduction {
    w: AnalyticFunction,
    dw: AnalyticFunction,
    psi: ParametrizedEikonal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionSample {
    pub zeta: Complex64,
    /// Point of the `w`-plane, `w(z)`.
    pub w: Complex64,
    pub z: Complex64,
    pub phi: Complex64,
    pub phi_z: Complex64,
    pub phi_zbar: Complex64,
    /// `|w'(z)|`.
    pub n: f64,
    /// `|4 φ_z φ_z̄ - n²|`.
    pub residual: f64,
}

impl BiholomorphicReduction {
    pub fn new(w: AnalyticFunction, f: AnalyticFunction) -> Result<Self> {
        let dw = w.derivative()?;
        Ok(Self {
            w,
            dw,
            psi: ParametrizedEikonal::new(f)?,
        })
    }

    pub fn psi(&self) -> &ParametrizedEikonal {
        &self.psi
    }

    /// The sample whose `w`-plane point is the parametrization at `ζ`; `z`
    /// is found by inverting `w` from its closed-form seed (or `z_seed`).
    pub fn sample(&self, zeta: Complex64, z_seed: Option<Complex64>) -> Result<ReductionSample> {
        let wv = self.psi.eval_z(zeta)?;
        let seed = z_seed
            .or_else(|| self.w.inverse_seed(wv))
            .ok_or(Error::Degenerate("no seed for inverting w"))?;
        let z = self.w.solve(wv, seed)?;
        let w1 = self.dw.eval(z)?;
        if w1.norm() <= 1e-14 {
            return Err(Error::Degenerate("w' vanishes"));
        }
        let (pw, pwb) = self.psi.phi_z(zeta)?;
        let (phi_z, phi_zbar) = (pw * w1, pwb * w1.conj());
        let n = w1.norm();
        Ok(ReductionSample {
            zeta,
            w: wv,
            z,
            phi: self.psi.eval_phi(zeta)?,
            phi_z,
            phi_zbar,
            n,
            residual: (4.0 * phi_z * phi_zbar - n * n).norm(),
        })
    }

    /// `φ(z)` at an arbitrary `z`, locating the parameter by Newton on the
    /// real map `ζ ↦ z_ψ(ζ)` from `zeta_seed`.
    pub fn phi_at(&self, z: Complex64, zeta_seed: Complex64) -> Result<Complex64> {
        let target = self.w.eval(z)?;
        let mut zeta = zeta_seed;
        for _ in 0..60 {
            let p = self.psi.eval_z_derivs(zeta)?;
            let r = target - p.z;
            if r.norm() <= 1e-14 * target.norm().max(1.0) {
                return self.psi.eval_phi(zeta);
            }
            let j = p.derivs.jacobian();
            if j.abs() <= 1e-300 {
                return Err(Error::DegenerateJacobian { jacobian: j });
            }
            zeta += (p.derivs.d_zeta.conj() * r - p.derivs.d_zeta_bar * r.conj()) / j;
        }
        Err(Error::NoConvergence {
            iterations: 60,
            update: (target - self.psi.eval_z(zeta)?).norm(),
        })
    }
}

/// `(φ_z, φ_z̄)` of a variable-index parametrization from its ζ-plane
/// Wirtinger data; a thin wrapper kept here for symmetry with the
/// constant-index path.
pub fn phi_z_from_parameter(phi: WirtingerPair, z: WirtingerPair) -> Result<(Complex64, Complex64)> {
    legendre_invert(phi, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cst() -> EllJet {
        EllJet::from_gradient(0.3, c(0.0, 0.0))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn abcd_examples() {
        let k = coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        assert_eq!(k, Abcd { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.25, 0.0), d: c(0.0, 0.0) });
        let k = coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!(close(k.c, c(-1.0, 0.0), 1e-15) && close(k.a, c(1.0, 0.0), 1e-15));
        let z = c(0.7, -0.4);
        let k = coeffs_abcd(1.0 / z, (1.0 / z).conj(), z).unwrap();
        assert!(close(k.a, c(2.0, 0.0), 1e-15) && k.c.norm() < 1e-15);
        assert_eq!(coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)), Err(Error::ZeroParameter));
    }

    #[test]
    fn a_coefficient_examples() {
        let k = Abcd { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.25, 0.0), d: c(0.0, 0.0) };
        let a = coeffs_a(&k).unwrap();
        for (x, y) in [(a.a11, 0.0), (a.a12, 0.6), (a.a21, 0.6), (a.a22, 0.0)] {
            assert!((x - y).abs() < 1e-15);
        }
        let k = Abcd { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(-1.0, 0.0), d: c(0.0, 0.0) };
        assert!(coeffs_a(&k).is_err());
        // a = d with b = c sits on the degenerate set |a+c| = |b+d|; the
        // vanishing A₂₁ numerator only needs |a - d| = |b - c|
        let k = Abcd { a: c(0.3, 0.2), b: c(-0.5, 1.0), c: c(-0.5, 1.0), d: c(0.3, 0.2) };
        assert!(coeffs_a(&k).is_err());
        let k = Abcd { a: c(1.3, 0.2), b: c(-0.5, 1.0), c: c(-0.5, 0.4), d: c(1.3, 0.8) };
        assert!(coeffs_a(&k).unwrap().a21.abs() < 1e-15);
    }

    #[test]
    fn ellipticity_examples() {
        assert!(ACoeffs::new(0.0, 0.6, 0.6, 0.0).is_elliptic());
        assert!(!ACoeffs::new(0.0, -0.6, -0.6, 0.0).is_elliptic());
        assert!(ACoeffs::new(0.0, -0.6, -0.6, 0.0).is_elliptic_unsigned());
        assert!(!ACoeffs::new(2.0, 1.0, 1.0, 2.0).is_elliptic());
        // constant ℓ: the published condition holds exactly outside the unit disk
        for (z, inside) in [(c(2.0, 0.0), false), (c(0.5, 0.3), true), (c(-0.2, 1.3), false)] {
            let a = coeffs_a(&coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), z).unwrap()).unwrap();
            assert_eq!(a.is_elliptic(), !inside);
        }
    }

    #[test]
    fn mu_nu_published_examples() {
        let (m, n) = mu_nu_published(&ACoeffs::new(0.0, 0.6, 0.6, 0.0)).unwrap();
        assert!(m.norm() < 1e-15);
        assert!(close(n, c(16.0 / 29.0, 0.0), 1e-15));
        let (m, _) = mu_nu_published(&ACoeffs::new(0.0, 0.35, 0.35, 0.0)).unwrap();
        assert!(m.norm() < 1e-15);
        let (_, n) = mu_nu_published(&ACoeffs::new(0.0, 1.0, 1.0, 0.0)).unwrap();
        assert!(n.norm() < 1e-15);
    }

    #[test]
    fn rederived_mu_nu_reproduce_constant_ground_truth() {
        for z in [c(2.0, 0.0), c(0.4, 0.5), c(-1.3, 0.8)] {
            let k = coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), z).unwrap();
            let (m, n) = mu_nu_from_abcd(&k).unwrap();
            assert!(m.norm() < 1e-15 && close(n, z * z, 1e-13), "{z}");
            let (m2, n2) = mu_nu_from_a(&coeffs_a(&k).unwrap()).unwrap();
            assert!(m2.norm() < 1e-13 && close(n2, z * z, 1e-12), "{z} {n2}");
            let s = sigma_from_mu_nu(m, n).unwrap();
            assert_eq!(s, c(0.0, 0.0));
            assert!(close(kappa(m, n, s).unwrap(), z * z, 1e-13));
        }
        // the published route gives 16/29 at ζ = 2 instead of 4
        let a = coeffs_a(&coeffs_abcd(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).unwrap()).unwrap();
        let (m, n) = mu_nu_published(&a).unwrap();
        let k = kappa(m, n, sigma_published(&a).unwrap()).unwrap();
        assert!(close(k, c(16.0 / 29.0, 0.0), 1e-15));
    }

    #[test]
    fn routes_agree_for_variable_ell() {
        let prof = EllProfile::Gaussian { ell0: 0.1, amplitude: 0.3, center: c(0.4, 0.1), width: 0.5 };
        for z in [c(0.5, 0.2), c(1.4, -0.3), c(-0.7, 0.9)] {
            let j = prof.jet(z);
            let k = coeffs_abcd(j.d, j.d_bar, z).unwrap();
            let r1 = mu_nu_from_abcd(&k).unwrap();
            let r2 = mu_nu_from_a(&coeffs_a(&k).unwrap()).unwrap();
            assert!(close(r1.0, r2.0, 1e-12) && close(r1.1, r2.1, 1e-12), "{z}");
        }
    }

    #[test]
    fn profile_jets_match_differences() {
        let profs = [
            EllProfile::Linear { ell0: 0.2, gradient: c(0.3, -0.7) },
            EllProfile::Gaussian { ell0: 0.0, amplitude: -0.4, center: c(0.1, 0.2), width: 0.3 },
        ];
        for p in profs {
            let z0 = c(0.35, -0.15);
            let j = p.jet(z0);
            let fd = wirtinger_central4(|z| c(p.jet(z).ell, 0.0), z0, 1e-3);
            assert!(close(fd.d_zeta, j.d, 1e-9) && close(fd.d_zeta_bar, j.d_bar, 1e-9));
        }
        assert!(EllProfile::Constant { ell: 1.0 }.is_constant());
    }

    #[test]
    fn sigma_examples() {
        let s = sigma_published(&ACoeffs::new(0.0, 0.6, 0.6, 0.0)).unwrap();
        assert_eq!(s, c(0.0, 0.0));
        let s = sigma_published(&ACoeffs::new(0.5, 0.8, 0.8, -0.5)).unwrap();
        assert!(s.norm() < 1e-16);
        let s = sigma_published(&ACoeffs::new(1.0, 2.0, 1.0, 0.0)).unwrap();
        let want = c(1.0, -1.0) / (3.0 + 7f64.sqrt());
        assert!(close(s, want, 1e-15));
        assert!(s.norm() < 1.0);
        assert_eq!(sigma_published(&ACoeffs::new(2.0, 1.0, 1.0, 2.0)), Err(Error::NonElliptic));
    }

    #[test]
    fn sigma_root_makes_reduction_consistent() {
        let (mu, nu) = (c(0.2, -0.1), c(0.3, 0.25));
        let s = sigma_from_mu_nu(mu, nu).unwrap();
        let k = kappa(mu, nu, s).unwrap();
        // σ = μ + ν σ κ̄ is the coefficient match for Z_χ terms
        assert!(close(s, mu + nu * s * k.conj(), 1e-14));
        assert!(close(k * (1.0 - mu * s.conj()), nu, 1e-15));
    }

    #[test]
    fn kappa_and_bc_examples() {
        assert_eq!(kappa(c(0.0, 0.0), c(0.3, 0.1), c(0.2, 0.5)).unwrap(), c(0.3, 0.1));
        assert_eq!(kappa(c(0.4, 0.0), c(0.0, 0.0), c(0.2, 0.5)).unwrap(), c(0.0, 0.0));
        assert_eq!(coeffs_bc(c(0.3, 0.2), c(0.0, 0.0)).unwrap(), (c(0.0, 0.0), c(0.0, 0.0)));
        let k = c(0.3, -0.4);
        let (b, cc) = coeffs_bc(k, c(0.1, 0.7)).unwrap();
        assert!(close(b / cc, k.conj(), 1e-15));
        let (eps, chi) = (0.05, c(0.4, 0.3));
        let (_, cc) = coeffs_bc(eps * chi.conj(), c(eps, 0.0)).unwrap();
        assert!(close(cc, c(-eps / (1.0 - eps * eps * chi.norm_sqr()), 0.0), 1e-16));
        assert!(coeffs_bc(c(1.0, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn constant_index_field_sigma_vanishes() {
        let nodes: Vec<_> = (0..21)
            .flat_map(|i| (0..21).map(move |j| c(-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64 + 0.05)))
            .collect();
        let idx = RefractionField::constant(1.7).unwrap();
        for conv in [Convention::Published, Convention::Rederived] {
            let f = CoefficientField::build(&nodes, &idx, conv, Execution::default()).unwrap();
            for p in f.points.iter().flatten() {
                if p.elliptic || conv == Convention::Rederived {
                    if let Some(s) = p.sigma {
                        assert!(s.norm() < 1e-12);
                    }
                }
            }
        }
        let f = CoefficientField::build(&nodes, &idx, Convention::Published, Execution::default()).unwrap();
        assert!(f.max_sigma_on_elliptic() < 1e-12);
        assert!(f.elliptic_fraction() > 0.5);
        let _ = cst();
    }

    #[test]
    fn oracle_separates_conventions() {
        let f = AnalyticFunction::from_terms([(0, c(0.3, -0.2)), (1, c(0.5, 0.1)), (2, c(-0.4, 0.7))]).unwrap();
        let nodes = [c(0.4, 0.3), c(1.6, -0.5), c(-0.6, -0.2), c(2.1, 0.9)];
        let r = coefficient_oracle(&f, &nodes, 1e-3, Execution::Sequential);
        assert_eq!(r.samples.len(), 4);
        assert!(r.max_inverse_schwarz() < 1e-8);
        assert!(r.max_rederived().unwrap() < 1e-8);
        assert!(r.max_from_a().unwrap() < 1e-8);
        assert!(r.max_published().unwrap() > 1e-2);
    }

    #[test]
    fn biholomorphic_reduction_residuals() {
        let f = AnalyticFunction::from_terms([(0, c(-1.0, 0.0)), (2, c(-1.0, 0.0))]).unwrap();
        // identity map
        let id = AnalyticFunction::from_terms([(1, c(1.0, 0.0))]).unwrap();
        let red = BiholomorphicReduction::new(id, f.clone()).unwrap();
        let s = red.sample(c(2.0, 0.0), None).unwrap();
        assert!(close(s.z, c(5.0 / 3.0, 0.0), 1e-14) && close(s.phi, c(4.0 / 3.0, 0.0), 1e-12));
        let sq = AnalyticFunction::from_terms([(2, c(1.0, 0.0))]).unwrap();
        let ex = AnalyticFunction::exponential(c(1.0, 0.0), c(1.0, 0.0));
        for w in [sq, ex] {
            let red = BiholomorphicReduction::new(w.clone(), f.clone()).unwrap();
            for zeta in [c(1.5, 0.4), c(0.5, -0.3), c(-2.0, 1.0)] {
                let s = red.sample(zeta, None).unwrap();
                assert!(s.residual < 1e-8, "{zeta} {}", s.residual);
                // independent check: differentiate φ(z) numerically
                let d = wirtinger_central4(|z| red.phi_at(z, zeta).unwrap(), s.z, 1e-4);
                assert!(close(d.d_zeta, s.phi_z, 1e-7), "{} {}", d.d_zeta, s.phi_z);
                assert!(close(d.d_zeta_bar, s.phi_zbar, 1e-7));
            }
        }
    }

    #[test]
    fn self_consistency_of_mod_analytic_index() {
        let w = AnalyticFunction::from_terms([(2, c(1.0, 0.0))]).unwrap();
        let idx = RefractionField::ModAnalytic { w };
        let z0 = c(0.8, -0.3);
        let j = idx.ell_z(z0).unwrap();
        let fd = wirtinger_central4(|z| c(idx.ell_z(z).unwrap().ell, 0.0), z0, 1e-3);
        assert!(close(fd.d_zeta, j.d, 1e-9));
        // through the identity parametrization ℓ_ζ equals ℓ_z
        let pair = WirtingerPair::new(c(1.0, 0.0), c(0.0, 0.0));
        assert!(close(chain_ell_zeta(&j, &pair), j.d, 1e-15));
        assert!(idx.ell_zeta(z0).is_err());
    }
}
