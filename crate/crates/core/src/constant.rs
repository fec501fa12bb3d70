//! Constant-index eikonals (`n ≡ 1`) parametrized by an analytic seed `f`.
//!
//! For `|ζ| != 1`,
//!
//! ```text
//! z(ζ) = (f + ζ² f̄) / (1 - |ζ|⁴)
//! φ(ζ) = (ζ f̄ + f/ζ) / (1 - |ζ|⁴) - f/(2ζ) + ½ ∫ f/ζ² dζ + c
//! ```
//!
//! solves `4 φ_z φ_z̄ = 1` wherever the Legendre jacobian is nonzero, with the
//! hyperbola parameter `φ_z = 1/(2ζ)`, `φ_z̄ = ζ/2`.

use crate::analytic::{AnalyticFunction, LogBranch, ZetaSquaredAntiderivative};
use crate::error::{Error, Result};
use crate::wirtinger::{legendre_invert, WirtingerPair};
use num_complex::Complex64;

/// Distance from the unit circle, measured as `|1 - |ζ|⁴|`, below which the
/// parametrization refuses to evaluate.
pub const UNIT_CIRCLE_GUARD: f64 = 1e-12;

/// `z = (f + ζ² f̄)/(1 - |ζ|⁴)` from an already evaluated seed value `f(ζ)`.
pub fn seed_to_z(f_value: Complex64, zeta: Complex64) -> Result<Complex64> {
    let d = ParametrizedEikonal::guard(zeta)?;
    Ok((f_value + zeta * zeta * f_value.conj()) / d)
}

#[derive(Clone, Debug)]
pub struct ParametrizedEikonal {
    f: AnalyticFunction,
    df: AnalyticFunction,
    primitive: ZetaSquaredAntiderivative,
    pub phi_constant: Complex64,
}

/// `z` together with its Wirtinger derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ZPoint {
    pub z: Complex64,
    pub derivs: WirtingerPair,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl ParametrizedEikonal {
    pub fn new(f: AnalyticFunction) -> Result<Self> {
        Self::with_branch(f, LogBranch::default(), zero())
    }

    pub fn with_branch(
        f: AnalyticFunction,
        branch: LogBranch,
        phi_constant: Complex64,
    ) -> Result<Self> {
        let df = f.derivative()?;
        let primitive = f.antiderivative_over_zeta_squared(branch)?;
        Ok(Self {
            f,
            df,
            primitive,
            phi_constant,
        })
    }

    pub fn f(&self) -> &AnalyticFunction {
        &self.f
    }

    pub fn branch(&self) -> LogBranch {
        self.primitive.branch()
    }

    pub fn log_flag(&self) -> bool {
        self.primitive.log_flag()
    }

    fn guard(zeta: Complex64) -> Result<f64> {
        let d = 1.0 - zeta.norm_sqr() * zeta.norm_sqr();
        if d.abs() < UNIT_CIRCLE_GUARD {
            return Err(Error::UnitCircle { zeta });
        }
        Ok(d)
    }

    pub fn eval_z(&self, zeta: Complex64) -> Result<Complex64> {
        Self::guard(zeta)?;
        seed_to_z(self.f.eval(zeta)?, zeta)
    }

    /// `z` and `(z_ζ, z_ζ̄)`, differentiating the closed form analytically.
    pub fn eval_z_derivs(&self, zeta: Complex64) -> Result<ZPoint> {
        let d = Self::guard(zeta)?;
        let fz = self.f.eval(zeta)?;
        let dfz = self.df.eval(zeta)?;
        let zb = zeta.conj();
        let num = fz + zeta * zeta * fz.conj();
        let num_z = dfz + 2.0 * zeta * fz.conj();
        let num_zb = zeta * zeta * dfz.conj();
        let d_z = -2.0 * zeta * zb * zb;
        let d_zb = -2.0 * zeta * zeta * zb;
        Ok(ZPoint {
            z: num / d,
            derivs: WirtingerPair::new(
                (num_z * d - num * d_z) / (d * d),
                (num_zb * d - num * d_zb) / (d * d),
            ),
        })
    }

    pub fn eval_phi(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == zero() {
            return Err(Error::ZeroParameter);
        }
        let d = Self::guard(zeta)?;
        let fz = self.f.eval(zeta)?;
        let prim = self.primitive.eval(zeta)?;
        Ok((zeta * fz.conj() + fz / zeta) / d - fz / (2.0 * zeta) + 0.5 * prim + self.phi_constant)
    }

    /// Closed forms of `φ_ζ` and `φ_ζ̄`.
    pub fn phi_wirtinger(&self, zeta: Complex64) -> Result<WirtingerPair> {
        if zeta == zero() {
            return Err(Error::ZeroParameter);
        }
        let d = Self::guard(zeta)?;
        let fz = self.f.eval(zeta)?;
        let dfz = self.df.eval(zeta)?;
        let zb = zeta.conj();
        let r2 = zeta.norm_sqr();
        let r4 = r2 * r2;
        let d_zeta = (1.0 + r4) / (d * d) * (dfz / (2.0 * zeta) * d + zb * zb * fz + fz.conj());
        let d_zeta_bar =
            2.0 * r2 / (d * d) * (dfz.conj() / (2.0 * zb) * d + zeta * zeta * fz.conj() + fz);
        Ok(WirtingerPair::new(d_zeta, d_zeta_bar))
    }

    /// `(φ_z, φ_z̄)` obtained through the Legendre inversion.
    pub fn phi_z(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        let phi = self.phi_wirtinger(zeta)?;
        let zp = self.eval_z_derivs(zeta)?;
        legendre_invert(phi, zp.derivs)
    }

    /// `|4 φ_z φ_z̄ - 1|`.
    pub fn eikonal_residual(&self, zeta: Complex64) -> Result<f64> {
        let (pz, pzb) = self.phi_z(zeta)?;
        Ok((4.0 * pz * pzb - 1.0).norm())
    }

    /// `v_x + i v_y` for `v = Im φ`, recovered from the jacobian identity
    /// `|ζ_z|² - |ζ_z̄|² = -2i ζ̄ |ζ_z|² (|ζ|² + 1)(v_x + i v_y)`.
    pub fn grad_v(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == zero() {
            return Err(Error::ZeroParameter);
        }
        let zp = self.eval_z_derivs(zeta)?;
        let j = zp.derivs.jacobian();
        if !(j.abs() > 0.0) || !j.is_finite() {
            return Err(Error::DegenerateJacobian { jacobian: j });
        }
        // ζ_z = conj(z_ζ)/J and ζ_z̄ = -z_ζ̄/J for the inverse map.
        let zeta_z_sq = zp.derivs.d_zeta.norm_sqr() / (j * j);
        let j_inv = 1.0 / j;
        let i = Complex64::new(0.0, 1.0);
        Ok(j_inv / (-2.0 * i * zeta.conj() * zeta_z_sq * (zeta.norm_sqr() + 1.0)))
    }
}

/// One square-root branch of the quadratic-seed inversion.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticBranch {
    pub zeta: Complex64,
    /// `None` when the logarithm's argument degenerates (zero or infinite).
    pub phi: Option<Complex64>,
}

/// Closed-form inversion for `f(ζ) = f0 + f1 ζ + f2 ζ²`: returns the `+√` and
/// `-√` branches of
///
/// ```text
/// ζ = (-f1 ± √R) / (2(z̄ + f2)),          R = f1² + 4(z - f0)(z̄ + f2)
/// φ = ½ √R - ½ f1 log((√R + f1)/(z - f0)) + c
/// ```
///
/// with the principal square root and logarithm. On the `+` branch,
/// `(√R + f1)/(z - f0) = 2/ζ`, so this `φ` differs from the parametrized one by
/// `-½ f1 log 2` plus any `2πi` multiples of `½ f1` picked up by the two logs.
pub fn quadratic_closed_form(
    f0: Complex64,
    f1: Complex64,
    f2: Complex64,
    z: Complex64,
    c: Complex64,
) -> Result<[QuadraticBranch; 2]> {
    let den = z.conj() + f2;
    if den.norm() < 1e-300 {
        return Err(Error::Degenerate("quadratic closed form (z̄ + f2 = 0)"));
    }
    let rad = f1 * f1 + 4.0 * (z - f0) * den;
    let root = rad.sqrt();
    let branch = |s: Complex64| {
        let zeta = (-f1 + s) / (2.0 * den);
        let phi = if f1 == zero() {
            Some(0.5 * s + c)
        } else {
            let arg = (s + f1) / (z - f0);
            if arg.is_finite() && arg != zero() {
                Some(0.5 * s - 0.5 * f1 * arg.ln() + c)
            } else {
                None
            }
        };
        QuadraticBranch { zeta, phi }
    };
    Ok([branch(root), branch(-root)])
}
