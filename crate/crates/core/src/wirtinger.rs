//! Wirtinger derivatives: finite-difference stencils and the Legendre
//! (hodograph) inversion between the `z` and `ζ` planes.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// The pair `(∂_ζ F, ∂_ζ̄ F)` of a complex function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WirtingerPair {
    pub d_zeta: Complex64,
    pub d_zeta_bar: Complex64,
}

impl WirtingerPair {
    pub fn new(d_zeta: Complex64, d_zeta_bar: Complex64) -> Self {
        Self { d_zeta, d_zeta_bar }
    }

    /// Derivatives of the conjugate function: `(∂_ζ F̄, ∂_ζ̄ F̄)`.
    pub fn conjugate(&self) -> Self {
        Self {
            d_zeta: self.d_zeta_bar.conj(),
            d_zeta_bar: self.d_zeta.conj(),
        }
    }

    /// `|F_ζ|² - |F_ζ̄|²`, the real jacobian of the map.
    pub fn jacobian(&self) -> f64 {
        self.d_zeta.norm_sqr() - self.d_zeta_bar.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.d_zeta.is_finite() && self.d_zeta_bar.is_finite()
    }
}

/// Partial derivatives `(F_x, F_y)` by second-order central differences.
pub fn partials_central<F: Fn(Complex64) -> Complex64>(
    f: F,
    z: Complex64,
    h: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let fx = (f(z + h) - f(z - h)) / (2.0 * h);
    let fy = (f(z + i * h) - f(z - i * h)) / (2.0 * h);
    (fx, fy)
}

/// Partial derivatives `(F_x, F_y)` by the fourth-order five-point stencil.
pub fn partials_central4<F: Fn(Complex64) -> Complex64>(
    f: F,
    z: Complex64,
    h: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let d = |dir: Complex64| {
        (-f(z + 2.0 * h * dir) + 8.0 * f(z + h * dir) - 8.0 * f(z - h * dir) + f(z - 2.0 * h * dir))
            / (12.0 * h)
    };
    (d(Complex64::new(1.0, 0.0)), d(i))
}

pub fn pair_from_partials(fx: Complex64, fy: Complex64) -> WirtingerPair {
    let i = Complex64::new(0.0, 1.0);
    WirtingerPair {
        d_zeta: 0.5 * (fx - i * fy),
        d_zeta_bar: 0.5 * (fx + i * fy),
    }
}

pub fn wirtinger_central<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> WirtingerPair {
    let (fx, fy) = partials_central(f, z, h);
    pair_from_partials(fx, fy)
}

pub fn wirtinger_central4<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> WirtingerPair {
    let (fx, fy) = partials_central4(f, z, h);
    pair_from_partials(fx, fy)
}

pub fn d_zeta_bar_central<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    wirtinger_central(f, z, h).d_zeta_bar
}

/// `F'(z)` for analytic `F`, differencing along the real axis only.
pub fn derivative_central<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// Converts `(φ_ζ, φ_ζ̄)` into `(φ_z, φ_z̄)` given the derivatives of the
/// inverse map `z(ζ)`:
///
/// `φ_z = (φ_ζ z̄_ζ̄ - φ_ζ̄ z̄_ζ) / J`, `φ_z̄ = (φ_ζ̄ z_ζ - φ_ζ z_ζ̄) / J`,
/// with `J = |z_ζ|² - |z_ζ̄|²`.
pub fn legendre_invert(phi: WirtingerPair, z: WirtingerPair) -> Result<(Complex64, Complex64)> {
    let j = z.jacobian();
    let scale = z.d_zeta.norm_sqr() + z.d_zeta_bar.norm_sqr();
    if !(j.abs() > 1e-14 * scale) || !j.is_finite() {
        return Err(Error::DegenerateJacobian { jacobian: j });
    }
    let zb = z.conjugate();
    let phi_z = (phi.d_zeta * zb.d_zeta_bar - phi.d_zeta_bar * zb.d_zeta) / j;
    let phi_zb = (phi.d_zeta_bar * z.d_zeta - phi.d_zeta * z.d_zeta_bar) / j;
    Ok((phi_z, phi_zb))
}
