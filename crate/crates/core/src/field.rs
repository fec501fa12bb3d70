//! Leading-order evanescent-wave field `e^{kv} cos(ku)` from an eikonal
//! `φ = u + iv`, with transport amplitudes and phases set to zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub z: Complex64,
    pub u: f64,
    pub v: f64,
    pub k: f64,
    pub w_leading: f64,
}

impl FieldSample {
    pub fn new(z: Complex64, u: f64, v: f64, k: f64) -> Self {
        Self {
            z,
            u,
            v,
            k,
            w_leading: (k * v).exp() * (k * u).cos(),
        }
    }

    pub fn envelope(&self) -> f64 {
        (self.k * self.v).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldReport {
    pub samples: Vec<FieldSample>,
    /// Constant subtracted from every `v`.
    pub v_offset: f64,
    /// Samples with `v > 0` after normalization (computed anyway).
    pub positive_v: usize,
}

/// Offset that makes `max v = 0` over the light samples; `0` without any.
pub fn light_offset(phi: &[Complex64], light: &[bool]) -> f64 {
    let m = phi
        .iter()
        .zip(light)
        .filter(|(_, &l)| l)
        .map(|(p, _)| p.im)
        .fold(f64::NEG_INFINITY, f64::max);
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

/// Field at `(z, φ(z))` pairs for wave number `k`, with `v` shifted by
/// `v_offset` first.
pub fn eval_field(points: &[(Complex64, Complex64)], k: f64, v_offset: f64, exec: Execution) -> Result<FieldReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Invalid(format!("wave number must be positive, got {k}")));
    }
    let samples = exec.map(points, |&(z, phi)| FieldSample::new(z, phi.re, phi.im - v_offset, k));
    let positive_v = samples.iter().filter(|s| s.v > 0.0).count();
    Ok(FieldReport {
        samples,
        v_offset,
        positive_v,
    })
}
