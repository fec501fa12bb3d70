//! The real 2×2 ray system `Z - κ Z̄ = w` and plane-line helpers.
//!
//! Its matrix `[[1 - Re κ, -Im κ], [-Im κ, 1 + Re κ]]` is symmetric with
//! eigenvalues `1 ± |κ|` and determinant `1 - |κ|²`. With `κ = |κ| e^{2iα}` the
//! eigenvectors are `e^{iα}` (for `1 - |κ|`) and `i e^{iα}` (for `1 + |κ|`).

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub point: Complex64,
    /// Unit direction.
    pub direction: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

impl Line {
    pub fn new(point: Complex64, direction: Complex64) -> Self {
        Self {
            point,
            direction: direction / direction.norm(),
        }
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.point + self.direction * t
    }

    /// Unsigned distance from `z` to the line.
    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - self.point) * self.direction.conj()).im.abs()
    }

    /// Signed offset of `z` to the left (+) or right (-) of the direction.
    pub fn side(&self, z: Complex64) -> f64 {
        ((z - self.point) * self.direction.conj()).im
    }

    pub fn coincides(&self, other: &Line, tol: f64) -> bool {
        (self.direction * other.direction.conj()).im.abs() < tol
            && self.distance(other.point) < tol
    }

    /// Portion of the line inside `bbox`, if any (Liang–Barsky).
    pub fn clip(&self, bbox: &BBox) -> Option<(Complex64, Complex64)> {
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        let checks = [
            (self.direction.re, self.point.re, bbox.re_min, bbox.re_max),
            (self.direction.im, self.point.im, bbox.im_min, bbox.im_max),
        ];
        for (d, p, lo, hi) in checks {
            if d.abs() < 1e-300 {
                if p < lo || p > hi {
                    return None;
                }
                continue;
            }
            let (a, b) = ((lo - p) / d, (hi - p) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1).then(|| (self.at(t0), self.at(t1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RaySolution {
    /// Regular system: a unique point.
    Point(Complex64),
    /// Rank-one system with a consistent right-hand side.
    Line(Line),
    /// Rank-one system whose two equations are parallel distinct lines;
    /// `gap` is the component of `w` outside the range.
    Inconsistent { gap: f64 },
}

/// Solves `Z - κ Z̄ = w`. The system counts as rank one when the smaller
/// singular value `|1 - |κ||` is below `rank_tol`, and then as consistent when
/// the out-of-range component of `w` is below `consistency_tol`.
pub fn solve_ray(kappa: Complex64, w: Complex64, rank_tol: f64, consistency_tol: f64) -> RaySolution {
    let m = kappa.norm();
    let rot = if m > 0.0 {
        Complex64::from_polar(1.0, 0.5 * kappa.arg())
    } else {
        Complex64::new(1.0, 0.0)
    };
    let local = w * rot.conj();
    let (p, q) = (local.re, local.im);
    let i = Complex64::new(0.0, 1.0);
    if (1.0 - m).abs() < rank_tol {
        if p.abs() < consistency_tol {
            RaySolution::Line(Line::new(rot * i * (q / (1.0 + m)), rot))
        } else {
            RaySolution::Inconsistent { gap: p.abs() }
        }
    } else {
        RaySolution::Point(rot * Complex64::new(p / (1.0 - m), q / (1.0 + m)))
    }
}
