//! Light/shadow classification on the boundary of the parameter disk.
//!
//! On `|ζ| = 1` the ray system degenerates; a boundary point `e^{iθ}` carries a
//! light segment exactly when `Re[f(e^{iθ}) e^{-iθ}] = 0`, and is sent to
//! infinity otherwise. The zero set `S_φ` is found numerically here, and arcs
//! of it give caustics as envelopes of their light segments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::AnalyticFunction;
use crate::constant::{seed_to_z, UNIT_CIRCLE_GUARD};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rays::{BBox, Line};

/// Membership band for `S_φ`, relative to `max |f|` on the circle.
pub const S_PHI_REL_TOL: f64 = 1e-9;
/// Minimum run of sub-tolerance samples reported as an arc.
pub const MIN_ARC_SAMPLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SPhiComponent {
    Point(f64),
    /// `start < end`; `end` may exceed π when the arc straddles the cut.
    Arc { start: f64, end: f64 },
}

impl SPhiComponent {
    pub fn contains(&self, theta: f64) -> bool {
        match *self {
            SPhiComponent::Point(t) => wrap(theta - t).abs() < 1e-12,
            SPhiComponent::Arc { start, end } => {
                let d = (theta - start).rem_euclid(2.0 * PI);
                d <= end - start
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Shadow,
    LightSegment,
    MapsToInfinity,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Shadow => "shadow",
            Category::LightSegment => "light_segment",
            Category::MapsToInfinity => "maps_to_infinity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Payload {
    Point(Complex64),
    Segment {
        line: Line,
        /// Present when θ is interior to an arc of `S_φ`.
        caustic: Option<Complex64>,
    },
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifiedSample {
    pub zeta: Complex64,
    pub theta: Option<f64>,
    pub category: Category,
    pub payload: Payload,
    /// `Some(true)` inside the unit disk, `Some(false)` outside, `None` on it.
    pub inside_unit_disk: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilSegment {
    pub theta: f64,
    pub a: Complex64,
    pub b: Complex64,
}

fn wrap(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

#[derive(Clone, Debug)]
pub struct RegionAnalyzer {
    f: AnalyticFunction,
    df: AnalyticFunction,
    scale: f64,
    tol: f64,
}

impl RegionAnalyzer {
    pub fn new(f: AnalyticFunction) -> Result<Self> {
        let df = f.derivative()?;
        // sample slightly off the circle too, so an arc where f is not
        // analytic still contributes to the scale
        let mut scale: f64 = 0.0;
        for j in 0..256 {
            let t = -PI + 2.0 * PI * (j as f64 + 0.5) / 256.0;
            for r in [1.0, 0.999] {
                if let Ok(v) = f.eval(Complex64::from_polar(r, t)) {
                    scale = scale.max(v.norm());
                }
            }
        }
        let scale = if scale > 0.0 { scale } else { 1.0 };
        Ok(Self {
            f,
            df,
            scale,
            tol: S_PHI_REL_TOL * scale,
        })
    }

    pub fn f(&self) -> &AnalyticFunction {
        &self.f
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Re[f(e^{iθ}) e^{-iθ}]`.
    pub fn condition(&self, theta: f64) -> Result<f64> {
        condition(&self.f, theta)
    }

    /// `d/dθ Re[f(e^{iθ}) e^{-iθ}] = Re[i (f'(e^{iθ}) - f(e^{iθ}) e^{-iθ})]`.
    pub fn condition_derivative(&self, theta: f64) -> Result<f64> {
        let u = Complex64::from_polar(1.0, theta);
        let fv = self.f.eval(u)?;
        let dv = self.df.eval(u)?;
        Ok((Complex64::i() * (dv - fv * u.conj())).re)
    }

    pub fn in_s_phi(&self, theta: f64) -> bool {
        self.condition(theta).map_or(false, |v| v.abs() < self.tol)
    }

    /// Zero set of the condition on a uniform θ-grid of `resolution` samples:
    /// sign changes are bisected to isolated zeros, runs of at least
    /// [`MIN_ARC_SAMPLES`] sub-tolerance samples whose midpoints also pass
    /// become arcs with bisected endpoints.
    pub fn find_s_phi(&self, resolution: usize, exec: Execution) -> Vec<SPhiComponent> {
        let n = resolution.max(8);
        let h = 2.0 * PI / n as f64;
        let vals: Vec<Option<f64>> =
            exec.map_range(n, |j| self.condition(-PI + h * j as f64).ok());
        let small: Vec<bool> = vals
            .iter()
            .map(|v| v.map_or(false, |v| v.abs() < self.tol))
            .collect();
        if small.iter().all(|&s| s) {
            return vec![SPhiComponent::Arc {
                start: -PI,
                end: PI,
            }];
        }
        let s0 = small.iter().position(|&s| !s).unwrap();
        // unwrapped angle of logical index k (k = 0 is s0)
        let theta = |k: usize| -PI + h * (s0 + k) as f64;
        let idx = |k: usize| (s0 + k) % n;
        let mut out = Vec::new();
        let mut k = 1;
        while k <= n {
            if k < n && small[idx(k)] {
                let first = k;
                while k < n && small[idx(k)] {
                    k += 1;
                }
                let last = k - 1;
                let len = last - first + 1;
                let confirmed = len >= MIN_ARC_SAMPLES
                    && (first..last).all(|m| self.in_s_phi(theta(m) + 0.5 * h));
                if confirmed {
                    let start = self.bisect_membership(theta(first - 1), theta(first));
                    let end = self.bisect_membership(theta(last + 1), theta(last));
                    let start_w = wrap(start);
                    out.push(SPhiComponent::Arc {
                        start: start_w,
                        end: start_w + (end - start),
                    });
                } else {
                    let (l, r) = (vals[idx(first - 1)], vals[idx(last + 1)]);
                    let t = match (l, r) {
                        (Some(a), Some(b)) if a * b < 0.0 => {
                            self.bisect_zero(theta(first - 1), theta(last + 1), a)
                        }
                        _ => {
                            // touching zero: keep the smallest sample
                            let best = (first..=last)
                                .min_by(|&p, &q| {
                                    let vp = vals[idx(p)].unwrap().abs();
                                    let vq = vals[idx(q)].unwrap().abs();
                                    vp.total_cmp(&vq)
                                })
                                .unwrap();
                            theta(best)
                        }
                    };
                    out.push(SPhiComponent::Point(wrap(t)));
                }
                continue;
            }
            // plain sign change between consecutive non-small samples
            let (pa, pb) = (idx(k - 1), idx(k % n));
            if !small[pa] && !small[pb] {
                if let (Some(a), Some(b)) = (vals[pa], vals[pb]) {
                    if a * b < 0.0 {
                        let t = self.bisect_zero(theta(k - 1), theta(k), a);
                        out.push(SPhiComponent::Point(wrap(t)));
                    }
                }
            }
            k += 1;
        }
        out.sort_by(|a, b| start_of(a).total_cmp(&start_of(b)));
        out
    }

    fn bisect_zero(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (b - a).abs() < 1e-15 {
                break;
            }
            match self.condition(m) {
                Ok(v) if v == 0.0 => return m,
                Ok(v) if (v < 0.0) == (fa < 0.0) => a = m,
                Ok(_) => b = m,
                Err(_) => break,
            }
        }
        0.5 * (a + b)
    }

    /// Boundary of the membership band between `outside` and `inside`.
    fn bisect_membership(&self, mut outside: f64, mut inside: f64) -> f64 {
        for _ in 0..200 {
            if (outside - inside).abs() < 1e-14 {
                break;
            }
            let m = 0.5 * (outside + inside);
            if self.in_s_phi(m) {
                inside = m;
            } else {
                outside = m;
            }
        }
        inside
    }

    /// The common line of the two degenerate equations
    /// `(1 - cos2θ)x - sin2θ y = Re f`, `-sin2θ x + (1 + cos2θ)y = Im f`.
    pub fn light_segment(&self, theta: f64) -> Result<Line> {
        let u = Complex64::from_polar(1.0, theta);
        let fv = self.f.eval(u)?;
        let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
        let cond = (fv * u.conj()).re;
        if cond.abs() >= self.tol {
            return Err(Error::MapsToInfinity {
                theta,
                condition: cond,
            });
        }
        // pick the better-conditioned equation of the pair
        let (n1, r1) = (Complex64::new(1.0 - c2, -s2), fv.re);
        let (n2, r2) = (Complex64::new(-s2, 1.0 + c2), fv.im);
        let (nv, rhs) = if n1.norm() >= n2.norm() { (n1, r1) } else { (n2, r2) };
        let nn = nv.norm_sqr();
        let point = nv * (rhs / nn);
        Ok(Line::new(point, Complex64::i() * nv))
    }

    /// Radial limit of `z(ζ)` at `e^{iθ} ∈ S_φ`.
    pub fn boundary_limit_point(&self, theta: f64) -> Result<Complex64> {
        let u = Complex64::from_polar(1.0, theta);
        let fv = self.f.eval(u)?;
        let dv = self.df.eval(u)?;
        Ok(-0.25 * u * (dv + dv.conj()) - 0.5 * u * u * fv.conj())
    }

    /// Envelope point of the light pencil at `θ` inside an arc of `S_φ`.
    pub fn caustic_point(&self, theta: f64) -> Result<Complex64> {
        let cond = self.condition(theta)?;
        if cond.abs() >= self.tol {
            return Err(Error::MapsToInfinity {
                theta,
                condition: cond,
            });
        }
        let slope = self.condition_derivative(theta)?;
        if slope.abs() >= 1e-6 * self.scale.max(1.0) {
            return Err(Error::IsolatedZero { theta });
        }
        let u = Complex64::from_polar(1.0, theta);
        Ok(self.f.eval(u)? - 0.5 * u * self.df.eval(u)?)
    }

    /// Caustic curve sampled at `samples` interior angles of an arc.
    pub fn caustic_polyline(&self, arc: SPhiComponent, samples: usize) -> Vec<(f64, Complex64)> {
        match arc {
            SPhiComponent::Arc { start, end } => interior(start, end, samples)
                .filter_map(|t| self.caustic_point(t).ok().map(|z| (wrap(t), z)))
                .collect(),
            SPhiComponent::Point(_) => Vec::new(),
        }
    }

    pub fn classify(&self, zeta: Complex64) -> ClassifiedSample {
        let d = 1.0 - zeta.norm_sqr().powi(2);
        if d.abs() >= UNIT_CIRCLE_GUARD {
            let payload = self
                .f
                .eval(zeta)
                .and_then(|fv| seed_to_z(fv, zeta))
                .map_or(Payload::None, Payload::Point);
            return ClassifiedSample {
                zeta,
                theta: None,
                category: Category::Shadow,
                payload,
                inside_unit_disk: Some(d > 0.0),
            };
        }
        let theta = zeta.arg();
        let (category, payload) = match self.light_segment(theta) {
            Ok(line) => (
                Category::LightSegment,
                Payload::Segment {
                    line,
                    caustic: self.caustic_point(theta).ok(),
                },
            ),
            Err(_) => (Category::MapsToInfinity, Payload::None),
        };
        ClassifiedSample {
            zeta,
            theta: Some(theta),
            category,
            payload,
            inside_unit_disk: None,
        }
    }

    pub fn classify_all(&self, zetas: &[Complex64], exec: Execution) -> Vec<ClassifiedSample> {
        exec.map(zetas, |&z| self.classify(z))
    }

    /// Light segments of every component, clipped to `bbox`. Arcs are sampled
    /// at `per_arc` interior angles.
    pub fn light_pencil(
        &self,
        components: &[SPhiComponent],
        per_arc: usize,
        bbox: &BBox,
        exec: Execution,
    ) -> Vec<PencilSegment> {
        let thetas: Vec<f64> = components
            .iter()
            .flat_map(|c| match *c {
                SPhiComponent::Point(t) => vec![t],
                SPhiComponent::Arc { start, end } => interior(start, end, per_arc).collect(),
            })
            .collect();
        exec.map(&thetas, |&t| {
            let line = self.light_segment(t).ok()?;
            let (a, b) = line.clip(bbox)?;
            Some(PencilSegment {
                theta: wrap(t),
                a,
                b,
            })
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Side of `z` relative to the nearest vertex of a caustic polyline: the sign
/// of the cross product with the local tangent, and the distance to that
/// vertex. `None` when the nearest vertex is an end point.
pub fn caustic_side(polyline: &[(f64, Complex64)], z: Complex64) -> Option<(f64, f64)> {
    if polyline.len() < 3 {
        return None;
    }
    let j = polyline
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .1 - z).norm().total_cmp(&(b.1 .1 - z).norm()))?
        .0;
    if j == 0 || j + 1 == polyline.len() {
        return None;
    }
    let p = polyline[j].1;
    let tangent = polyline[j + 1].1 - polyline[j - 1].1;
    Some((((z - p) * tangent.conj()).im.signum(), (z - p).norm()))
}

fn start_of(c: &SPhiComponent) -> f64 {
    match *c {
        SPhiComponent::Point(t) => t,
        SPhiComponent::Arc { start, .. } => start,
    }
}

fn interior(start: f64, end: f64, samples: usize) -> impl Iterator<Item = f64> {
    let n = samples.max(1);
    let h = (end - start) / (n + 1) as f64;
    (1..=n).map(move |j| start + h * j as f64)
}

/// `Re[f(e^{iθ}) e^{-iθ}]`.
pub fn condition(f: &AnalyticFunction, theta: f64) -> Result<f64> {
    let u = Complex64::from_polar(1.0, theta);
    Ok((f.eval(u)? * u.conj()).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::BoundaryProfile;
    use crate::constant::ParametrizedEikonal;
    use crate::rays::{solve_ray, RaySolution};
    use std::f64::consts::FRAC_PI_2;

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    fn quad() -> AnalyticFunction {
        AnalyticFunction::from_terms([(0, c(-1.0, 0.0)), (2, c(-1.0, 0.0))]).unwrap()
    }

    fn hinge(tau: f64) -> AnalyticFunction {
        AnalyticFunction::poisson(tau, BoundaryProfile::Hinge).unwrap()
    }

    #[test]
    fn condition_examples() {
        let f = quad();
        for t in [0.0, 0.4, 1.3, -2.2, 3.0] {
            assert!((condition(&f, t).unwrap() + 2.0 * t.cos()).abs() < 1e-14);
        }
        assert!(condition(&f, FRAC_PI_2).unwrap().abs() < 1e-15);
        let k = AnalyticFunction::from_terms([(0, c(2.5, 0.0))]).unwrap();
        assert!(condition(&k, FRAC_PI_2).unwrap().abs() < 1e-15);
        assert!(matches!(
            condition(&hinge(1.0), 2.0),
            Err(Error::OnArc { .. })
        ));
    }

    #[test]
    fn s_phi_isolated_zeros() {
        for sign in [-1.0, 1.0] {
            let f = AnalyticFunction::from_terms([(0, c(sign, 0.0)), (2, c(sign, 0.0))]).unwrap();
            let ra = RegionAnalyzer::new(f).unwrap();
            let s = ra.find_s_phi(720, Execution::Sequential);
            assert_eq!(s.len(), 2, "{s:?}");
            match (s[0], s[1]) {
                (SPhiComponent::Point(a), SPhiComponent::Point(b)) => {
                    assert!((a + FRAC_PI_2).abs() < 1e-12 && (b - FRAC_PI_2).abs() < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn s_phi_poisson_arc() {
        let tau = 0.9;
        let ra = RegionAnalyzer::new(hinge(tau)).unwrap();
        let s = ra.find_s_phi(720, Execution::default());
        let arcs: Vec<_> = s
            .iter()
            .filter_map(|c| match *c {
                SPhiComponent::Arc { start, end } => Some((start, end)),
                _ => None,
            })
            .collect();
        assert_eq!(arcs.len(), 1, "{s:?}");
        let (a, b) = arcs[0];
        assert!((a + tau).abs() < 1e-6 && (b - tau).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn light_segment_examples() {
        let ra = RegionAnalyzer::new(quad()).unwrap();
        for t in [FRAC_PI_2, -FRAC_PI_2] {
            let l = ra.light_segment(t).unwrap();
            assert!(l.direction.re.abs() < 1e-15);
            assert!(l.point.re.abs() < 1e-15);
        }
        assert!(matches!(
            ra.light_segment(0.3),
            Err(Error::MapsToInfinity { .. })
        ));
    }

    #[test]
    fn degenerate_pair_coincides_only_on_s_phi() {
        let ra = RegionAnalyzer::new(hinge(1.1)).unwrap();
        for t in [-0.8, 0.0, 0.5, 1.0] {
            let u = Complex64::from_polar(1.0, t);
            let fv = ra.f().eval(u).unwrap();
            let l = ra.light_segment(t).unwrap();
            // both equations hold along the line
            for s in [-3.0, 0.0, 2.0] {
                let z = l.at(s);
                let r = z - u * u * z.conj() - fv;
                assert!(r.norm() < 1e-9, "{t} {r}");
            }
            match solve_ray(u * u, fv, 1e-9, 1e-8) {
                RaySolution::Line(m) => assert!(l.coincides(&m, 1e-8)),
                other => panic!("{other:?}"),
            }
        }
        let q = RegionAnalyzer::new(quad()).unwrap();
        let u = Complex64::from_polar(1.0, 0.4);
        let fv = q.f().eval(u).unwrap();
        assert!(matches!(
            solve_ray(u * u, fv, 1e-9, 1e-8),
            RaySolution::Inconsistent { .. }
        ));
    }

    #[test]
    fn determinant_is_one_minus_r4() {
        for (r, t) in [(0.3, 0.2), (1.7, -2.0), (0.99, 1.0), (1.0, 0.7)] {
            let k: Complex64 = Complex64::from_polar(r, t).powi(2);
            let det = (1.0 - k.re) * (1.0 + k.re) - k.im * k.im;
            let r4: f64 = r * r * r * r;
            assert!((det - (1.0 - r4)).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_limit_examples_and_radial_limit() {
        let ra = RegionAnalyzer::new(quad()).unwrap();
        assert!(ra.boundary_limit_point(FRAC_PI_2).unwrap().norm() < 1e-15);
        let k = RegionAnalyzer::new(AnalyticFunction::from_terms([(0, c(1.5, 0.0))]).unwrap())
            .unwrap();
        assert!((k.boundary_limit_point(FRAC_PI_2).unwrap() - c(0.75, 0.0)).norm() < 1e-15);

        for (f, t) in [(quad(), FRAC_PI_2), (hinge(1.0), 0.4)] {
            let ra = RegionAnalyzer::new(f.clone()).unwrap();
            let pe = ParametrizedEikonal::new(f).unwrap();
            let target = ra.boundary_limit_point(t).unwrap();
            for side in [-1.0, 1.0] {
                let mut prev = f64::INFINITY;
                for k in 3..=6 {
                    let eps = 10f64.powi(-k);
                    let z = pe.eval_z(Complex64::from_polar(1.0 + side * eps, t)).unwrap();
                    let err = (z - target).norm();
                    assert!(err < 20.0 * eps, "{side} {k} {err}");
                    assert!(err < prev);
                    prev = err;
                }
            }
        }
    }

    #[test]
    fn caustic_is_envelope_of_pencil() {
        let tau = 1.0;
        let ra = RegionAnalyzer::new(hinge(tau)).unwrap();
        assert!(matches!(
            RegionAnalyzer::new(quad()).unwrap().caustic_point(FRAC_PI_2),
            Err(Error::IsolatedZero { .. })
        ));
        for t in [-0.7, -0.2, 0.3, 0.8] {
            let p = ra.caustic_point(t).unwrap();
            assert!((p - ra.boundary_limit_point(t).unwrap()).norm() < 1e-8);
            let l = ra.light_segment(t).unwrap();
            assert!(l.distance(p) < 1e-8);
            // tangency: the caustic curve moves along the line direction
            let h = 1e-4;
            let dp = (ra.caustic_point(t + h).unwrap() - ra.caustic_point(t - h).unwrap()) / (2.0 * h);
            if dp.norm() > 1e-6 {
                assert!((dp * l.direction.conj()).im.abs() < 1e-5 * dp.norm().max(1.0));
            }
            // and neighbouring lines pass through it to second order
            let ln = ra.light_segment(t + h).unwrap();
            assert!(ln.distance(p) < 1e-6);
        }
    }

    #[test]
    fn shadow_lies_on_one_side_of_caustic() {
        let tau = FRAC_PI_2;
        let ra = RegionAnalyzer::new(hinge(tau)).unwrap();
        let arc = SPhiComponent::Arc {
            start: -tau,
            end: tau,
        };
        let poly = ra.caustic_polyline(arc, 200);
        assert_eq!(poly.len(), 200);
        let mut signs = Vec::new();
        for t in [-1.2, -0.6, -0.1, 0.3, 0.9, 1.3] {
            for r in [0.9, 0.97, 0.99, 1.01, 1.03, 1.1] {
                let s = ra.classify(Complex64::from_polar(r, t));
                let Payload::Point(z) = s.payload else { panic!() };
                signs.push(caustic_side(&poly, z).unwrap().0);
            }
        }
        assert!(signs.iter().all(|&x| x == signs[0]), "{signs:?}");
    }

    #[test]
    fn classify_examples() {
        let ra = RegionAnalyzer::new(quad()).unwrap();
        let s = ra.classify(c(2.0, 0.0));
        assert_eq!(s.category, Category::Shadow);
        assert_eq!(s.inside_unit_disk, Some(false));
        match s.payload {
            Payload::Point(z) => assert!((z - c(5.0 / 3.0, 0.0)).norm() < 1e-14),
            other => panic!("{other:?}"),
        }
        let s = ra.classify(c(0.0, 1.0));
        assert_eq!(s.category, Category::LightSegment);
        assert!(matches!(s.payload, Payload::Segment { caustic: None, .. }));
        assert_eq!(ra.classify(c(1.0, 0.0)).category, Category::MapsToInfinity);
        assert_eq!(ra.classify(c(0.5, 0.0)).inside_unit_disk, Some(true));
    }

    #[test]
    fn pencil_is_clipped() {
        let ra = RegionAnalyzer::new(hinge(0.8)).unwrap();
        let comps = ra.find_s_phi(360, Execution::default());
        let bb = BBox::new(-2.0, 2.0, -2.0, 2.0);
        let pen = ra.light_pencil(&comps, 20, &bb, Execution::default());
        assert!(pen.len() >= 15);
        for s in pen {
            assert!(bb.contains(s.a * 0.999_999) && bb.contains(s.b * 0.999_999));
        }
    }
}
