use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {zeta} lies outside the validity ring [{r_min}, {r_max}]")]
    OutsideRing { zeta: Complex64, r_min: f64, r_max: f64 },
    #[error("pole at the origin")]
    PoleAtOrigin,
    #[error("point {zeta} lies on the boundary arc of the Poisson data")]
    OnArc { zeta: Complex64 },
    #[error("integration path to {zeta} crosses the boundary arc")]
    PathCrossesArc { zeta: Complex64 },
    #[error("quadrature did not converge: error estimate {estimate:e} > tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },
    #[error("derivative of order {0} is not available for this function kind")]
    UnsupportedDerivative(u32),
    #[error("parametrization is singular on the unit circle (zeta = {zeta})")]
    UnitCircle { zeta: Complex64 },
    #[error("parameter zeta = 0 is excluded")]
    ZeroParameter,
    #[error("degenerate denominator in {0}")]
    Degenerate(&'static str),
    #[error("Legendre jacobian vanishes ({jacobian:e})")]
    DegenerateJacobian { jacobian: f64 },
    #[error("theta = {theta} is not in S_phi (condition = {condition:e}); the ray maps to infinity")]
    MapsToInfinity { theta: f64, condition: f64 },
    #[error("theta = {theta} is an isolated zero of the light condition, not interior to an arc")]
    IsolatedZero { theta: f64 },
    #[error("coefficients are not elliptic")]
    NonElliptic,
    #[error("modulus bound violated: |{what}| = {value}")]
    ModulusBound { what: &'static str, value: f64 },
    #[error("no convergence after {iterations} iterations (last update {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("target {chi} lies outside the image of the map")]
    OutsideImage { chi: Complex64 },
    #[error("analytic function vanishes at grid node {node}")]
    ZeroOfF { node: usize },
    #[error("closed 1-form fails the exactness test: worst cell {cell:?} with defect {defect:e}")]
    NotExact { cell: (usize, usize), defect: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
