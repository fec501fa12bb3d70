//! Explicit complex-valued solutions of the plane eikonal equation
//! `|∇φ|² = n²`, built from analytic seed functions through a Legendre
//! (hodograph) transformation, together with the light/shadow analysis and
//! the variable-index machinery (Beltrami and similarity-principle solvers).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analytic;
pub mod constant;
pub mod error;
pub mod exec;
pub mod field;
pub mod grid;
pub mod quadrature;
pub mod quasiconformal;
pub mod rays;
pub mod refraction;
pub mod regions;
pub mod pipeline;
pub mod similarity;
pub mod spectral;
pub mod wirtinger;

pub use num_complex::Complex64;

pub use analytic::{AnalyticFunction, BoundaryProfile, LaurentPoly, LogBranch, Ring};
pub use constant::{quadratic_closed_form, ParametrizedEikonal};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{eval_field, FieldSample};
pub use grid::{Grid, Window};
pub use pipeline::{eikonal_residual_window, solve_variable, VariableIndexSolution, VariableOptions};
pub use quasiconformal::{solve_beltrami, BeltramiOptions, QuasiconformalMap};
pub use rays::{BBox, Line};
pub use refraction::{Convention, EllProfile, RefractionField};
pub use regions::{caustic_side, Category, ClassifiedSample, RegionAnalyzer, SPhiComponent};
pub use wirtinger::WirtingerPair;
