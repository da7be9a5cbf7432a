#![allow(clippy::needless_range_loop)]

//! Exact analysis of linear homogeneous PDE systems.
//!
//! The engine prolongs an operator level by level, decides whether its
//! principal symbols have maximal rank, computes the dimension bound for
//! the space of solution germs, and, for calibrated operators, builds the
//! tautological connection whose curvature obstructs that bound from being
//! attained. A web-geometry front end converts curvilinear d-webs into
//! abelian-relation operators and runs the same pipeline.
//!
//! Everything is generic over the coefficient field through [`Scalar`];
//! the exactness guarantees hold for the rational instantiation, which the
//! crate-root aliases pin down.

pub mod analysis;
pub mod connection;
pub mod error;
pub mod expr;
pub mod jet;
pub mod matrix;
pub mod multiindex;
pub mod operator;
pub mod parse;
pub mod scalar;
pub mod tower;
pub mod web;

pub use analysis::{analyze_operator, AnalyzedOperator, OperatorAnalysis};
pub use connection::{
    build_adapted_frame, AdaptedFrame, ConcentrationReport, Connection, Curvature,
    FlatSection, FlatnessReport, FrameCoord, FrameLevel,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use jet::{Jet, JetSpace};
pub use matrix::{JetMatrix, RankProfile, ScalarMat};
pub use multiindex::{count, count_upto, decode_col, decode_row, IndexTable, MultiIndex};
pub use operator::{
    calibration_identity, classify_range, compute_h0, kernel_dim_formula, pi, rho,
    OperatorSpec, Range,
};
pub use parse::parse_expr;
pub use scalar::Scalar;
pub use tower::{OrdinaryReport, SymbolRank, Tower};
pub use web::{
    analyze_web, damiano_bound, lie_derivative_semibasic, wc_family, web_operator,
    WebAnalysis, WebOperator, WebOptions, WebSpec,
};

/// The canonical exact coefficient field.
pub type Rat = num_rational::BigRational;

pub type RatJet = Jet<Rat>;
pub type RatJetSpace = JetSpace<Rat>;
pub type RatJetMatrix = JetMatrix<Rat>;
pub type RatOperatorSpec = OperatorSpec<Rat>;
pub type RatTower = Tower<Rat>;
pub type RatConnection = Connection<Rat>;
pub type RatWebAnalysis = WebAnalysis<Rat>;
