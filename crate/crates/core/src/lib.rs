//! Verification engine for almost contact pseudo-metric manifolds.
//!
//! Structures are given by closed-form component expressions on a chart.
//! Every pointwise quantity is computed on truncated Taylor jets, so
//! derivatives are exact up to rounding.

pub mod catalog;
pub mod chart;
pub mod connection;
pub mod contact;
pub mod cr;
pub mod error;
pub mod expr;
pub mod jet;
pub mod measure;
pub mod report;
pub mod specfile;
pub mod structure;
pub mod tensor;
pub mod tolerance;
pub mod verify;

pub use chart::{Chart, Frame, MetricAtPoint, PhiBasis, TensorFieldSpec};
pub use error::{Error, Result};
pub use expr::{parse, EvalError, Expr, ParseError};
pub use jet::{Jet, JetError};
pub use tensor::{lie_bracket, BilinearField, CovectorField, EndoField, JetTensor, VectorField};
pub use catalog::CatalogEntry;
pub use structure::{AlmostContactSpec, ExpectedClassification, PointEvaluation, SamplingSpec, StructureSpec, ToleranceSpec};
pub use tolerance::{Profile, Truth};
pub use verify::{verify, CheckOptions, CheckRecord, Classification, Flag, Status, Suite, Verification};
