//! Ashtekar variables on coordinate charts: symbolic fields, slice geometry,
//! the induced vector product, the Ashtekar connection, its spin lift and FRW
//! oracles.

// Index loops mirror the tensor notation; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ashtekar;
pub mod checks;
pub mod error;
pub mod expr;
pub mod frw;
pub mod geometry;
pub mod hypersurface;
pub mod levi_civita;
pub mod sampling;
pub mod spin;
pub mod vecprod;

pub use ashtekar::{
    AshtekarConnection, Beta, CMat3, ComplexVecField, DualRoute, LieFormField, LocalLieForm, PhysicsComponents,
    Reconstruction, TriadGeometry,
};
pub use checks::{CheckContext, Executor, Sequential, SliceModel, Status, Suite, SuiteReport};
pub use error::{Error, Result};
pub use expr::{parse, parse_with, Binding, Evaluator, Expr};
pub use frw::{make_frw, Curvature, FrwModel, FrwOracles};
pub use geometry::{Chart, DensitizedTriad, Frame, FrameField, Mat3, SliceMetric, SpacetimeSplit, TangentVec, Vec3};
pub use hypersurface::{EndoField, Hypersurface};
pub use levi_civita::{LeviCivita, VecField};
pub use sampling::SampleRng;
pub use spin::{CMat2, Group, GroupElement, HolonomyPair, PathSpec, Su2Form};
pub use vecprod::{CVec3, VectorProduct};
