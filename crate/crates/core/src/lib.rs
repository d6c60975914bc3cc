//! Centroaffine geometry of closed polygons in 3-space.
//!
//! A closed polygon `X` that is locally convex with respect to an origin,
//! together with a transversal vector field `U`, carries a family of
//! invariants under volume-preserving linear maps: the volumes `α`, `β`, the
//! edge curvature `b`, the osculating coefficient `λ` and the flattening
//! determinant `Δ`. This crate computes them, builds the dual pair `(Y, V)`,
//! relates planar pairs to constant-curvature spatial pairs through the affine
//! cylindrical pedal, and generates reproducible random instances.
//!
//! Index convention: node quantities live in [`NodeSeq`] (slot `i` is node
//! `i`), edge quantities in [`EdgeSeq`] (slot `k` is edge `k + ½`).

pub mod centroaffine;
pub mod cyclic;
pub mod duality;
pub mod error;
pub mod generators;
pub mod pedal;
pub mod vector;

pub use centroaffine::{
    ev_natural_field, is_equal_volume, structure_functions, FeatureReport, FocalPoint,
    FramedPolygon, InvariantBundle, NaturalField, StructureFunctions,
};
pub use cyclic::{
    cyclic_sign_changes, edge_diff, node_diff, second_diff, sign_of, EdgeSeq, NodeSeq, Sign,
    SignChanges, ToleranceConfig,
};
pub use duality::{DualPair, DualReport};
pub use error::{Error, Result};
pub use pedal::{PedalResult, PlanarPair, RadialInstance};
pub use vector::{cross3, det3, Vec2, Vec3};
