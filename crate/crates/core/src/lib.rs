//! Numerical machinery for the quasi-local mass of compact regions whose
//! boundary embeds in hyperbolic space.
//!
//! * [`hyperbolic`]: the hyperboloid model, charts, geodesics and the normal
//!   exponential flow.
//! * [`surface`]: star-shaped closed hypersurfaces, their induced geometry and
//!   the equidistant foliation outside them.
//! * [`flow`]: the quasi-spherical parabolic flow along that foliation.
//! * [`mass`]: the mass vector, its monotonicity formula and sign checks;
//!   [`monitor`] tracks them along a run over many null directions.
//! * [`clifford`]: Clifford matrices, Killing spinors on the ball model, the
//!   null-vector correspondence and hypersurface Dirac identities.
//!
//! Every numerical type is generic over [`Real`]; the `*F64` aliases below
//! are what the command line driver uses.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clifford;
pub mod config;
pub mod error;
pub mod flow;
pub mod hyperbolic;
pub mod mass;
pub mod monitor;
pub mod sampling;
pub mod scalar;
pub mod surface;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MinkowskiVectorF64 = hyperbolic::MinkowskiVector<f64>;
pub type HyperboloidPointF64 = hyperbolic::HyperboloidPoint<f64>;
pub type SurfaceSpecF64 = surface::SurfaceSpec<f64>;
pub type SurfaceLeafF64 = surface::SurfaceLeaf<f64>;
pub type FlowStateF64 = flow::FlowState<f64>;
pub type FlowTraceF64 = flow::FlowTrace<f64>;
pub type MassContextF64 = mass::MassContext<f64>;
pub type NullDirectionF64 = mass::NullDirection<f64>;
pub type CliffordRepF64 = clifford::CliffordRep<f64>;
pub type SpinorF64 = clifford::Spinor<f64>;

pub type MinkowskiVectorF32 = hyperbolic::MinkowskiVector<f32>;
pub type HyperboloidPointF32 = hyperbolic::HyperboloidPoint<f32>;
pub type CliffordRepF32 = clifford::CliffordRep<f32>;
