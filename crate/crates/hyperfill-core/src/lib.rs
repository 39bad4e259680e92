//! Hyperbolic fillings of finitely sampled compact metric spaces.
//!
//! Given a finite sample of a metric space `Z` with `0 < diam Z < 1` and a
//! positive weight per point, this crate builds the associated hyperbolic
//! filling: a graph whose level-`n` vertices are the points of a maximal
//! `alpha^-n`-separated net and whose edges connect vertices with
//! intersecting balls. The filling is then equipped with
//!
//! * the uniformized metric `ds = e^(-eps |x|) d|x|` with `eps = log alpha`,
//!   under which vertical rays from the root have finite length `1/eps`, and
//! * a lifted measure `d mu = rho(|x|) (nu(B_1) + nu(B_2)) d|x|` driven by a
//!   radial weight `rho`.
//!
//! On top of that sit the two trace-existence parameters of first-order
//! Sobolev theory on the filling: the global integral `R_{p,rho}` and its
//! unit-mass-partition refinement `calR_{p,rho}`, together with machinery to
//! evaluate boundary traces of radial Sobolev functions along geodesic rays
//! and to construct the explicit functions whose traces fail to exist when
//! the parameters blow up.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature to use it in that mode. Floating-point transcendentals fall
//! back to `libm` when `std` is off.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod filling;
pub mod geometry;
pub mod math;
pub mod measure;
pub mod modulus;
pub mod params;
pub mod profile;
pub mod space;
pub mod trace;

pub use filling::{Edge, EdgeId, EdgeKind, Filling, FillingError, NetHierarchy, Vertex, VertexId};
pub use geometry::{interleave_rays, EdgePoint, GeodesicRay, RayError};
pub use math::QuadratureFailure;
pub use measure::{
    MassEstimate, RadialFamily, RadialWeight, RayIntegrand, TailBehavior, WeightError,
};
pub use modulus::{CurveHolderCheck, HolderCheck, ModulusError, Shell, ZeroModulusWitness};
pub use params::{
    CalRReport, FpReport, ParamError, ParamOptions, ParamValue, RegimeReport, TracePrediction,
    Trilean, UnitMassPartition,
};
pub use profile::{ProfileError, RadialFunction, TentSpeed};
pub use space::{MetricSpaceSample, SpaceError};
pub use trace::{
    DetectorConfig, EdgeFunction, RayTrace, SobolevNorms, TildeTrace, TraceError, TraceReport,
    TraceVerdict,
};
