//! Cuspless sub-Riemannian geodesics on the quotient R^3 x S^2 of SE(3).
//!
//! The library provides the closed-form geodesic evaluation (curves that
//! minimize the integral of sqrt(kappa^2 + beta^2) with respect to arclength,
//! up to the first cusp), independent ODE oracles for cross-checking, the
//! exponential map with its symmetries and cone-of-reachable-angles sampling,
//! and a two-point boundary value solver.

pub mod bvp;
pub mod checks;
pub mod expmap;
pub mod geodesic;
pub mod oracle;
pub mod quad;
pub mod se3;

pub use bvp::{BvpSolution, BvpTarget, SearchPoint, SolveMethod, SolveOptions};
pub use expmap::{BoundaryClass, ConeGrid, ConePoint, ExpDomainPoint, Momentum};
pub use geodesic::{CurveSample, GeodesicInit, GeodesicInvariants};
pub use oracle::{OdeTrace, PmpTrace, ScalarInit};
pub use se3::{EulerAngles, FrenetFrame, RigidMotion, RotationMatrix, StructureConstants};
