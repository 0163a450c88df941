//! Numerical differential geometry of the space of null geodesics of a
//! three-dimensional spacetime, at desk scale.
//!
//! The crate builds the same object along three independent routes and
//! cross-checks them:
//!
//! * **Direct integration** ([`metric`], [`geodesic`]): diagonal 3-metrics
//!   given as chart components, Christoffel symbols, fixed-step RK4 geodesic
//!   traces, null-cone parametrization, and reconstruction of a Lorentz
//!   metric from sampled cone directions ([`cone`]).
//! * **The quaternionic model** ([`quat`], [`model`]): the double cover of
//!   the unit tangent bundle of the 2-sphere, the family of Hopf fibrations,
//!   cyclic lens-space actions and their descent, null geodesics of
//!   `S^2 x S^1`, skies, and the canonical contact plane field.
//! * **Engel prolongation** ([`engel`]): the rank-2 flag on the projectivized
//!   cone bundle, its characteristic kernel field, kernel-flow integration,
//!   deprolongation back to geodesics, and the pushforward contact plane.
//!
//! [`contact`] provides the generic numerical verifiers (exterior derivative,
//! wedge nondegeneracy, Lie brackets, Frobenius residuals) used by all three
//! routes, and [`verify`] packages the cross-checks as seeded, reproducible
//! sweeps. See the `examples/` directory for one runnable program per
//! capability; the `nullgeo` binary exposes the same sweeps as subcommands.

pub mod cone;
pub mod config;
pub mod contact;
pub mod engel;
pub mod expr;
pub mod geodesic;
pub mod metric;
pub mod model;
pub mod quat;
pub mod report;
pub mod verify;

pub use cone::{metric_from_cone, ConeError, ConeQuadric};
pub use geodesic::{integrate_geodesic, GeodesicTrace};
pub use metric::{ChartPoint, DiagonalMetric, MetricError, TangentVector};
pub use quat::{FramePair, Quaternion, UnitImaginary};
