//! Cone-valued metrics over concrete ordered spaces.
//!
//! The crate works over `E = ℝⁿ` ordered by a closed pointed cone `P` with
//! nonempty interior (orthant, Lorentz or polyhedral). On top of the order it
//! provides:
//!
//! - [`scalarization`]: the Gerstewitz functional `ξ_e(y) = inf{t : y ∈ te − P}`
//!   by closed form and by an independent bisection routine.
//! - [`cone_metric`]: vector-valued metrics `p : X × X → P`, the scalar metrics
//!   `d_p = ξ_e ∘ p` and `d_S = h ∘ p`, convergence detectors, balls and diameters.
//! - [`fixed_point`]: Banach, Boyd–Wong and weak-contraction iterations with
//!   sampled hypothesis checks.
//! - [`harness`]: seeded property suites producing JSON reports.

pub mod cone_metric;
pub mod config;
pub mod error;
pub mod fixed_point;
pub mod harness;
pub mod ordered_space;
pub mod report;
pub mod sampling;
pub mod scalarization;

pub use cone_metric::{ConeMetricSpace, DiameterReport, FiniteTable, MetricKind};
pub use error::{Error, Result};
pub use fixed_point::{Certificate, FixedPointReport, MapDescriptor, VarphiDescriptor};
pub use ordered_space::{Cone, ConeKind, HVariant, Seminorm, SeminormFamily, Vector};
pub use report::{CheckResult, PropertyReport};
pub use sampling::SampleSpec;
pub use scalarization::ScalarizationContext;
