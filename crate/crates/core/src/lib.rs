//! Exact simulation of directed cone navigations on homogeneous planar
//! Poisson point processes.
//!
//! Each waypoint is joined to the nearest process point inside the cone of
//! half-angle `theta` opening to the right. The crate samples such paths
//! without realizing the point cloud: every step is drawn conditionally on
//! the region already known to be empty (the history set). On top of the
//! sampler sit the renewal decomposition (steps at which the history set is
//! empty split the path into iid segments), Monte Carlo estimators for the
//! moderate-deviation constant, and deterministic numerics for the
//! large-deviation rate functions.
//!
//! Module map:
//! - [`geom`]: cones, balls, history sets, free radii/angles, explored areas.
//! - [`nav`]: model parameters, the two step samplers, path simulation.
//! - [`renewal`]: segments, `K'_t`, estimators, renewal-time tails, the
//!   Markov majorant.
//! - [`ratefn`]: closed-form constants, step CGF, Legendre transforms and
//!   the composed rate functions.
//! - [`harness`]: configuration, output files, CLI and the validation suite.

pub mod error;
pub mod geom;
pub mod harness;
pub mod nav;
pub mod optim;
pub mod quad;
pub mod ratefn;
pub mod renewal;
pub mod rng;
pub mod stats;

pub use error::{NavError, Result};
pub use geom::{AngularSet, HistorySet, HistoryTerm, Point, PolarStep, RadialSet};
pub use nav::{Horizon, ModelParams, Navigator, PathSample, Sampler, StepRecord};
pub use ratefn::{RateValue, StepCgf};
pub use renewal::{EstimateWithCI, SegmentRecord, TailCurve};
