//! Numerical toolkit for a pinned Ginzburg-Landau energy
//! `E(u) = ∫ p |∇u|² + ε⁻² ∫ J(1 − |u|²)` on a disc with S¹-valued
//! boundary data of prescribed degree.
//!
//! The potential `J` is allowed to vanish to infinite order at 0 (flat
//! well), which makes the usual `log(1/ε)` vortex energetics pick up a
//! potential-dependent correction. That correction is carried by a
//! one-dimensional constrained variational quantity `I(R, c)` computed in
//! [`iquant`]. The 2D side lives in [`grid`], [`field`] and [`minimizer`];
//! energy upper/lower bounds and asymptotic fits live in [`bounds`].

pub mod bounds;
pub mod error;
pub mod field;
pub mod grid;
pub mod iquant;
pub mod minimizer;
pub mod potential;
pub mod quad;
pub mod report;
pub mod weight;

pub use bounds::{
    AsymptoticFit, BoundReport, DistanceReport, HoleSpec, TrialBuild, TrialPlan, TrialSite,
    UpperBoundValue,
};
pub use error::Error;
pub use field::{BoundaryData, EnergyBreakdown, Field2D};
pub use grid::Grid;
pub use iquant::{IValue, RadialProfile};
pub use minimizer::{
    ClusterReport, InitStrategy, MinimizeResult, SolveConfig, TracePoint, VortexSet,
};
pub use potential::PotentialSpec;
pub use report::ValidationReport;
pub use weight::{PinningSite, WeightSpec};

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
