//! Nonnegative C¹ extension of scattered data.
//!
//! The pipeline decides extendability by discretized Glaeser refinement of
//! 1-jet fibers ([`refinement`]), selects a compatible jet field, and builds an
//! explicit nonnegative extension from a Whitney cube decomposition
//! ([`whitney`]). [`verify`] measures the result.

pub mod cli;
pub mod fibers;
pub mod geometry;
pub mod jet;

pub use fibers::{fiber_equal, gamma_initial, AffineFiber, Fiber, FiberField};
pub use geometry::{SampleSet, ScaleSchedule};
pub use jet::{whitney_deviation, Jet, MultiIndex};
pub mod refinement;
pub mod verify;
pub mod whitney;

pub use refinement::{decide, infimum_deviation, select_jets, RefinementConfig, Verdict, VerdictStatus};
pub use verify::{verify_extension, GridSpec, VerificationReport};
pub use whitney::{classical_extend_finite, extend, DomainBox, ExtendOptions, ExtensionFunction, WhitneyCube};
