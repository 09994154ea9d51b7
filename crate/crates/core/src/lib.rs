//! Mechanism engine for participatory budgeting over the unit simplex.
//!
//! The crate has three layers:
//!
//! * data model and algebra: [`budget`] (budgets, vote profiles, overlap
//!   utility, L1 cost) and [`incremental`] (incremental allocation tables
//!   over voter subsets, projections, outcome tables);
//! * mechanisms and evaluation: [`mechanisms`] (random dictator / diarchy /
//!   referee, median schemes, Nash bargaining and its randomized variants,
//!   sequential deliberation), [`interactions`] (complement / substitute
//!   project groups) and [`distortion`] (optimal budgets, exact and
//!   Monte-Carlo distortion, canonical lower-bound instances);
//! * certification: [`lp`] (a self-contained dense simplex solver plus an
//!   alternating driver for bilinear programs) and [`verifier`] (case
//!   enumeration and the distortion-bound sweeps at 1.80 and 1.66).

pub mod budget;
pub mod distortion;
pub mod error;
pub mod incremental;
pub mod interactions;
pub mod lp;
pub mod mechanisms;
pub mod verifier;

pub use budget::{Budget, VoteProfile};
pub use error::Error;
pub use incremental::{AllocTable, SubsetMask};
pub use mechanisms::{BargainOutcome, Case, FillStrategy};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
